//! Truncated eigen-series solutions of the problem with homogeneous boundary
//! data: projection of samples, well-posedness gating, evolution, norms and
//! pointwise reconstruction.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::modal::{solve_mode, ModalInitialData, ParameterSet, DEFAULT_DEGENERATE_TOLERANCE};
use crate::par;
use crate::quadrature::{compensated_sum, CompensatedSum};
use crate::spectrum::{box_modes, distance_to_exceptional, exceptional_for_c, sine_mode, BasisDescriptor, EigenMode};

/// Coefficients of a function against the first `truncation` eigenfunctions
/// of a basis, in enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    basis: BasisDescriptor,
    coefficients: Vec<f64>,
    saturated: bool,
}

impl Field {
    pub fn new(basis: BasisDescriptor, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.truncation() {
            return Err(invalid!(
                "expected {} coefficients, got {}",
                basis.truncation(),
                coefficients.len()
            ));
        }
        if coefficients.iter().any(|v| v.is_nan()) {
            return Err(invalid!("coefficients must not be NaN"));
        }
        let saturated = coefficients.iter().any(|v| v.is_infinite());
        Ok(Self { basis, coefficients, saturated })
    }

    pub fn zeros(basis: &BasisDescriptor) -> Self {
        Self { basis: basis.clone(), coefficients: vec![0.0; basis.truncation()], saturated: false }
    }

    /// The `n`-th basis vector (1-based).
    pub fn unit(basis: &BasisDescriptor, n: usize) -> Result<Self> {
        if n == 0 || n > basis.truncation() {
            return Err(invalid!("mode index {n} outside 1..={}", basis.truncation()));
        }
        let mut f = Self::zeros(basis);
        f.coefficients[n - 1] = 1.0;
        Ok(f)
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    /// Set when some coefficient overflowed to a signed infinity.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn scaled(&self, factor: f64) -> Field {
        self.map(|v| v * factor)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same_basis(other)?;
        let coefficients = self.coefficients.iter().zip(&other.coefficients).map(|(x, y)| x + y).collect();
        Field::new(self.basis.clone(), coefficients)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.add(&other.scaled(-1.0))
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let coefficients: Vec<f64> = self.coefficients.iter().map(|&v| f(v)).collect();
        let saturated = coefficients.iter().any(|v| v.is_infinite());
        Field { basis: self.basis.clone(), coefficients, saturated }
    }

    fn check_same_basis(&self, other: &Field) -> Result<()> {
        if self.basis != other.basis {
            return Err(invalid!("fields live on different bases"));
        }
        Ok(())
    }
}

/// Values on a uniform tensor grid over the basis box, endpoints included,
/// last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub counts: Vec<usize>,
    pub values: Vec<f64>,
}

impl GridSamples {
    pub fn from_fn(basis: &BasisDescriptor, counts: &[usize], f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        if counts.len() != basis.dimension() || counts.iter().any(|&n| n < 2) {
            return Err(invalid!("need at least two grid points on each of {} axes", basis.dimension()));
        }
        let total: usize = counts.iter().product();
        let mut point = vec![0.0; counts.len()];
        let values = (0..total)
            .map(|flat| {
                grid_point(basis, counts, flat, &mut point);
                f(&point)
            })
            .collect();
        Ok(Self { counts: counts.to_vec(), values })
    }
}

fn grid_point(basis: &BasisDescriptor, counts: &[usize], mut flat: usize, point: &mut [f64]) {
    for axis in (0..counts.len()).rev() {
        let i = flat % counts[axis];
        flat /= counts[axis];
        point[axis] = basis.lengths()[axis] * i as f64 / (counts[axis] - 1) as f64;
    }
}

/// Composite Simpson weights on `count` uniform points over `(0, length)`.
fn simpson_weights(count: usize, length: f64) -> Vec<f64> {
    let h = length / (count - 1) as f64;
    (0..count)
        .map(|i| {
            let w = if i == 0 || i == count - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Coefficients `⟨f, φ_n⟩` by tensor-product Simpson quadrature.
///
/// Each axis needs an odd number of points, at least four per half-wave of the
/// highest retained sine on that axis.
pub fn project_samples(samples: &GridSamples, basis: &BasisDescriptor) -> Result<Field> {
    let d = basis.dimension();
    if samples.counts.len() != d {
        return Err(invalid!("samples have {} axes, basis has {d}", samples.counts.len()));
    }
    if samples.values.len() != samples.counts.iter().product::<usize>() {
        return Err(invalid!("sample count does not match the grid shape"));
    }
    let modes = box_modes(basis);
    for axis in 0..d {
        let top = modes.iter().map(|m| m.multi_index[axis]).max().unwrap_or(1);
        let n = samples.counts[axis];
        if n.is_multiple_of(2) || n < 4 * top + 1 {
            return Err(invalid!(
                "axis {axis} needs an odd point count of at least {}, got {n}",
                4 * top + 1
            ));
        }
    }
    // Per-axis tables of weight·sine, indexed [mode index - 1][grid point].
    let tables: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|axis| {
            let (n, l) = (samples.counts[axis], basis.lengths()[axis]);
            let top = modes.iter().map(|m| m.multi_index[axis]).max().unwrap_or(1);
            let w = simpson_weights(n, l);
            (1..=top)
                .map(|m| (0..n).map(|i| w[i] * sine_mode(m, l, l * i as f64 / (n - 1) as f64)).collect())
                .collect()
        })
        .collect();
    let coefficients = par::map_indexed(modes.len(), |j| {
        let mi = &modes[j].multi_index;
        let mut acc = CompensatedSum::new();
        for (flat, &v) in samples.values.iter().enumerate() {
            let mut rest = flat;
            let mut weight = v;
            for axis in (0..d).rev() {
                let i = rest % samples.counts[axis];
                rest /= samples.counts[axis];
                weight *= tables[axis][mi[axis] - 1][i];
            }
            acc.add(weight);
        }
        acc.value()
    });
    Field::new(basis.clone(), coefficients)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    WellPosed,
    Exceptional,
    NearExceptional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellPosednessReport {
    pub c_value: f64,
    pub distance: f64,
    pub nearest_exceptional: f64,
    pub verdict: Verdict,
    pub threshold: f64,
    /// `c` lies below every enumerated exceptional value, where the
    /// unenumerated tail `1/λ²` (n > N) accumulates at zero.
    pub tail_undecidable: bool,
}

/// Gate on `|c - 1/λ²|` treated as an exact hit, matching the relative
/// degeneracy gate on `1 - cλ²`.
fn exact_match_gate(c: f64, nearest: f64) -> f64 {
    DEFAULT_DEGENERATE_TOLERANCE * c.max(nearest)
}

/// Classifies `c` against the exceptional values of the truncated spectrum.
pub fn check_wellposed(c: f64, basis: &BasisDescriptor, threshold: f64) -> Result<WellPosednessReport> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid!("c must be positive and finite, got {c}"));
    }
    if !(threshold >= 0.0) {
        return Err(invalid!("threshold must be nonnegative, got {threshold}"));
    }
    let set = exceptional_for_c(&box_modes(basis))?;
    let (distance, nearest) = distance_to_exceptional(c, &set)?;
    let tail_undecidable = set.smallest().is_some_and(|s| c < s);
    let verdict = if distance <= exact_match_gate(c, nearest) {
        Verdict::Exceptional
    } else if distance <= threshold || tail_undecidable {
        Verdict::NearExceptional
    } else {
        Verdict::WellPosed
    };
    Ok(WellPosednessReport { c_value: c, distance, nearest_exceptional: nearest, verdict, threshold, tail_undecidable })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvolveOptions {
    /// Solve even when `c` is exceptional; every degenerate mode must then
    /// satisfy its compatibility condition.
    pub allow_exceptional: bool,
}

/// `(θ(t), θ'(t))` from `(θ(0), θ'(0))`, refusing exceptional `c`.
pub fn evolve_homogeneous(p: &ParameterSet, theta0: &Field, theta1: &Field, t: f64) -> Result<(Field, Field)> {
    evolve_homogeneous_with(p, theta0, theta1, t, EvolveOptions::default())
}

pub fn evolve_homogeneous_with(
    p: &ParameterSet,
    theta0: &Field,
    theta1: &Field,
    t: f64,
    options: EvolveOptions,
) -> Result<(Field, Field)> {
    theta0.check_same_basis(theta1)?;
    if !t.is_finite() {
        return Err(invalid!("time must be finite, got {t}"));
    }
    let basis = theta0.basis();
    if !options.allow_exceptional {
        let report = check_wellposed(p.effective_c(), basis, 0.0)?;
        if report.verdict == Verdict::Exceptional {
            return Err(Error::ExceptionalParameter {
                value: report.c_value,
                nearest: report.nearest_exceptional,
                distance: report.distance,
            });
        }
    }
    let modes = box_modes(basis);
    let per_mode = par::map_indexed(modes.len(), |j| {
        let init = ModalInitialData::new(theta0.coefficients[j], theta1.coefficients[j]);
        solve_mode(p, modes[j].lambda_sq, init, DEFAULT_DEGENERATE_TOLERANCE)
            .map(|sol| sol.eval(t))
            .map_err(|e| with_mode(e, modes[j].index))
    });
    let mut values = Vec::with_capacity(modes.len());
    let mut derivatives = Vec::with_capacity(modes.len());
    for r in per_mode {
        let v = r?;
        values.push(v.value);
        derivatives.push(v.derivative);
    }
    Ok((Field::new(basis.clone(), values)?, Field::new(basis.clone(), derivatives)?))
}

pub(crate) fn with_mode(e: Error, index: usize) -> Error {
    match e {
        Error::UnsolvableMode { report, .. } => Error::UnsolvableMode { mode: Some(index), report },
        other => other,
    }
}

/// Map `(θ(0), θ'(0)) ↦ (θ(t), θ'(t))` of one mode, as a row-major 2×2 matrix.
pub fn fundamental_matrix(p: &ParameterSet, lambda_sq: f64, t: f64) -> Result<[[f64; 2]; 2]> {
    let col = |alpha, beta| -> Result<(f64, f64)> {
        let v = solve_mode(p, lambda_sq, ModalInitialData::new(alpha, beta), DEFAULT_DEGENERATE_TOLERANCE)?.eval(t);
        Ok((v.value, v.derivative))
    };
    let (u0, u1) = col(1.0, 0.0)?;
    let (v0, v1) = col(0.0, 1.0)?;
    Ok([[u0, v0], [u1, v1]])
}

/// L² norm by Parseval.
pub fn field_norm(f: &Field) -> f64 {
    compensated_sum(f.coefficients.iter().map(|v| v * v)).sqrt()
}

/// Pointwise values of the series. `points` holds `d` coordinates per point.
pub fn reconstruct(f: &Field, points: &[f64]) -> Result<Vec<f64>> {
    let basis = f.basis();
    let d = basis.dimension();
    if !points.len().is_multiple_of(d) {
        return Err(invalid!("point buffer length {} is not a multiple of {d}", points.len()));
    }
    if let Some(p) = points.chunks_exact(d).find(|p| !basis.contains(p)) {
        return Err(invalid!("point {p:?} lies outside the domain"));
    }
    let modes = box_modes(basis);
    Ok(par::map_indexed(points.len() / d, |i| series_at(basis, &modes, &f.coefficients, &points[i * d..(i + 1) * d])))
}

fn series_at(basis: &BasisDescriptor, modes: &[EigenMode], coefficients: &[f64], point: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (m, &c) in modes.iter().zip(coefficients) {
        if c != 0.0 {
            acc.add(c * basis.eigenfunction(&m.multi_index, point));
        }
    }
    acc.value()
}
