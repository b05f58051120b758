//! Dirichlet-Laplacian eigenpairs on intervals and boxes, and the
//! exceptional sets built from them.
//!
//! The eigenfunctions on the box `(0, L₁) × … × (0, L_d)` are
//! `φ_m(x) = Π √(2/L_i) sin(m_i π x_i / L_i)` with `Aφ_m = -λ²φ_m` and
//! `λ² = Σ (m_i π / L_i)²`. Modes are enumerated by nondecreasing `λ²`, ties
//! broken by the lexicographic order of the multi-index. Repeated eigenvalues
//! appear as separate entries.

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenMode {
    /// 1-based position in the enumeration.
    pub index: usize,
    /// The positive quantity λ² with `Aφ = -λ²φ`.
    pub lambda_sq: f64,
    /// Per-axis sine indices, each ≥ 1.
    pub multi_index: Vec<usize>,
}

/// An axis-aligned box `(0, L₁) × … × (0, L_d)` plus the number of retained
/// modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDescriptor {
    lengths: Vec<f64>,
    truncation: usize,
}

impl BasisDescriptor {
    pub fn new(lengths: Vec<f64>, truncation: usize) -> Result<Self> {
        if lengths.is_empty() {
            return Err(invalid!("basis needs at least one axis"));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(invalid!("box side lengths must be positive and finite, got {l}"));
        }
        if truncation == 0 {
            return Err(invalid!("truncation must be at least 1"));
        }
        Ok(Self { lengths, truncation })
    }

    pub fn interval(length: f64, truncation: usize) -> Result<Self> {
        Self::new(alloc::vec![length], truncation)
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn with_truncation(&self, truncation: usize) -> Result<Self> {
        Self::new(self.lengths.clone(), truncation)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dimension()
            && point
                .iter()
                .zip(&self.lengths)
                .all(|(&x, &l)| (0.0..=l).contains(&x))
    }

    /// Value of the normalized eigenfunction with the given multi-index.
    pub fn eigenfunction(&self, multi_index: &[usize], point: &[f64]) -> f64 {
        multi_index
            .iter()
            .zip(point)
            .zip(&self.lengths)
            .map(|((&m, &x), &l)| sine_mode(m, l, x))
            .product()
    }
}

/// `√(2/L) sin(nπx/L)`, the normalized Dirichlet sine on `(0, L)`.
pub fn sine_mode(n: usize, length: f64, x: f64) -> f64 {
    (2.0 / length).sqrt() * (n as f64 * PI * x / length).sin()
}

/// `(nπ/L)²`
pub fn axis_lambda_sq(n: usize, length: f64) -> f64 {
    let k = n as f64 * PI / length;
    k * k
}

/// Sum of per-axis terms in ascending order, so that permuted multi-indices
/// on equal sides give bit-identical eigenvalues.
fn box_lambda_sq(multi_index: &[usize], lengths: &[f64]) -> f64 {
    let mut terms: Vec<f64> = multi_index
        .iter()
        .zip(lengths)
        .map(|(&n, &l)| axis_lambda_sq(n, l))
        .collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

pub fn interval_modes(length: f64, count: usize) -> Result<Vec<EigenMode>> {
    if !(length.is_finite() && length > 0.0) {
        return Err(invalid!("interval length must be positive, got {length}"));
    }
    if count == 0 {
        return Err(invalid!("mode count must be at least 1"));
    }
    Ok((1..=count)
        .map(|n| EigenMode {
            index: n,
            lambda_sq: axis_lambda_sq(n, length),
            multi_index: alloc::vec![n],
        })
        .collect())
}

/// First `truncation` modes of the box, sorted by `λ²` then multi-index.
pub fn box_modes(basis: &BasisDescriptor) -> Vec<EigenMode> {
    let lengths = basis.lengths();
    let wanted = basis.truncation();
    let ground: f64 = lengths.iter().map(|&l| axis_lambda_sq(1, l)).sum();

    // Grow the cutoff until at least `wanted` modes lie below it; every mode
    // with λ² at or under the cutoff is then enumerated, ties included.
    let mut cutoff = ground * 2.0;
    loop {
        let mut found = Vec::new();
        let mut index = alloc::vec![1usize; lengths.len()];
        collect_below(lengths, cutoff, 0, 0.0, &mut index, &mut found);
        if found.len() >= wanted {
            found.sort_by(compare_modes);
            found.truncate(wanted);
            for (i, m) in found.iter_mut().enumerate() {
                m.index = i + 1;
            }
            return found;
        }
        cutoff *= 2.0;
    }
}

fn compare_modes(a: &EigenMode, b: &EigenMode) -> Ordering {
    a.lambda_sq
        .total_cmp(&b.lambda_sq)
        .then_with(|| a.multi_index.cmp(&b.multi_index))
}

fn collect_below(
    lengths: &[f64],
    cutoff: f64,
    axis: usize,
    partial: f64,
    index: &mut Vec<usize>,
    out: &mut Vec<EigenMode>,
) {
    // Remaining axes contribute at least their ground term.
    let rest: f64 = lengths[axis + 1..].iter().map(|&l| axis_lambda_sq(1, l)).sum();
    let mut n = 1;
    loop {
        let term = axis_lambda_sq(n, lengths[axis]);
        if partial + term + rest > cutoff {
            break;
        }
        index[axis] = n;
        if axis + 1 == lengths.len() {
            out.push(EigenMode {
                index: 0,
                lambda_sq: box_lambda_sq(index, lengths),
                multi_index: index.clone(),
            });
        } else {
            collect_below(lengths, cutoff, axis + 1, partial + term, index, out);
        }
        n += 1;
    }
    index[axis] = 1;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExceptionalKind {
    /// `{1/λ_n²}`
    ForC,
    /// `{γρ/λ_n²}`
    ForSigma { gamma_rho: f64 },
}

/// Finite truncation of an exceptional set, deduplicated and sorted
/// ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalSet {
    pub kind: ExceptionalKind,
    pub values: Vec<f64>,
}

impl ExceptionalSet {
    /// Distance to the nearest member, and that member (the smaller one on
    /// ties).
    pub fn distance(&self, value: f64) -> Result<(f64, f64)> {
        distance_to_exceptional(value, self)
    }

    /// Smallest enumerated member. Members of the untruncated set below this
    /// value are not represented.
    pub fn smallest(&self) -> Option<f64> {
        self.values.first().copied()
    }
}

fn sorted_unique(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

pub fn exceptional_for_c(modes: &[EigenMode]) -> Result<ExceptionalSet> {
    if modes.is_empty() {
        return Err(invalid!("exceptional set needs at least one mode"));
    }
    Ok(ExceptionalSet {
        kind: ExceptionalKind::ForC,
        values: sorted_unique(modes.iter().map(|m| 1.0 / m.lambda_sq).collect()),
    })
}

/// `{γρ · (1/λ²)}`: computed as a product with the `c`-set values so that the
/// two sets are exact scalings of one another.
pub fn exceptional_for_sigma(modes: &[EigenMode], gamma_rho: f64) -> Result<ExceptionalSet> {
    if !(gamma_rho.is_finite() && gamma_rho > 0.0) {
        return Err(invalid!("γρ must be positive, got {gamma_rho}"));
    }
    let for_c = exceptional_for_c(modes)?;
    Ok(ExceptionalSet {
        kind: ExceptionalKind::ForSigma { gamma_rho },
        values: sorted_unique(for_c.values.iter().map(|v| gamma_rho * v).collect()),
    })
}

pub fn distance_to_exceptional(value: f64, set: &ExceptionalSet) -> Result<(f64, f64)> {
    let values = &set.values;
    if values.is_empty() {
        return Err(invalid!("exceptional set is empty"));
    }
    // Values are sorted; the nearest member is adjacent to the insertion point.
    let pos = values.partition_point(|&v| v < value);
    let mut best: Option<(f64, f64)> = None;
    for &v in values[pos.saturating_sub(1)..values.len().min(pos + 1)].iter() {
        let d = (value - v).abs();
        match best {
            Some((bd, _)) if bd <= d => {}
            _ => best = Some((d, v)),
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("exceptional set is empty".into()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    /// Least-squares slope of `ln λ_k` against `ln k`.
    pub exponent: f64,
    /// The asymptotic prediction `1/d`.
    pub predicted: f64,
}

/// Fits the growth exponent of `λ_k = √(λ_k²)` in the mode index.
pub fn weyl_exponent_fit(modes: &[EigenMode], dimension: usize) -> Result<WeylFit> {
    if modes.len() < 16 {
        return Err(invalid!("Weyl fit needs at least 16 modes, got {}", modes.len()));
    }
    if dimension == 0 {
        return Err(invalid!("dimension must be positive"));
    }
    let points: Vec<(f64, f64)> = modes
        .iter()
        .enumerate()
        .map(|(i, m)| (((i + 1) as f64).ln(), 0.5 * m.lambda_sq.ln()))
        .collect();
    Ok(WeylFit {
        exponent: least_squares_slope(&points),
        predicted: 1.0 / dimension as f64,
    })
}

/// Ordinary least-squares slope through `(x, y)` pairs.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    sxy / sxx
}
