//! Scripted scans: the three limit processes for `c → 1/λ²`, `c → 0` and
//! `σ → 0`, the comparison with the heat equation, the whole-line
//! singularity scan and the boundary-burst propagation experiment.

use alloc::vec::Vec;

pub use num_complex::Complex64;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::boundary::{build_blocks, evolve_with_boundary, BoundarySignal, DirichletDatum, DirichletLift, ExponentialBurst};
use crate::error::{invalid, Error, Result};
use crate::modal::{solve_mode, LogScalar, ModalInitialData, ParameterSet, DEFAULT_DEGENERATE_TOLERANCE};
use crate::par;
use crate::quadrature::{simpson, CompensatedSum};
use crate::solver::{reconstruct, with_mode, Field};
use crate::spectrum::{box_modes, distance_to_exceptional, exceptional_for_c, exceptional_for_sigma, least_squares_slope, BasisDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    Ok,
    Saturated,
    Exceptional,
}

impl RowFlag {
    pub fn token(&self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::Saturated => "saturated",
            RowFlag::Exceptional => "exceptional",
        }
    }

    fn of(v: &LogScalar) -> Self {
        if v.is_saturated() {
            RowFlag::Saturated
        } else {
            RowFlag::Ok
        }
    }
}

/// One row of a two-exponential scan: `value = c₁e^{r₁t} + c₂e^{r₂t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitScanRow {
    pub k: usize,
    /// `c_k` or `σ_k`.
    pub parameter: f64,
    pub coeff_first: f64,
    pub coeff_second: f64,
    pub exp_first: f64,
    pub exp_second: f64,
    pub value_at_t: LogScalar,
    /// Lower bound for the norm of the full series at `t`.
    pub lower_bound_norm: f64,
    pub flag: RowFlag,
}

impl LimitScanRow {
    pub fn first_addendum(&self, t: f64) -> LogScalar {
        LogScalar::from_coefficient(self.coeff_first, self.exp_first * t)
    }

    pub fn second_addendum(&self, t: f64) -> LogScalar {
        LogScalar::from_coefficient(self.coeff_second, self.exp_second * t)
    }
}

fn two_term_row(k: usize, parameter: f64, c1: f64, r1: f64, c2: f64, r2: f64, t: f64) -> LimitScanRow {
    let value = LogScalar::from_coefficient(c1, r1 * t) + LogScalar::from_coefficient(c2, r2 * t);
    LimitScanRow {
        k,
        parameter,
        coeff_first: c1,
        coeff_second: c2,
        exp_first: r1,
        exp_second: r2,
        value_at_t: value,
        lower_bound_norm: value.value().abs(),
        flag: RowFlag::of(&value),
    }
}

/// Scan as `c` approaches `1/λ²` for the compatible data
/// `θ(0) = -a/(bλ²)`, `θ'(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limit1Row {
    pub c: f64,
    /// `1 - cλ²`
    pub leading: f64,
    pub delta: f64,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub exp_first: f64,
    pub exp_second: f64,
    pub first_addendum: LogScalar,
    pub second_addendum: LogScalar,
    /// Limit of the first addendum as `c → 1/λ²`, at the same `t`.
    pub first_addendum_limit: f64,
}

/// `-(a/(bλ²)) e^{-(bλ²/a)t}`, the limit of the first addendum.
pub fn limit1_first_addendum_limit(a: f64, b: f64, lambda_sq: f64, t: f64) -> f64 {
    -(a / (b * lambda_sq)) * (-(b * lambda_sq / a) * t).exp()
}

pub fn limit1_row(a: f64, b: f64, lambda_sq: f64, c: f64, t: f64) -> Result<Limit1Row> {
    let p = ParameterSet::new(a, b, c)?;
    if p.is_degenerate(lambda_sq, DEFAULT_DEGENERATE_TOLERANCE) {
        let nearest = 1.0 / lambda_sq;
        return Err(Error::ExceptionalParameter { value: c, nearest, distance: (c - nearest).abs() });
    }
    let leading = 1.0 - c * lambda_sq;
    let delta_sq = a * a - 4.0 * b * lambda_sq * leading;
    if delta_sq < 0.0 {
        return Err(invalid!("c = {c} gives complex roots; the scan needs real δ"));
    }
    let delta = delta_sq.sqrt();
    let bl = b * lambda_sq;
    let coeff_a = (2.0 * bl * leading - a * (a + delta)) / (2.0 * bl * delta);
    // -(a(δ - a) + 2bλ²L)/(2bλ²δ) with δ - a = -4bλ²L/(δ + a).
    let coeff_b = 4.0 * bl * leading * leading / ((delta + a) * (delta + a) * delta);
    let exp_first = -2.0 * bl / (a + delta);
    let exp_second = -(a + delta) / (2.0 * leading);
    Ok(Limit1Row {
        c,
        leading,
        delta,
        coeff_a,
        coeff_b,
        exp_first,
        exp_second,
        first_addendum: LogScalar::from_coefficient(coeff_a, exp_first * t),
        second_addendum: LogScalar::from_coefficient(coeff_b, exp_second * t),
        first_addendum_limit: limit1_first_addendum_limit(a, b, lambda_sq, t),
    })
}

pub fn limit1_scan(a: f64, b: f64, lambda_sq: f64, t: f64, c_values: &[f64]) -> Vec<Result<Limit1Row>> {
    par::map_indexed(c_values.len(), |i| limit1_row(a, b, lambda_sq, c_values[i], t))
}

/// `1/λ² ± 10⁻ʲ/λ²` for `j` in `js`, both sides interleaved (above first).
pub fn limit1_c_values(lambda_sq: f64, js: core::ops::RangeInclusive<i32>) -> Vec<f64> {
    js.flat_map(|j| {
        let e = 10f64.powi(-j);
        [(1.0 + e) / lambda_sq, (1.0 - e) / lambda_sq]
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Limit2Report {
    pub gamma: f64,
    /// Rows for `(1/k)θ_k` along `c_k = 1/λ_k² + γ/λ_k³`.
    pub rows: Vec<LimitScanRow>,
    /// Least-squares slope of `ln(exp_second)` against `ln k`.
    pub growth_exponent: f64,
    /// Least-squares slope of `ln|coeff|` against `ln k`.
    pub coefficient_exponent: f64,
    pub first_exponents_nonpositive: bool,
    /// Smallest `k` in the scan with `|θ_k(t)|/k > bound`.
    pub threshold_k: Option<usize>,
    pub bound: f64,
}

/// Maximum number of `+10⁻³` perturbations of `γ` tried on collision.
const GAMMA_RETRIES: usize = 100;

/// The sequence `c_k = 1/λ_k² + γ/λ_k³` with `θ(0) = 0`, `θ'(0) = 1` on mode
/// `k`, where `λ_k²` is the `k`-th eigenvalue of `basis`.
pub fn limit2_scan(
    a: f64,
    b: f64,
    gamma: f64,
    basis: &BasisDescriptor,
    k_range: core::ops::RangeInclusive<usize>,
    t: f64,
    bound: f64,
) -> Result<Limit2Report> {
    let (k_lo, k_hi) = (*k_range.start(), *k_range.end());
    if k_lo == 0 || k_hi > basis.truncation() || k_lo > k_hi {
        return Err(invalid!("k range {k_lo}..={k_hi} outside 1..={}", basis.truncation()));
    }
    if !(gamma > 0.0 && t > 0.0) {
        return Err(invalid!("γ and t must be positive"));
    }
    ParameterSet::new(a, b, 1.0)?;
    let modes = box_modes(basis);
    let set = exceptional_for_c(&modes)?;
    let c_of = |gamma: f64, lambda_sq: f64| 1.0 / lambda_sq + gamma / (lambda_sq * lambda_sq.sqrt());
    let collision = |gamma: f64| {
        (k_lo..=k_hi).find(|&k| {
            let c = c_of(gamma, modes[k - 1].lambda_sq);
            let (dist, nearest) = distance_to_exceptional(c, &set).unwrap_or((f64::INFINITY, 0.0));
            dist <= DEFAULT_DEGENERATE_TOLERANCE * c.max(nearest)
        })
    };
    let mut gamma = gamma;
    let mut tries = 0;
    while let Some(k) = collision(gamma) {
        tries += 1;
        if tries > GAMMA_RETRIES {
            return Err(Error::Configuration(alloc::format!("c_k collides with the exceptional set at k = {k}")));
        }
        gamma += 1e-3;
    }

    let rows: Vec<LimitScanRow> = (k_lo..=k_hi)
        .map(|k| {
            let lambda_sq = modes[k - 1].lambda_sq;
            let lambda = lambda_sq.sqrt();
            let c = c_of(gamma, lambda_sq);
            // 1 - cλ² = -γ/λ, δ = √(a² + 4bγλ).
            let leading = -gamma / lambda;
            let delta = (a * a + 4.0 * b * gamma * lambda).sqrt();
            let coeff = leading / (delta * k as f64);
            let r1 = -2.0 * b * lambda_sq / (a + delta);
            let r2 = -(a + delta) / (2.0 * leading);
            two_term_row(k, c, coeff, r1, -coeff, r2, t)
        })
        .collect();
    let growth: Vec<(f64, f64)> = rows.iter().map(|r| ((r.k as f64).ln(), r.exp_second.ln())).collect();
    let coeffs: Vec<(f64, f64)> = rows.iter().map(|r| ((r.k as f64).ln(), r.coeff_first.abs().ln())).collect();
    Ok(Limit2Report {
        gamma,
        growth_exponent: least_squares_slope(&growth),
        coefficient_exponent: least_squares_slope(&coeffs),
        first_exponents_nonpositive: rows.iter().all(|r| r.exp_first <= 0.0),
        threshold_k: rows.iter().find(|r| r.lower_bound_norm > bound).map(|r| r.k),
        bound,
        rows,
    })
}

/// `σ_k = 5/k²`
pub fn limit3_sigma(k: usize) -> f64 {
    5.0 / (k * k) as f64
}

/// Mode `n` of `σθ'' = -2θ' + Δθ - (σ²/4)Δθ''` on `(0, π)` with
/// `θ(0) = 1/n⁴`, `θ'(0) = -1/(2n²)`:
///
/// ```text
/// θ_n = -(4 - σn²)²/(8n⁴(n²σ - 2)) e^{-2n²t/(4 - σn²)} + σ²/(8(n²σ - 2)) e^{-2t/σ}
/// ```
pub fn limit3_mode(n: usize, sigma: f64, t: f64) -> LimitScanRow {
    let n2 = (n * n) as f64;
    let l = 4.0 - sigma * n2;
    let m = n2 * sigma - 2.0;
    let c1 = -(l * l) / (8.0 * n2 * n2 * m);
    let r1 = -2.0 * n2 / l;
    let c2 = sigma * sigma / (8.0 * m);
    let r2 = -2.0 / sigma;
    two_term_row(n, sigma, c1, r1, c2, r2, t)
}

/// Exact check of `2θ₁ = Δθ₀` on mode `n` for the data above:
/// `2·(-1/(2n²)) = -n²·(1/n⁴)`, compared as integer fractions.
pub fn limit3_heat_compatible(n: usize) -> bool {
    let n2 = (n as i128) * (n as i128);
    // left: -2 / (2n²); right: -n² / n⁴.
    let (ln, ld) = (-2i128, 2 * n2);
    let (rn, rd) = (-n2, n2 * n2);
    ln * rd == rn * ld
}

#[derive(Debug, Clone, PartialEq)]
pub struct Limit3Report {
    pub rows: Vec<LimitScanRow>,
    /// Smallest `k` with `|θ_{k,σ_k}(t)| > k`.
    pub threshold_k: Option<usize>,
    pub heat_compatible: bool,
}

pub fn limit3_scan(k_range: core::ops::RangeInclusive<usize>, t: f64) -> Result<Limit3Report> {
    if !(t > 0.0) {
        return Err(invalid!("t must be positive"));
    }
    if *k_range.start() == 0 {
        return Err(invalid!("k starts at 1"));
    }
    let rows: Vec<LimitScanRow> = k_range.clone().map(|k| limit3_mode(k, limit3_sigma(k), t)).collect();
    Ok(Limit3Report {
        threshold_k: rows.iter().find(|r| r.lower_bound_norm > r.k as f64).map(|r| r.k),
        heat_compatible: k_range.clone().all(limit3_heat_compatible),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatComparisonRow {
    pub sigma: f64,
    /// `ln ‖θ_σ(t) - θ_heat(t)‖`
    pub log_distance: f64,
    pub distance: f64,
    pub flag: RowFlag,
}

/// Distance at time `t` between the σ-explicit solution and the heat solution
/// `aθ' = bΔθ` started from `theta0`.
pub fn heat_comparison(
    p: &ParameterSet,
    sigmas: &[f64],
    theta0: &Field,
    theta1: &Field,
    t: f64,
) -> Vec<Result<HeatComparisonRow>> {
    let modes = box_modes(theta0.basis());
    par::map_indexed(sigmas.len(), |i| {
        let sigma = sigmas[i];
        let ps = p.with_sigma(sigma)?;
        let gamma_rho = ps.physical.map(|ph| ph.gamma_rho).unwrap_or(1.0);
        let zset = exceptional_for_sigma(&modes, gamma_rho)?;
        let (dist, nearest) = distance_to_exceptional(sigma, &zset)?;
        if dist <= DEFAULT_DEGENERATE_TOLERANCE * sigma.max(nearest) {
            return Err(Error::Configuration(alloc::format!(
                "σ = {sigma} coincides with the exceptional value {nearest}"
            )));
        }
        let heat_rate = |lambda_sq: f64| -ps.b * lambda_sq / ps.a;
        let mut logs = Vec::with_capacity(modes.len());
        for (j, m) in modes.iter().enumerate() {
            let init = ModalInitialData::new(theta0.coefficients()[j], theta1.coefficients()[j]);
            let sol = solve_mode(&ps, m.lambda_sq, init, DEFAULT_DEGENERATE_TOLERANCE).map_err(|e| with_mode(e, m.index))?;
            let (v, _) = sol.eval_log(t);
            let heat = LogScalar::from_coefficient(-init.alpha, heat_rate(m.lambda_sq) * t);
            logs.push(v + heat);
        }
        let log_distance = log_norm(&logs);
        let saturated = log_distance > crate::SATURATION_LOG;
        Ok(HeatComparisonRow {
            sigma,
            log_distance,
            distance: if saturated { f64::INFINITY } else { log_distance.exp() },
            flag: if saturated { RowFlag::Saturated } else { RowFlag::Ok },
        })
    })
}

/// `ln √(Σ vᵢ²)` for log-scaled entries.
fn log_norm(values: &[LogScalar]) -> f64 {
    let top = values.iter().filter(|v| v.sign != 0.0).map(|v| v.log).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = CompensatedSum::new();
    for v in values.iter().filter(|v| v.sign != 0.0) {
        acc.add((2.0 * (v.log - top)).exp());
    }
    top + 0.5 * acc.value().ln()
}

/// `e^{z}` as `(unit phase, ln magnitude)`, so that huge exponents stay finite.
fn exp_split(z: Complex64) -> (Complex64, f64) {
    (Complex64::from_polar(1.0, z.im), z.re)
}

/// Both terms of `θ̂(λ,t) = A e^{r₊t} - A e^{r₋t}`, each as a unit-phase
/// complex factor times `e^{log}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WholeLineValue {
    pub lambda: f64,
    pub amplitude: Complex64,
    pub first_phase: Complex64,
    pub first_log_magnitude: f64,
    pub second_phase: Complex64,
    pub second_log_magnitude: f64,
}

impl WholeLineValue {
    pub fn first_term(&self) -> Complex64 {
        self.first_phase * self.amplitude * self.first_log_magnitude.exp()
    }

    pub fn second_term(&self) -> Complex64 {
        -(self.second_phase * self.amplitude * self.second_log_magnitude.exp())
    }

    pub fn value(&self) -> Complex64 {
        self.first_term() + self.second_term()
    }

    /// `ln|A e^{r₋t}|`
    pub fn second_log_abs(&self) -> f64 {
        self.amplitude.norm().ln() + self.second_log_magnitude
    }

    pub fn first_log_abs(&self) -> f64 {
        self.amplitude.norm().ln() + self.first_log_magnitude
    }
}

/// Fourier mode of the whole-line problem with `θ̂(0) = 0`, `θ̂'(0) = ŵ₁`.
pub fn whole_line_mode(a: f64, b: f64, c: f64, lambda: f64, t: f64, w1_hat: f64) -> Result<WholeLineValue> {
    ParameterSet::new(a, b, c)?;
    let leading = 1.0 - c * lambda * lambda;
    if leading.abs() <= DEFAULT_DEGENERATE_TOLERANCE * (c * lambda * lambda).max(1.0) {
        return Err(Error::SingularParameter { lambda });
    }
    let bl = b * lambda * lambda;
    let delta_sq = a * a - 4.0 * bl * leading;
    let (delta, r_plus, r_minus) = if delta_sq >= 0.0 {
        let d = delta_sq.sqrt();
        (Complex64::new(d, 0.0), Complex64::new(-2.0 * bl / (a + d), 0.0), Complex64::new(-(a + d) / (2.0 * leading), 0.0))
    } else {
        let w = (-delta_sq).sqrt() / (2.0 * leading);
        let re = -a / (2.0 * leading);
        (Complex64::new(0.0, (-delta_sq).sqrt()), Complex64::new(re, w), Complex64::new(re, -w))
    };
    if delta.norm() == 0.0 {
        return Err(invalid!("double root at λ = {lambda}; the two-exponential form does not apply"));
    }
    let amplitude = delta.inv() * (leading * w1_hat);
    let (first_phase, first_log_magnitude) = exp_split(r_plus * t);
    let (second_phase, second_log_magnitude) = exp_split(r_minus * t);
    Ok(WholeLineValue { lambda, amplitude, first_phase, first_log_magnitude, second_phase, second_log_magnitude })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Approach {
    /// `λ = 1/√c - 2⁻ʲ`
    Below,
    /// `λ = 1/√c + 2⁻ʲ`
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularityRow {
    pub j: i32,
    pub lambda: f64,
    pub first_abs: f64,
    pub second_log_abs: f64,
    pub second_abs: f64,
}

pub fn singularity_scan(
    a: f64,
    b: f64,
    c: f64,
    t: f64,
    js: core::ops::RangeInclusive<i32>,
    approach: Approach,
    w1_hat: f64,
) -> Result<Vec<SingularityRow>> {
    let center = 1.0 / c.sqrt();
    js.map(|j| {
        let step = 2f64.powi(-j);
        let lambda = match approach {
            Approach::Below => center - step,
            Approach::Above => center + step,
        };
        let v = whole_line_mode(a, b, c, lambda, t, w1_hat)?;
        let second_log_abs = v.second_log_abs();
        Ok(SingularityRow {
            j,
            lambda,
            first_abs: v.first_term().norm(),
            second_log_abs,
            second_abs: if second_log_abs > crate::SATURATION_LOG { f64::INFINITY } else { second_log_abs.exp() },
        })
    })
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationRow {
    pub n: usize,
    /// `∫_{Ω₁} (θ(T)² + θ'(T)²)`
    pub mass_in_subregion: f64,
    /// `∫_{Ω₁} |Df₀|²`
    pub target_mass: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub rows: Vec<PropagationRow>,
    /// Smallest `n` with ratio ≥ 1/2.
    pub threshold_n: Option<usize>,
}

/// Points of the subregion quadrature.
pub const PROPAGATION_QUADRATURE_POINTS: usize = 2049;

/// Boundary bursts `f_n(t) = (1/n)e^{-n(T-t)} f₀` from rest, measuring the
/// state on an interior subinterval at time `T`.
pub fn propagation_burst(
    p: &ParameterSet,
    basis: &BasisDescriptor,
    f0: &DirichletDatum,
    horizon: f64,
    n_values: &[usize],
    subregion: (f64, f64),
) -> Result<PropagationReport> {
    if basis.dimension() != 1 {
        return Err(invalid!("the propagation experiment runs on an interval"));
    }
    let length = basis.lengths()[0];
    let (lo, hi) = subregion;
    if !(0.0 < lo && lo < hi && hi < length) {
        return Err(invalid!("subregion ({lo}, {hi}) must lie strictly inside (0, {length})"));
    }
    if !(horizon > 0.0) {
        return Err(invalid!("T must be positive"));
    }
    let blocks = build_blocks(p, basis, f0)?;
    if blocks.iter().all(|b| b.d == 0.0) {
        return Err(invalid!("the boundary datum has a zero lift"));
    }
    let lift = DirichletLift::new(p.effective_c(), basis, f0)?;
    let m = PROPAGATION_QUADRATURE_POINTS;
    let step = (hi - lo) / (m - 1) as f64;
    let xs: Vec<f64> = (0..m).map(|i| lo + step * i as f64).collect();
    let target: Vec<f64> = xs.iter().map(|&x| lift.eval(&[x]).powi(2)).collect();
    let target_mass = simpson(&target, step)?;
    let zero = Field::zeros(basis);
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n == 0 {
            return Err(invalid!("burst index starts at 1"));
        }
        let signal = BoundarySignal::new(f0.clone(), ExponentialBurst { rate: n as f64, horizon }, horizon)?;
        // The burst lives on a time scale 1/n; resolve it with several nodes.
        let quad_step = (1e-3 * horizon).min(0.05 / n as f64);
        let (theta, velocity) = evolve_with_boundary(&blocks, &zero, &zero, &signal, horizon, quad_step)?;
        let u = reconstruct(&theta, &xs)?;
        let v = reconstruct(&velocity, &xs)?;
        let density: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * a + b * b).collect();
        let mass = simpson(&density, step)?;
        rows.push(PropagationRow { n, mass_in_subregion: mass, target_mass, ratio: mass / target_mass });
    }
    Ok(PropagationReport { threshold_n: rows.iter().find(|r| r.ratio >= 0.5).map(|r| r.n), rows })
}
