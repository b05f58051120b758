//! Nonhomogeneous Dirichlet data.
//!
//! The boundary datum is lifted by the Dirichlet map `D` of `(I + cΔ)`, and
//! each mode of the state `W = (θ, θ')` evolves under the 2×2 block
//!
//! ```text
//! 𝔸 = [[0, 1], [k, -h]],   h = a/(1 - cλ²),   k = -bλ²/(1 - cλ²),   β = b/c,
//! ```
//!
//! driven by `𝔻 = (0, d)` with `d = ⟨Df₀, φ⟩`. The input enters through
//!
//! ```text
//! W(t) = e^{𝔸t}[W(0) - 𝔻f'(0) - 𝔸𝔻f(0)] + 𝔻f'(t) + 𝔸𝔻f(t)
//!        + ∫₀ᵗ e^{𝔸(t-s)} (𝔸² - β) 𝔻 f(s) ds
//! ```
//!
//! so that only `f` itself appears under the integral.

use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::modal::{CharacteristicRoots, ParameterSet};
use crate::par;
use crate::quadrature::simpson_intervals;
use crate::solver::{check_wellposed, Field, Verdict};
use crate::spectrum::{axis_lambda_sq, box_modes, sine_mode, BasisDescriptor};

/// `|sin(κL)|` at or below this marks the Dirichlet map as undefined.
pub const LIFT_SINGULARITY_GATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// The face `x_axis = 0`.
    Low,
    /// The face `x_axis = L_axis`.
    High,
}

/// One separable term of a face profile: `amplitude · Π_{j≠axis} φ_{m_j}(x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMode {
    /// Sine indices on the remaining axes, in axis order.
    pub tangential: Vec<usize>,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceDatum {
    pub axis: usize,
    pub side: Side,
    pub modes: Vec<FaceMode>,
}

/// Spatial boundary values.
#[derive(Debug, Clone, PartialEq)]
pub enum DirichletDatum {
    /// Values at `x = 0` and `x = L`.
    Interval { g0: f64, g1: f64 },
    /// Separable per-face profiles on a box.
    Box { faces: Vec<FaceDatum> },
}

impl DirichletDatum {
    pub fn is_zero(&self) -> bool {
        match self {
            DirichletDatum::Interval { g0, g1 } => *g0 == 0.0 && *g1 == 0.0,
            DirichletDatum::Box { faces } => faces.iter().flat_map(|f| &f.modes).all(|m| m.amplitude == 0.0),
        }
    }

    fn validate(&self, basis: &BasisDescriptor) -> Result<()> {
        let d = basis.dimension();
        match self {
            DirichletDatum::Interval { g0, g1 } => {
                if d != 1 {
                    return Err(invalid!("interval datum on a {d}-dimensional basis"));
                }
                if !(g0.is_finite() && g1.is_finite()) {
                    return Err(invalid!("boundary values must be finite"));
                }
            }
            DirichletDatum::Box { faces } => {
                for face in faces {
                    if face.axis >= d {
                        return Err(invalid!("face axis {} outside a {d}-dimensional box", face.axis));
                    }
                    for m in &face.modes {
                        if m.tangential.len() + 1 != d || m.tangential.contains(&0) {
                            return Err(invalid!("face mode needs {} positive tangential indices", d - 1));
                        }
                        if !m.amplitude.is_finite() {
                            return Err(invalid!("face amplitudes must be finite"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Separable terms `(axis, side, tangential, amplitude)`.
    fn terms(&self) -> Vec<(usize, Side, Vec<usize>, f64)> {
        match self {
            DirichletDatum::Interval { g0, g1 } => {
                alloc::vec![(0, Side::Low, Vec::new(), *g0), (0, Side::High, Vec::new(), *g1)]
            }
            DirichletDatum::Box { faces } => faces
                .iter()
                .flat_map(|f| f.modes.iter().map(move |m| (f.axis, f.side, m.tangential.clone(), m.amplitude)))
                .collect(),
        }
    }
}

/// Profile `ψ` on `(0, L)` with `ψ'' = -κ²ψ`, `ψ(0) = 1`, `ψ(L) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Decay {
    Oscillatory { kappa: f64, denom: f64 },
    Hyperbolic { kappa: f64 },
    Linear,
}

impl Decay {
    fn new(kappa_sq: f64, length: f64) -> Result<Self> {
        if kappa_sq > 0.0 {
            let kappa = kappa_sq.sqrt();
            let denom = (kappa * length).sin();
            if denom.abs() <= LIFT_SINGULARITY_GATE {
                return Err(Error::ExceptionalParameter { value: kappa_sq, nearest: kappa_sq, distance: denom.abs() });
            }
            Ok(Decay::Oscillatory { kappa, denom })
        } else if kappa_sq < 0.0 {
            Ok(Decay::Hyperbolic { kappa: (-kappa_sq).sqrt() })
        } else {
            Ok(Decay::Linear)
        }
    }

    /// `(ψ, ψ', ψ'')` at distance `s` from the face where `ψ = 1`.
    fn eval(&self, s: f64, length: f64) -> (f64, f64, f64) {
        let r = length - s;
        match *self {
            Decay::Oscillatory { kappa, denom } => {
                let (sn, cs) = (kappa * r).sin_cos();
                (sn / denom, -kappa * cs / denom, -kappa * kappa * sn / denom)
            }
            Decay::Hyperbolic { kappa } => {
                // sinh(κr)/sinh(κL) = e^{-κs}(1 - e^{-2κr})/(1 - e^{-2κL}), overflow-free.
                let den = -(-2.0 * kappa * length).exp_m1();
                let e = (-kappa * s).exp();
                let sh = e * -(-2.0 * kappa * r).exp_m1() / den;
                let ch = e * (1.0 + (-2.0 * kappa * r).exp()) / den;
                (sh, -kappa * ch, kappa * kappa * sh)
            }
            Decay::Linear => (r / length, -1.0 / length, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LiftTerm {
    axis: usize,
    side: Side,
    tangential: Vec<usize>,
    amplitude: f64,
    decay: Decay,
}

/// Pointwise form of `Df₀`, the solution of `(I + cΔ)u = 0` with trace `f₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletLift {
    c: f64,
    lengths: Vec<f64>,
    terms: Vec<LiftTerm>,
}

impl DirichletLift {
    pub fn new(c: f64, basis: &BasisDescriptor, datum: &DirichletDatum) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid!("c must be positive and finite, got {c}"));
        }
        datum.validate(basis)?;
        let lengths = basis.lengths().to_vec();
        let mut terms = Vec::new();
        for (axis, side, tangential, amplitude) in datum.terms() {
            let tangential_sq: f64 = others(axis, lengths.len())
                .zip(&tangential)
                .map(|(j, &m)| axis_lambda_sq(m, lengths[j]))
                .sum();
            let decay = Decay::new(1.0 / c - tangential_sq, lengths[axis]).map_err(|_| {
                let (nearest, distance) = nearest_lift_singularity(c, lengths[axis], tangential_sq);
                Error::ExceptionalParameter { value: c, nearest, distance }
            })?;
            if amplitude == 0.0 {
                continue;
            }
            terms.push(LiftTerm { axis, side, tangential, amplitude, decay });
        }
        Ok(Self { c, lengths, terms })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `(u, Δu)` at a point.
    pub fn value_and_laplacian(&self, point: &[f64]) -> (f64, f64) {
        let mut u = 0.0;
        let mut lap = 0.0;
        for term in &self.terms {
            let l = self.lengths[term.axis];
            let s = match term.side {
                Side::Low => point[term.axis],
                Side::High => l - point[term.axis],
            };
            let (psi, _, psi2) = term.decay.eval(s, l);
            let mut tang = term.amplitude;
            let mut tang_sq = 0.0;
            for (j, &m) in others(term.axis, self.lengths.len()).zip(&term.tangential) {
                tang *= sine_mode(m, self.lengths[j], point[j]);
                tang_sq += axis_lambda_sq(m, self.lengths[j]);
            }
            u += tang * psi;
            lap += tang * (psi2 - tang_sq * psi);
        }
        (u, lap)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.value_and_laplacian(point).0
    }

    /// `(u, u', u'')` on an interval.
    pub fn eval_interval(&self, x: f64) -> (f64, f64, f64) {
        let l = self.lengths[0];
        self.terms.iter().fold((0.0, 0.0, 0.0), |acc, term| {
            let (s, sign) = match term.side {
                Side::Low => (x, 1.0),
                Side::High => (l - x, -1.0),
            };
            let (p0, p1, p2) = term.decay.eval(s, l);
            (acc.0 + term.amplitude * p0, acc.1 + sign * term.amplitude * p1, acc.2 + term.amplitude * p2)
        })
    }
}

fn others(axis: usize, d: usize) -> impl Iterator<Item = usize> {
    (0..d).filter(move |&j| j != axis)
}

/// Closest `c` at which `sin(κL)` vanishes for the given tangential `λ²`.
fn nearest_lift_singularity(c: f64, length: f64, tangential_sq: f64) -> (f64, f64) {
    let kappa_sq = 1.0 / c - tangential_sq;
    let k = ((kappa_sq.max(0.0).sqrt() * length / PI).round()).max(1.0);
    let nearest = 1.0 / (axis_lambda_sq(k as usize, length) + tangential_sq);
    (nearest, (c - nearest).abs())
}

/// Modal coefficients `⟨Df₀, φ_n⟩`, from Green's identity:
/// `d_n = -∮ f₀ ∂_ν φ_n / (λ_n² - 1/c)`.
pub fn lift_coefficients(c: f64, basis: &BasisDescriptor, datum: &DirichletDatum) -> Result<Field> {
    datum.validate(basis)?;
    let lengths = basis.lengths();
    let terms = datum.terms();
    let modes = box_modes(basis);
    let coefficients = modes
        .iter()
        .map(|m| {
            let mut acc = 0.0;
            for (axis, side, tangential, amplitude) in &terms {
                let matches = others(*axis, lengths.len()).zip(tangential).all(|(j, &t)| m.multi_index[j] == t);
                if !matches || *amplitude == 0.0 {
                    continue;
                }
                let n = m.multi_index[*axis];
                let l = lengths[*axis];
                let slope = (2.0 / l).sqrt() * n as f64 * PI / l;
                let sign = match side {
                    Side::Low => 1.0,
                    Side::High if n % 2 == 0 => -1.0,
                    Side::High => 1.0,
                };
                acc += sign * slope * amplitude;
            }
            acc / (m.lambda_sq - 1.0 / c)
        })
        .collect();
    Field::new(basis.clone(), coefficients)
}

/// `Dg` on `(0, L)`: `u(x) = [g0 sin((L-x)/√c) + g1 sin(x/√c)] / sin(L/√c)`,
/// with its first `truncation` sine coefficients.
pub fn dirichlet_map_interval(
    c: f64,
    length: f64,
    truncation: usize,
    g: &DirichletDatum,
) -> Result<(DirichletLift, Field)> {
    let basis = BasisDescriptor::interval(length, truncation)?;
    dirichlet_map(c, &basis, g)
}

pub fn dirichlet_map(c: f64, basis: &BasisDescriptor, g: &DirichletDatum) -> Result<(DirichletLift, Field)> {
    let lift = DirichletLift::new(c, basis, g)?;
    let field = lift_coefficients(c, basis, g)?;
    Ok((lift, field))
}

/// Scalar time factor of a boundary signal, with two derivatives.
pub trait TimeProfile: Sync {
    fn value(&self, t: f64) -> f64;
    fn first_derivative(&self, t: f64) -> f64;
    fn second_derivative(&self, t: f64) -> f64;
}

impl<T: TimeProfile + ?Sized> TimeProfile for &T {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn first_derivative(&self, t: f64) -> f64 {
        (**self).first_derivative(t)
    }
    fn second_derivative(&self, t: f64) -> f64 {
        (**self).second_derivative(t)
    }
}

impl<T: TimeProfile + ?Sized> TimeProfile for alloc::boxed::Box<T> {
    fn value(&self, t: f64) -> f64 {
        (**self).value(t)
    }
    fn first_derivative(&self, t: f64) -> f64 {
        (**self).first_derivative(t)
    }
    fn second_derivative(&self, t: f64) -> f64 {
        (**self).second_derivative(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Zero;

impl TimeProfile for Zero {
    fn value(&self, _: f64) -> f64 {
        0.0
    }
    fn first_derivative(&self, _: f64) -> f64 {
        0.0
    }
    fn second_derivative(&self, _: f64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl TimeProfile for Constant {
    fn value(&self, _: f64) -> f64 {
        self.0
    }
    fn first_derivative(&self, _: f64) -> f64 {
        0.0
    }
    fn second_derivative(&self, _: f64) -> f64 {
        0.0
    }
}

/// `Σ coefficients[i]·tⁱ`
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl TimeProfile for Polynomial {
    fn value(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
    fn first_derivative(&self, t: f64) -> f64 {
        self.0.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &c)| acc * t + i as f64 * c)
    }
    fn second_derivative(&self, t: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * t + (i * (i - 1)) as f64 * c)
    }
}

/// `sin(ωt + φ)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sine {
    pub omega: f64,
    pub phase: f64,
}

impl TimeProfile for Sine {
    fn value(&self, t: f64) -> f64 {
        (self.omega * t + self.phase).sin()
    }
    fn first_derivative(&self, t: f64) -> f64 {
        self.omega * (self.omega * t + self.phase).cos()
    }
    fn second_derivative(&self, t: f64) -> f64 {
        -self.omega * self.omega * self.value(t)
    }
}

/// `(1/n) e^{-n(T - t)}`, whose derivative at `T` is 1 for every `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialBurst {
    pub rate: f64,
    pub horizon: f64,
}

impl TimeProfile for ExponentialBurst {
    fn value(&self, t: f64) -> f64 {
        self.first_derivative(t) / self.rate
    }
    fn first_derivative(&self, t: f64) -> f64 {
        (-self.rate * (self.horizon - t)).exp()
    }
    fn second_derivative(&self, t: f64) -> f64 {
        self.rate * self.first_derivative(t)
    }
}

/// `(1 + tanh((t - center)/width)) / 2`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    pub center: f64,
    pub width: f64,
}

impl TimeProfile for SmoothStep {
    fn value(&self, t: f64) -> f64 {
        0.5 * (1.0 + ((t - self.center) / self.width).tanh())
    }
    fn first_derivative(&self, t: f64) -> f64 {
        let th = ((t - self.center) / self.width).tanh();
        0.5 * (1.0 - th * th) / self.width
    }
    fn second_derivative(&self, t: f64) -> f64 {
        let th = ((t - self.center) / self.width).tanh();
        -(1.0 - th * th) * th / (self.width * self.width)
    }
}

/// A profile given by three closures.
#[derive(Clone, Copy)]
pub struct FnProfile<F, G, H> {
    pub value: F,
    pub first: G,
    pub second: H,
}

impl<F, G, H> core::fmt::Debug for FnProfile<F, G, H> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("FnProfile")
    }
}

impl<F, G, H> TimeProfile for FnProfile<F, G, H>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
    H: Fn(f64) -> f64 + Sync,
{
    fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }
    fn first_derivative(&self, t: f64) -> f64 {
        (self.first)(t)
    }
    fn second_derivative(&self, t: f64) -> f64 {
        (self.second)(t)
    }
}

/// Boundary values `f(t)·f₀` on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySignal<P> {
    pub profile: DirichletDatum,
    pub time: P,
    pub horizon: f64,
}

impl<P: TimeProfile> BoundarySignal<P> {
    pub fn new(profile: DirichletDatum, time: P, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(invalid!("signal horizon must be positive, got {horizon}"));
        }
        for i in 0..=8 {
            let t = horizon * i as f64 / 8.0;
            let v = [time.value(t), time.first_derivative(t), time.second_derivative(t)];
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid!("time profile is not finite at t = {t}"));
            }
        }
        Ok(Self { profile, time, horizon })
    }
}

impl BoundarySignal<Zero> {
    pub fn new_zero(horizon: f64) -> Self {
        Self { profile: DirichletDatum::Interval { g0: 0.0, g1: 0.0 }, time: Zero, horizon }
    }
}

/// One mode of the first-order system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupBlock {
    pub mode_index: usize,
    pub lambda_sq: f64,
    pub h: f64,
    pub k: f64,
    pub d: f64,
    pub beta: f64,
}

type Mat2 = [[f64; 2]; 2];

fn mat_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

impl SemigroupBlock {
    pub fn matrix(&self) -> Mat2 {
        [[0.0, 1.0], [self.k, -self.h]]
    }

    /// Roots of `μ² + hμ - k`.
    pub fn eigenvalues(&self) -> CharacteristicRoots {
        let half = -0.5 * self.h;
        let q = half * half + self.k;
        let scale = half * half + self.k.abs();
        if q.abs() <= 1e-14 * scale {
            CharacteristicRoots::Double(half)
        } else if q > 0.0 {
            let w = q.sqrt();
            // The larger-magnitude root first, the other from the product -k.
            let big = if half >= 0.0 { half + w } else { half - w };
            let small = if big == 0.0 { 0.0 } else { -self.k / big };
            let (plus, minus) = if big > small { (big, small) } else { (small, big) };
            CharacteristicRoots::RealDistinct { plus, minus }
        } else {
            CharacteristicRoots::Complex { re: half, im: (-q).sqrt() }
        }
    }

    /// `e^{𝔸t}` from the closed form of each eigen-regime.
    pub fn exponential(&self, t: f64) -> Mat2 {
        let half = -0.5 * self.h;
        let q = half * half + self.k;
        let scale = half * half + self.k.abs();
        // e^{𝔸t} = c0·I + c1·(𝔸 - half·I)
        let (c0, c1) = if q.abs() <= 1e-14 * scale {
            let e = (half * t).exp();
            (e, e * t)
        } else if q > 0.0 {
            let w = q.sqrt();
            let wt = (w * t).abs();
            let grow = (half * t + w * t.abs()).exp();
            let tail = (-2.0 * wt).exp_m1();
            // cosh and sinh/ω scaled by e^{half·t}, cancellation-free for small ωt.
            (grow * (1.0 + 0.5 * tail), -grow * tail / (2.0 * w) * t.signum())
        } else {
            let w = (-q).sqrt();
            let e = (half * t).exp();
            let (s, c) = (w * t).sin_cos();
            (e * c, e * s / w)
        };
        [[c0 - half * c1, c1], [c1 * self.k, c0 + (-self.h - half) * c1]]
    }

    fn input(&self) -> [f64; 2] {
        [0.0, self.d]
    }

    fn a_input(&self) -> [f64; 2] {
        [self.d, -self.h * self.d]
    }

    /// `(𝔸² - β)𝔻`
    fn convolution_input(&self) -> [f64; 2] {
        [-self.h * self.d, (self.k + self.h * self.h - self.beta) * self.d]
    }

    /// Right side of `W' = 𝔸W - β𝔻f + 𝔻f''`.
    pub fn rhs(&self, w: [f64; 2], f: f64, f2: f64) -> [f64; 2] {
        [w[1], self.k * w[0] - self.h * w[1] + self.d * (f2 - self.beta * f)]
    }

    /// `W(t)` for this mode.
    pub fn evolve<P: TimeProfile>(&self, w0: [f64; 2], time: &P, t: f64, quad_step: f64) -> [f64; 2] {
        let (f0, fp0) = (time.value(0.0), time.first_derivative(0.0));
        let (ft, fpt) = (time.value(t), time.first_derivative(t));
        let (dd, ad) = (self.input(), self.a_input());
        let start = [w0[0] - dd[0] * fp0 - ad[0] * f0, w0[1] - dd[1] * fp0 - ad[1] * f0];
        let free = mat_vec(&self.exponential(t), start);
        let mut out = [free[0] + dd[0] * fpt + ad[0] * ft, free[1] + dd[1] * fpt + ad[1] * ft];
        if self.d != 0.0 && t > 0.0 {
            let g = self.convolution_input();
            let m = simpson_intervals(t, quad_step);
            let step = t / m as f64;
            let mut acc = [0.0; 2];
            for i in 0..=m {
                let s = i as f64 * step;
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let e = mat_vec(&self.exponential(t - s), g);
                let fs = time.value(s) * w;
                acc[0] += e[0] * fs;
                acc[1] += e[1] * fs;
            }
            out[0] += acc[0] * step / 3.0;
            out[1] += acc[1] * step / 3.0;
        }
        out
    }
}

/// Blocks for every retained mode, with input coefficients from the
/// Dirichlet map of `profile`.
pub fn build_blocks(p: &ParameterSet, basis: &BasisDescriptor, profile: &DirichletDatum) -> Result<Vec<SemigroupBlock>> {
    let r = p.reduced();
    let report = check_wellposed(r.c, basis, 0.0)?;
    if report.verdict == Verdict::Exceptional {
        return Err(Error::ExceptionalParameter {
            value: r.c,
            nearest: report.nearest_exceptional,
            distance: report.distance,
        });
    }
    let d = lift_coefficients(r.c, basis, profile)?;
    Ok(box_modes(basis)
        .iter()
        .zip(d.coefficients())
        .map(|(m, &d)| {
            let leading = 1.0 - r.c * m.lambda_sq;
            SemigroupBlock {
                mode_index: m.index,
                lambda_sq: m.lambda_sq,
                h: r.a / leading,
                k: -r.b * m.lambda_sq / leading,
                d,
                beta: r.b / r.c,
            }
        })
        .collect())
}

fn check_blocks(blocks: &[SemigroupBlock], theta0: &Field, theta1: &Field) -> Result<()> {
    if theta0.basis() != theta1.basis() {
        return Err(invalid!("initial fields live on different bases"));
    }
    if blocks.len() != theta0.coefficients().len() {
        return Err(invalid!("{} blocks for {} modes", blocks.len(), theta0.coefficients().len()));
    }
    Ok(())
}

/// `(θ(t), θ'(t))` under boundary input.
pub fn evolve_with_boundary<P: TimeProfile>(
    blocks: &[SemigroupBlock],
    theta0: &Field,
    theta1: &Field,
    signal: &BoundarySignal<P>,
    t: f64,
    quad_step: f64,
) -> Result<(Field, Field)> {
    check_blocks(blocks, theta0, theta1)?;
    if !(0.0..=signal.horizon).contains(&t) {
        return Err(invalid!("t = {t} outside [0, {}]", signal.horizon));
    }
    if !(quad_step > 0.0) {
        return Err(invalid!("quadrature step must be positive"));
    }
    let states = par::map_indexed(blocks.len(), |j| {
        let w0 = [theta0.coefficients()[j], theta1.coefficients()[j]];
        blocks[j].evolve(w0, &signal.time, t, quad_step)
    });
    let basis = theta0.basis().clone();
    let (values, derivatives): (Vec<f64>, Vec<f64>) = states.into_iter().map(|w| (w[0], w[1])).unzip();
    Ok((Field::new(basis.clone(), values)?, Field::new(basis, derivatives)?))
}

/// Worst residuals of the classical-solution clauses over a time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MildSolutionReport {
    /// Second difference of `θ` (five-point on uniform grids) against `θ''`
    /// from the first-order system, relative to `max(1, |θ''|)`.
    pub second_difference_residual: f64,
    pub second_difference_worst_mode: usize,
    /// Residual of `(1 - cλ²)(y'' - βy) = -βθ - aθ'` for `y = θ - d·f`,
    /// relative to the size of its terms.
    pub lifted_relation_residual: f64,
    pub lifted_relation_worst_mode: usize,
}

impl MildSolutionReport {
    pub fn passes(&self, second_difference_tol: f64, lifted_relation_tol: f64) -> bool {
        self.second_difference_residual <= second_difference_tol && self.lifted_relation_residual <= lifted_relation_tol
    }
}

/// Checks the per-mode trajectories on an increasing `t_grid` against the
/// classical-solution clauses. Interior grid points only; on uniform grids the
/// two points at each end are skipped for the five-point stencil.
pub fn mild_solution_check<P: TimeProfile>(
    blocks: &[SemigroupBlock],
    theta0: &Field,
    theta1: &Field,
    signal: &BoundarySignal<P>,
    t_grid: &[f64],
    quad_step: f64,
) -> Result<MildSolutionReport> {
    check_blocks(blocks, theta0, theta1)?;
    if t_grid.len() < 3 || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid!("time grid needs at least three increasing points"));
    }
    if t_grid[0] < 0.0 || t_grid[t_grid.len() - 1] > signal.horizon {
        return Err(invalid!("time grid leaves [0, {}]", signal.horizon));
    }
    let f = &signal.time;
    let per_mode = par::map_indexed(blocks.len(), |j| {
        let b = &blocks[j];
        let w0 = [theta0.coefficients()[j], theta1.coefficients()[j]];
        let states: Vec<[f64; 2]> = t_grid.iter().map(|&t| b.evolve(w0, f, t, quad_step)).collect();
        let mut worst_fd: f64 = 0.0;
        let mut worst_rel: f64 = 0.0;
        let n = t_grid.len();
        let uniform = t_grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - (t_grid[1] - t_grid[0])).abs() <= 1e-9 * (t_grid[1] - t_grid[0]));
        let range = if uniform && n >= 5 { 2..n - 2 } else { 1..n - 1 };
        for i in range {
            let (tm, t, tp) = (t_grid[i - 1], t_grid[i], t_grid[i + 1]);
            let (hm, hp) = (t - tm, tp - t);
            let second = if uniform && n >= 5 {
                let th: [f64; 5] = core::array::from_fn(|j| states[i + j - 2][0]);
                (-th[0] + 16.0 * th[1] - 30.0 * th[2] + 16.0 * th[3] - th[4]) / (12.0 * hm * hm)
            } else {
                2.0 * (hm * states[i + 1][0] - (hm + hp) * states[i][0] + hp * states[i - 1][0]) / (hm * hp * (hm + hp))
            };
            let w = states[i];
            let formula = b.rhs(w, f.value(t), f.second_derivative(t))[1];
            worst_fd = worst_fd.max((second - formula).abs() / formula.abs().max(1.0));

            // θ'' from a Richardson-extrapolated central difference of θ'.
            let eps = 0.5 * hm.min(hp);
            let central = |e: f64| (b.evolve(w0, f, t + e, quad_step)[1] - b.evolve(w0, f, t - e, quad_step)[1]) / (2.0 * e);
            let theta2 = (4.0 * central(eps / 2.0) - central(eps)) / 3.0;
            let y = w[0] - b.d * f.value(t);
            let y2 = theta2 - b.d * f.second_derivative(t);
            let one_minus = block_leading(b);
            let a = b.h * one_minus;
            let lhs = one_minus * (y2 - b.beta * y);
            let rhs = -b.beta * w[0] - a * w[1];
            let size = (one_minus * y2).abs() + (one_minus * b.beta * y).abs() + (b.beta * w[0]).abs() + (a * w[1]).abs();
            if size > 0.0 {
                worst_rel = worst_rel.max((lhs - rhs).abs() / size);
            }
        }
        (worst_fd, worst_rel)
    });
    let mut report = MildSolutionReport {
        second_difference_residual: 0.0,
        second_difference_worst_mode: 0,
        lifted_relation_residual: 0.0,
        lifted_relation_worst_mode: 0,
    };
    for (b, (fd, rel)) in blocks.iter().zip(per_mode) {
        if fd >= report.second_difference_residual {
            report.second_difference_residual = fd;
            report.second_difference_worst_mode = b.mode_index;
        }
        if rel >= report.lifted_relation_residual {
            report.lifted_relation_residual = rel;
            report.lifted_relation_worst_mode = b.mode_index;
        }
    }
    Ok(report)
}

/// `1 - cλ²` recovered from the block: `k - β = -β/(1 - cλ²)`.
fn block_leading(b: &SemigroupBlock) -> f64 {
    -b.beta / (b.k - b.beta)
}
