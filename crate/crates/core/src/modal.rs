//! Closed-form solutions of the single-mode equation
//!
//! ```text
//! (1 - cλ²) θ'' + a θ' + bλ² θ = 0,   θ(0) = α,  θ'(0) = β
//! ```
//!
//! in every root regime, the degenerate first-order case `c = 1/λ²` with its
//! compatibility condition `β/α = -(b/a)λ²`, and the reference heat and
//! classical Cattaneo mode solvers.


#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;
use crate::error::{invalid, Error, Result};
use crate::SATURATION_LOG;

/// Relative gate on `|1 - cλ²|` below which a mode is treated as degenerate.
pub const DEFAULT_DEGENERATE_TOLERANCE: f64 = 1e-12;

/// Relative tolerance of the compatibility test `β/α = -(b/a)λ²`.
pub const COMPATIBILITY_TOLERANCE: f64 = 1e-9;

/// How the physical constants `(χ, σ, γρ)` enter the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientMap {
    /// `θ'' = -aθ' + bΔθ - cΔθ''` with `a = χ/σ`, `b = χ²/(σγρ)`, `c = σ/(γρ)`.
    Reduced,
    /// `σθ'' + aθ' = bΔθ - σ²cΔθ''` with `a = χ`, `b = χ²/(γρ)`, `c = 1/(γρ)`.
    SigmaExplicit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParameters {
    pub chi: f64,
    pub sigma: f64,
    pub gamma_rho: f64,
    pub map: CoefficientMap,
}

/// Coefficients of the fourth-order equation, optionally tied to the physical
/// triple they were derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub physical: Option<PhysicalParameters>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid!("{name} must be positive and finite, got {v}"))
    }
}

impl ParameterSet {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        check_positive("c", c)?;
        Ok(Self { a, b, c, physical: None })
    }

    /// Coefficients of the reduced form from the physical constants.
    pub fn from_physical(chi: f64, sigma: f64, gamma_rho: f64) -> Result<Self> {
        check_positive("χ", chi)?;
        check_positive("σ", sigma)?;
        check_positive("γρ", gamma_rho)?;
        Ok(Self {
            a: chi / sigma,
            b: chi * chi / (sigma * gamma_rho),
            c: sigma / gamma_rho,
            physical: Some(PhysicalParameters { chi, sigma, gamma_rho, map: CoefficientMap::Reduced }),
        })
    }

    /// The σ-explicit form, where σ multiplies `θ''` and `σ²c` multiplies `Δθ''`.
    pub fn sigma_explicit(chi: f64, sigma: f64, gamma_rho: f64) -> Result<Self> {
        check_positive("χ", chi)?;
        check_positive("σ", sigma)?;
        check_positive("γρ", gamma_rho)?;
        Ok(Self {
            a: chi,
            b: chi * chi / gamma_rho,
            c: 1.0 / gamma_rho,
            physical: Some(PhysicalParameters {
                chi,
                sigma,
                gamma_rho,
                map: CoefficientMap::SigmaExplicit,
            }),
        })
    }

    /// The same physical system with another value of σ.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        match self.physical {
            Some(PhysicalParameters { chi, gamma_rho, map: CoefficientMap::Reduced, .. }) => {
                Self::from_physical(chi, sigma, gamma_rho)
            }
            Some(PhysicalParameters { chi, gamma_rho, map: CoefficientMap::SigmaExplicit, .. }) => {
                Self::sigma_explicit(chi, sigma, gamma_rho)
            }
            None => Err(invalid!("parameter set carries no physical constants")),
        }
    }

    fn sigma_explicit_sigma(&self) -> Option<f64> {
        match self.physical {
            Some(PhysicalParameters { sigma, map: CoefficientMap::SigmaExplicit, .. }) => Some(sigma),
            _ => None,
        }
    }

    /// Equivalent coefficients of `θ'' = -aθ' + bΔθ - cΔθ''` (the σ-explicit
    /// form divided through by σ).
    pub fn reduced(&self) -> ParameterSet {
        match self.sigma_explicit_sigma() {
            Some(s) => ParameterSet {
                a: self.a / s,
                b: self.b / s,
                c: s * self.c,
                physical: self.physical,
            },
            None => *self,
        }
    }

    /// The coefficient whose exceptional set governs well-posedness.
    pub fn effective_c(&self) -> f64 {
        self.reduced().c
    }

    /// Coefficients of the mode equation for eigenvalue `λ²`, in the form the
    /// parameter set was given in.
    pub fn mode_ode(&self, lambda_sq: f64) -> ModeOde {
        match self.sigma_explicit_sigma() {
            Some(s) => ModeOde {
                leading: s - s * s * self.c * lambda_sq,
                damping: self.a,
                stiffness: self.b * lambda_sq,
            },
            None => ModeOde {
                leading: 1.0 - self.c * lambda_sq,
                damping: self.a,
                stiffness: self.b * lambda_sq,
            },
        }
    }

    /// Magnitude of the terms cancelling in the leading coefficient.
    fn leading_scale(&self, lambda_sq: f64) -> f64 {
        match self.sigma_explicit_sigma() {
            Some(s) => s * (s * self.c * lambda_sq).max(1.0),
            None => (self.c * lambda_sq).max(1.0),
        }
    }

    /// Whether the mode with eigenvalue `λ²` is degenerate under the relative
    /// gate `tol`.
    pub fn is_degenerate(&self, lambda_sq: f64, tol: f64) -> bool {
        self.mode_ode(lambda_sq).leading.abs() <= tol * self.leading_scale(lambda_sq)
    }
}

/// `leading·θ'' + damping·θ' + stiffness·θ = 0`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOde {
    pub leading: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl ModeOde {
    pub fn discriminant(&self) -> f64 {
        self.damping * self.damping - 4.0 * self.leading * self.stiffness
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalInitialData {
    pub alpha: f64,
    pub beta: f64,
}

impl ModalInitialData {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }
}

/// Closed form of one mode's trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModalSolution {
    /// `A e^{r₊t} + B e^{r₋t}` with `r± = (-a ± δ) / (2(1 - cλ²))`.
    RealDistinct { a: f64, b: f64, r_plus: f64, r_minus: f64 },
    /// `amplitude · e^{decay·t} · cos(frequency·t + phase)`
    ComplexPair { amplitude: f64, decay: f64, frequency: f64, phase: f64 },
    /// `(A + B t) e^{rt}`
    DoubleRoot { a: f64, b: f64, r: f64 },
    /// `α e^{rate·t}`, the degenerate mode.
    FirstOrder { alpha: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta {
    Real(f64),
    /// Magnitude of the imaginary square root.
    Imaginary(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discriminant {
    pub delta_sq: f64,
    pub delta: Delta,
}

/// `δ² = a² - 4bλ²(1 - cλ²)` and its principal square root.
pub fn discriminant_delta(p: &ParameterSet, lambda_sq: f64) -> Discriminant {
    let delta_sq = p.mode_ode(lambda_sq).discriminant();
    let delta = if delta_sq >= 0.0 {
        Delta::Real(delta_sq.sqrt())
    } else {
        Delta::Imaginary((-delta_sq).sqrt())
    };
    Discriminant { delta_sq, delta }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CharacteristicRoots {
    RealDistinct { plus: f64, minus: f64 },
    Double(f64),
    Complex { re: f64, im: f64 },
}

/// Relative size of `δ²` under which the roots are treated as coincident.
const DOUBLE_ROOT_TOLERANCE: f64 = 1e-14;

/// Roots of `leading·r² + damping·r + stiffness = 0`, with `r₊` computed as
/// `-2·stiffness / (damping + δ)` to avoid cancellation.
pub fn ode_roots(ode: &ModeOde) -> CharacteristicRoots {
    let delta_sq = ode.discriminant();
    let scale = ode.damping * ode.damping + (4.0 * ode.leading * ode.stiffness).abs();
    if delta_sq.abs() <= DOUBLE_ROOT_TOLERANCE * scale {
        return CharacteristicRoots::Double(-ode.damping / (2.0 * ode.leading));
    }
    if delta_sq < 0.0 {
        return CharacteristicRoots::Complex {
            re: -ode.damping / (2.0 * ode.leading),
            im: (-delta_sq).sqrt() / (2.0 * ode.leading.abs()),
        };
    }
    let delta = delta_sq.sqrt();
    let (plus, minus) = if ode.damping >= 0.0 {
        let q = ode.damping + delta;
        (-2.0 * ode.stiffness / q, -q / (2.0 * ode.leading))
    } else {
        let q = ode.damping - delta;
        (-q / (2.0 * ode.leading), -2.0 * ode.stiffness / q)
    };
    CharacteristicRoots::RealDistinct { plus, minus }
}

pub fn characteristic_roots(
    p: &ParameterSet,
    lambda_sq: f64,
    tol_degenerate: f64,
) -> Result<CharacteristicRoots> {
    let ode = p.mode_ode(lambda_sq);
    if p.is_degenerate(lambda_sq, tol_degenerate) {
        return Err(Error::DegenerateMode { leading: ode.leading });
    }
    Ok(ode_roots(&ode))
}

/// Outcome of checking `β/α` against the first-order decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityReport {
    pub required_ratio: f64,
    /// `None` when `α = 0`.
    pub actual_ratio: Option<f64>,
    pub satisfied: bool,
    pub tolerance_used: f64,
}

pub fn compatibility(required_ratio: f64, init: ModalInitialData, tol: f64) -> CompatibilityReport {
    if init.alpha == 0.0 {
        return CompatibilityReport {
            required_ratio,
            actual_ratio: None,
            satisfied: init.beta == 0.0,
            tolerance_used: tol,
        };
    }
    let actual = init.beta / init.alpha;
    CompatibilityReport {
        required_ratio,
        actual_ratio: Some(actual),
        satisfied: (actual - required_ratio).abs() <= tol * required_ratio.abs().max(1.0),
        tolerance_used: tol,
    }
}

/// Second-order closed form for a non-degenerate mode equation.
pub fn solve_ode(ode: &ModeOde, init: ModalInitialData) -> ModalSolution {
    let ModalInitialData { alpha, beta } = init;
    match ode_roots(ode) {
        CharacteristicRoots::RealDistinct { plus, minus } => {
            // r₊ - r₋ = δ / leading, formed without subtraction.
            let gap = ode.discriminant().sqrt() / ode.leading;
            let a = (beta - alpha * minus) / gap;
            ModalSolution::RealDistinct {
                a,
                b: alpha - a,
                r_plus: plus,
                r_minus: minus,
            }
        }
        CharacteristicRoots::Double(r) => ModalSolution::DoubleRoot { a: alpha, b: beta - r * alpha, r },
        CharacteristicRoots::Complex { re, im } => {
            let q = (beta - re * alpha) / im;
            ModalSolution::ComplexPair {
                amplitude: alpha.hypot(q),
                decay: re,
                frequency: im,
                phase: (-q).atan2(alpha),
            }
        }
    }
}

/// Solves one mode, taking the first-order branch when `|1 - cλ²|` is under
/// the relative gate `tol_degenerate`.
pub fn solve_mode(
    p: &ParameterSet,
    lambda_sq: f64,
    init: ModalInitialData,
    tol_degenerate: f64,
) -> Result<ModalSolution> {
    if !(init.alpha.is_finite() && init.beta.is_finite() && lambda_sq.is_finite()) {
        return Err(invalid!("mode data must be finite"));
    }
    let ode = p.mode_ode(lambda_sq);
    if p.is_degenerate(lambda_sq, tol_degenerate) {
        let rate = -ode.stiffness / ode.damping;
        let report = compatibility(rate, init, COMPATIBILITY_TOLERANCE);
        if !report.satisfied {
            return Err(Error::UnsolvableMode { mode: None, report });
        }
        return Ok(ModalSolution::FirstOrder { alpha: init.alpha, rate });
    }
    Ok(solve_ode(&ode, init))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// `aθ' = bΔθ`
    Heat,
    /// `τθ'' = -aθ' + bΔθ`
    ClassicalCattaneo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSolution {
    pub solution: ModalSolution,
    /// For the heat equation: whether `β` agrees with `-(b/a)λ²α`. The heat
    /// solution ignores `β` either way.
    pub heat_compatibility: Option<CompatibilityReport>,
}

pub fn solve_mode_reference(
    kind: ReferenceKind,
    a: f64,
    b: f64,
    tau: f64,
    lambda_sq: f64,
    init: ModalInitialData,
) -> Result<ReferenceSolution> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(invalid!("τ must be nonnegative, got {tau}"));
    }
    match kind {
        ReferenceKind::Heat => {
            let rate = -b * lambda_sq / a;
            Ok(ReferenceSolution {
                solution: ModalSolution::FirstOrder { alpha: init.alpha, rate },
                heat_compatibility: Some(compatibility(rate, init, COMPATIBILITY_TOLERANCE)),
            })
        }
        ReferenceKind::ClassicalCattaneo => {
            if tau == 0.0 {
                return Err(invalid!("the classical equation needs τ > 0"));
            }
            let ode = ModeOde { leading: tau, damping: a, stiffness: b * lambda_sq };
            Ok(ReferenceSolution { solution: solve_ode(&ode, init), heat_compatibility: None })
        }
    }
}

/// Value and time derivative of a mode at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeValue {
    pub value: f64,
    pub derivative: f64,
    /// `ln|value|`, finite even when `value` saturates.
    pub log_abs: f64,
    /// Set when `|value|` or `|derivative|` exceeds `e^700`; the saturated
    /// entries are reported as signed infinities.
    pub saturated: bool,
}

/// Signed quantity held as `sign · e^{log}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScalar {
    pub sign: f64,
    pub log: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar { sign: 0.0, log: f64::NEG_INFINITY };

    pub fn from_coefficient(coef: f64, exponent: f64) -> Self {
        if coef == 0.0 {
            return Self::ZERO;
        }
        Self { sign: coef.signum(), log: coef.abs().ln() + exponent }
    }

    pub fn is_saturated(&self) -> bool {
        self.sign != 0.0 && self.log > SATURATION_LOG
    }

    /// The plain value, or a signed infinity past the saturation threshold.
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else if self.is_saturated() {
            self.sign * f64::INFINITY
        } else {
            self.sign * self.log.exp()
        }
    }
}

/// Sum in log form, without forming either exponential.
impl core::ops::Add for LogScalar {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        if self.sign == 0.0 {
            return other;
        }
        if other.sign == 0.0 {
            return self;
        }
        let (big, small) = if self.log >= other.log { (self, other) } else { (other, self) };
        let ratio = (small.log - big.log).exp() * big.sign * small.sign;
        let factor = 1.0 + ratio;
        if factor == 0.0 {
            return Self::ZERO;
        }
        Self { sign: big.sign * factor.signum(), log: big.log + factor.abs().ln() }
    }
}

impl ModalSolution {
    /// Value and derivative as log-scaled quantities.
    pub fn eval_log(&self, t: f64) -> (LogScalar, LogScalar) {
        use LogScalar as L;
        match *self {
            ModalSolution::RealDistinct { a, b, r_plus, r_minus } => (
                L::from_coefficient(a, r_plus * t) + L::from_coefficient(b, r_minus * t),
                L::from_coefficient(a * r_plus, r_plus * t) + L::from_coefficient(b * r_minus, r_minus * t),
            ),
            ModalSolution::ComplexPair { amplitude, decay, frequency, phase } => {
                let (s, c) = (frequency * t + phase).sin_cos();
                (
                    L::from_coefficient(amplitude * c, decay * t),
                    L::from_coefficient(amplitude * (decay * c - frequency * s), decay * t),
                )
            }
            ModalSolution::DoubleRoot { a, b, r } => {
                let poly = a + b * t;
                (L::from_coefficient(poly, r * t), L::from_coefficient(b + r * poly, r * t))
            }
            ModalSolution::FirstOrder { alpha, rate } => (
                L::from_coefficient(alpha, rate * t),
                L::from_coefficient(alpha * rate, rate * t),
            ),
        }
    }

    pub fn eval(&self, t: f64) -> ModeValue {
        let (v, d) = self.eval_log(t);
        ModeValue {
            value: v.value(),
            derivative: d.value(),
            log_abs: v.log,
            saturated: v.is_saturated() || d.is_saturated(),
        }
    }
}

pub fn eval_mode(sol: &ModalSolution, t: f64) -> ModeValue {
    sol.eval(t)
}
