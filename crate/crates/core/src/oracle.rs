//! Brute-force verifiers built on different mathematics from the closed
//! forms: adaptive Runge–Kutta time stepping of mode equations and a
//! Crank–Nicolson finite-difference solver for the 1D equation.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std's inherent methods when std is linked
use num_traits::Float;

use crate::boundary::{BoundarySignal, DirichletDatum, TimeProfile};
use crate::error::{invalid, Error, Result};
use crate::modal::{compatibility, ModalInitialData, ParameterSet, COMPATIBILITY_TOLERANCE};

pub use crate::quadrature::simpson as quad_integrate;

/// `leading·θ'' + damping·θ' + stiffness·θ = 0` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeProblem {
    pub leading: f64,
    pub damping: f64,
    pub stiffness: f64,
    pub init: ModalInitialData,
    pub horizon: f64,
}

/// Accepted steps of an integration, with cubic Hermite dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    slopes: Vec<f64>,
}

impl Trajectory {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_state(&self) -> &[f64] {
        let n = self.times.len() - 1;
        &self.states[n * self.dim..(n + 1) * self.dim]
    }

    /// State at `t`, interpolated between accepted steps.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let d = self.dim;
        let last = self.times.len() - 1;
        let t = t.clamp(self.times[0], self.times[last]);
        let i = self.times.partition_point(|&s| s <= t).clamp(1, last) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (h00, h10) = ((1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s), s * (1.0 - s) * (1.0 - s));
        let (h01, h11) = (s * s * (3.0 - 2.0 * s), s * s * (s - 1.0));
        (0..d)
            .map(|k| {
                let (y0, y1) = (self.states[i * d + k], self.states[(i + 1) * d + k]);
                let (f0, f1) = (self.slopes[i * d + k], self.slopes[(i + 1) * d + k]);
                h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
            })
            .collect()
    }
}

const MAX_STEPS: usize = 10_000_000;

/// Dormand–Prince 5(4) integration of `y' = f(t, y)` from `t0` to `t_end`.
pub fn dopri5<F>(mut f: F, t0: f64, y0: &[f64], t_end: f64, rtol: f64, atol: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    // Fifth-order weights minus the embedded fourth-order weights.
    const E: [f64; 7] = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];

    if !(rtol > 0.0 && atol > 0.0) {
        return Err(invalid!("tolerances must be positive"));
    }
    let d = y0.len();
    let span = t_end - t0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory { dim: d, times: vec![t0], states: y0.to_vec(), slopes: vec![0.0; d] };
    f(t0, y0, &mut traj.slopes[..d]);
    if span == 0.0 {
        return Ok(traj);
    }

    let mut k = vec![vec![0.0; d]; 7];
    k[0].copy_from_slice(&traj.slopes[..d]);
    let mut y = y0.to_vec();
    let mut stage = vec![0.0; d];
    let mut y_new = vec![0.0; d];
    let mut t = t0;
    let mut h = dir * (span.abs() * 1e-3).min(0.01 * span.abs().max(1e-3));

    for _ in 0..MAX_STEPS {
        if (t_end - t) * dir <= 0.0 {
            return Ok(traj);
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        for s in 1..7 {
            for i in 0..d {
                stage[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + C[s] * h, &stage, &mut tail[0]);
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        let mut err = 0.0;
        for i in 0..d {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale) * (e / scale);
        }
        let err = (err / d.max(1) as f64).sqrt();
        if !err.is_finite() {
            h *= 0.2;
        } else if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            // First-same-as-last: the seventh stage is the slope at the new point.
            let fsal = k[6].clone();
            k[0].copy_from_slice(&fsal);
            traj.times.push(t);
            traj.states.extend_from_slice(&y);
            traj.slopes.extend_from_slice(&fsal);
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
        if h.abs() <= 1e-14 * t.abs().max(1e-300) {
            return Err(Error::StepUnderflow { t });
        }
    }
    Err(Error::StepUnderflow { t })
}

/// Trajectory of one mode equation, sampled as `(θ, θ')`.
#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    inner: ModeTrajectoryKind,
}

#[derive(Debug, Clone)]
enum ModeTrajectoryKind {
    SecondOrder(Trajectory),
    /// First-order fallback: `θ' = rate·θ`.
    FirstOrder { trajectory: Trajectory, rate: f64 },
}

impl ModeTrajectory {
    pub fn sample(&self, t: f64) -> (f64, f64) {
        match &self.inner {
            ModeTrajectoryKind::SecondOrder(tr) => {
                let s = tr.sample(t);
                (s[0], s[1])
            }
            ModeTrajectoryKind::FirstOrder { trajectory, rate } => {
                let v = trajectory.sample(t)[0];
                (v, rate * v)
            }
        }
    }

    pub fn steps(&self) -> usize {
        match &self.inner {
            ModeTrajectoryKind::SecondOrder(tr) => tr.steps(),
            ModeTrajectoryKind::FirstOrder { trajectory, .. } => trajectory.steps(),
        }
    }
}

/// Integrates a mode equation as a first-order system. A zero leading
/// coefficient falls back to the first-order equation when the initial data
/// is compatible with it.
pub fn integrate_mode(prob: &OdeProblem, rel_tol: f64, abs_tol: f64) -> Result<ModeTrajectory> {
    if !(rel_tol > 0.0 && rel_tol <= 1e-2 && abs_tol > 0.0 && abs_tol <= 1e-2) {
        return Err(invalid!("tolerances must lie in (0, 1e-2]"));
    }
    if !(prob.horizon > 0.0) {
        return Err(invalid!("horizon must be positive"));
    }
    let OdeProblem { leading, damping, stiffness, init, horizon } = *prob;
    if leading == 0.0 {
        let rate = -stiffness / damping;
        let report = compatibility(rate, init, COMPATIBILITY_TOLERANCE);
        if !report.satisfied {
            return Err(Error::UnsolvableMode { mode: None, report });
        }
        let trajectory = dopri5(|_, y, dy| dy[0] = rate * y[0], 0.0, &[init.alpha], horizon, rel_tol, abs_tol)?;
        return Ok(ModeTrajectory { inner: ModeTrajectoryKind::FirstOrder { trajectory, rate } });
    }
    let tr = dopri5(
        |_, y, dy| {
            dy[0] = y[1];
            dy[1] = -(damping * y[1] + stiffness * y[0]) / leading;
        },
        0.0,
        &[init.alpha, init.beta],
        horizon,
        rel_tol,
        abs_tol,
    )?;
    Ok(ModeTrajectory { inner: ModeTrajectoryKind::SecondOrder(tr) })
}

/// Grid and time step of the finite-difference oracle on `(0, length)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub length: f64,
    /// Grid points including both boundary nodes.
    pub nx: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Keep every `snapshot_every`-th step (the final state is always kept).
    pub snapshot_every: usize,
}

impl FdConfig {
    pub fn spacing(&self) -> f64 {
        self.length / (self.nx - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.nx).map(|i| i as f64 * h).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub nx: usize,
    /// Step actually used (the horizon divided into whole steps).
    pub dt: f64,
    pub times: Vec<f64>,
    /// One row per kept time, full grid including boundary nodes.
    pub snapshots: Vec<Vec<f64>>,
    /// `θ'` at the horizon, full grid.
    pub final_velocity: Vec<f64>,
    pub scheme: &'static str,
}

impl GridSolution {
    pub fn final_state(&self) -> &[f64] {
        self.snapshots.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Tridiagonal LU with partial pivoting (one extra superdiagonal of fill).
#[derive(Debug, Clone)]
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>) -> Result<Self> {
        let n = d.len();
        let scale = d
            .iter()
            .chain(&dl)
            .chain(&du)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if let Some(row) = d.iter().position(|p| p.abs() <= 1e-13 * scale) {
            return Err(Error::DiscreteExceptional { row });
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn interval_traces(datum: &DirichletDatum) -> Result<(f64, f64)> {
    match datum {
        DirichletDatum::Interval { g0, g1 } => Ok((*g0, *g1)),
        _ => Err(invalid!("the finite-difference oracle is one-dimensional")),
    }
}

/// Crank–Nicolson discretization of `(I + cΔ_h)θ'' = -aθ' + bΔ_hθ` with
/// second-order central `Δ_h` and Dirichlet rows pinned to the signal.
///
/// `theta0` and `theta1` are samples on the full grid (boundary entries are
/// ignored).
pub fn fd_solve<P: TimeProfile>(
    p: &ParameterSet,
    config: &FdConfig,
    theta0: &[f64],
    theta1: &[f64],
    signal: &BoundarySignal<P>,
) -> Result<GridSolution> {
    let FdConfig { length, nx, dt, horizon, snapshot_every } = *config;
    if nx < 64 {
        return Err(invalid!("finite-difference grid needs at least 64 points, got {nx}"));
    }
    if !(length > 0.0 && dt > 0.0 && horizon > 0.0 && dt <= horizon) {
        return Err(invalid!("need length > 0 and 0 < dt <= horizon"));
    }
    if theta0.len() != nx || theta1.len() != nx {
        return Err(invalid!("initial samples must have {nx} entries"));
    }
    let (g0, g1) = interval_traces(&signal.profile)?;
    let p = p.reduced();
    let steps = (horizon / dt).ceil() as usize;
    let dt = horizon / steps as f64;
    let h2 = config.spacing().powi(2);
    let m = nx - 2;

    let stiff = (p.c - p.b * dt * dt / 4.0) / h2;
    let diag = 1.0 + p.a * dt / 2.0;
    // The system matrix is Toeplitz with eigenvalues diag - stiff·h²μ_n.
    for n in 1..=m {
        let s = (n as f64 * core::f64::consts::PI / (2.0 * (m + 1) as f64)).sin();
        let mu_h2 = 4.0 * s * s;
        if (diag - stiff * mu_h2).abs() <= 1e-12 * (diag.abs() + (stiff * mu_h2).abs()) {
            return Err(Error::DiscreteExceptional { row: n });
        }
    }
    let lu = TridiagonalLu::factor(
        vec![stiff; m - 1],
        vec![diag - 2.0 * stiff; m],
        vec![stiff; m - 1],
    )?;
    // The step is solved for the velocity increment: its right side is O(dt),
    // which keeps the error of the ill-conditioned solve at the same order.
    let lap = p.b * dt / h2;

    let mut theta: Vec<f64> = theta0[1..nx - 1].to_vec();
    let mut vel: Vec<f64> = theta1[1..nx - 1].to_vec();
    let mut rhs = vec![0.0; m];
    let full = |interior: &[f64], t: f64| {
        let f = signal.time.value(t);
        let mut row = Vec::with_capacity(nx);
        row.push(g0 * f);
        row.extend_from_slice(interior);
        row.push(g1 * f);
        row
    };
    let mut times = vec![0.0];
    let mut snapshots = vec![full(&theta, 0.0)];
    let every = snapshot_every.max(1);

    for step in 0..steps {
        let t0 = step as f64 * dt;
        let t1 = (step + 1) as f64 * dt;
        let f_mid = 0.5 * (signal.time.value(t0) + signal.time.value(t1));
        let df = signal.time.first_derivative(t1) - signal.time.first_derivative(t0);
        for i in 0..m {
            let mid = |j: usize| theta[j] + 0.5 * dt * vel[j];
            let left = if i > 0 { mid(i - 1) } else { 0.0 };
            let right = if i + 1 < m { mid(i + 1) } else { 0.0 };
            rhs[i] = -p.a * dt * vel[i] + lap * (left - 2.0 * mid(i) + right);
        }
        // Boundary contributions: b·dt·Δ_h of the trace, minus c·Δ_h of its
        // velocity increment.
        let edge = |g: f64| g * (p.b * dt * f_mid - p.c * df) / h2;
        rhs[0] += edge(g0);
        rhs[m - 1] += edge(g1);
        lu.solve(&mut rhs);
        for i in 0..m {
            theta[i] += dt * (vel[i] + 0.5 * rhs[i]);
            vel[i] += rhs[i];
        }
        if (step + 1) % every == 0 || step + 1 == steps {
            times.push(t1);
            snapshots.push(full(&theta, t1));
        }
    }
    let final_velocity = {
        let fp = signal.time.first_derivative(horizon);
        let mut row = Vec::with_capacity(nx);
        row.push(g0 * fp);
        row.extend_from_slice(&vel);
        row.push(g1 * fp);
        row
    };
    Ok(GridSolution { nx, dt, times, snapshots, final_velocity, scheme: "crank-nicolson/central-2" })
}

/// Value of `c` at which the Crank–Nicolson system of `fd_solve` is singular
/// on its `n`-th discrete mode.
pub fn fd_singular_c(p: &ParameterSet, length: f64, nx: usize, dt: f64, n: usize) -> f64 {
    let p = p.reduced();
    let h = length / (nx - 1) as f64;
    let s = (n as f64 * core::f64::consts::PI * h / (2.0 * length)).sin();
    let mu = 4.0 * s * s / (h * h);
    p.b * dt * dt / 4.0 + (1.0 + p.a * dt / 2.0) / mu
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundarySignal, Zero};
    use core::f64::consts::PI;

    #[test]
    fn damped_oscillator_matches_closed_form() {
        // r² + r + 1 = 0: θ = (2/√3) e^{-t/2} sin(√3 t / 2) for θ(0) = 0, θ'(0) = 1.
        let prob = OdeProblem {
            leading: 1.0,
            damping: 1.0,
            stiffness: 1.0,
            init: ModalInitialData::new(0.0, 1.0),
            horizon: 3.0,
        };
        let tr = integrate_mode(&prob, 1e-12, 1e-14).unwrap();
        let w = 3f64.sqrt() / 2.0;
        for i in 0..=30 {
            let t = i as f64 * 0.1;
            let exact = (-t / 2.0).exp() * (w * t).sin() / w;
            assert!((tr.sample(t).0 - exact).abs() < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let prob = OdeProblem { leading: 1.0, damping: 2.0, stiffness: 3.0, init: ModalInitialData::new(0.0, 0.0), horizon: 1.0 };
        let tr = integrate_mode(&prob, 1e-10, 1e-12).unwrap();
        assert_eq!(tr.sample(0.5), (0.0, 0.0));
    }

    #[test]
    fn first_order_fallback() {
        let ok = OdeProblem { leading: 0.0, damping: 1.0, stiffness: 4.0, init: ModalInitialData::new(1.0, -4.0), horizon: 1.0 };
        let tr = integrate_mode(&ok, 1e-12, 1e-14).unwrap();
        assert!((tr.sample(0.5).0 - (-2.0f64).exp()).abs() < 1e-10);
        let bad = OdeProblem { init: ModalInitialData::new(1.0, 0.0), ..ok };
        assert!(matches!(integrate_mode(&bad, 1e-12, 1e-14), Err(Error::UnsolvableMode { .. })));
    }

    #[test]
    fn tolerance_bounds_are_enforced() {
        let prob = OdeProblem { leading: 1.0, damping: 1.0, stiffness: 1.0, init: ModalInitialData::new(1.0, 0.0), horizon: 1.0 };
        assert!(integrate_mode(&prob, 0.1, 1e-8).is_err());
        assert!(integrate_mode(&prob, 0.0, 1e-8).is_err());
    }

    #[test]
    fn pivoted_tridiagonal_solves_indefinite_system() {
        // [[1, 2, 0], [3, 1, 4], [0, 5, 1]] x = [5, 17, 13] has x = (1, 2, 3).
        let lu = TridiagonalLu::factor(vec![3.0, 5.0], vec![1.0, 1.0, 1.0], vec![2.0, 4.0]).unwrap();
        let mut b = [5.0, 17.0, 13.0];
        lu.solve(&mut b);
        for (x, e) in b.iter().zip([1.0, 2.0, 3.0]) {
            assert!((x - e).abs() < 1e-14);
        }
        assert!(matches!(
            TridiagonalLu::factor(vec![1.0], vec![1.0, 1.0], vec![1.0]),
            Err(Error::DiscreteExceptional { .. })
        ));
    }

    #[test]
    fn fd_zero_data_stays_zero() {
        let p = ParameterSet::new(1.0, 1.0, 0.3).unwrap();
        let cfg = FdConfig { length: PI, nx: 65, dt: 0.01, horizon: 0.1, snapshot_every: 5 };
        let sol = fd_solve(&p, &cfg, &[0.0; 65], &[0.0; 65], &BoundarySignal::new_zero(0.1)).unwrap();
        assert!(sol.snapshots.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(sol.times.len(), 3);
        let _ = Zero;
    }

    #[test]
    fn fd_singular_values_approach_exceptional_set() {
        let p = ParameterSet::new(1.0, 1.0, 0.3).unwrap();
        for n in 1..=2 {
            let c = fd_singular_c(&p, PI, 2000, 1e-4, n);
            let e = 1.0 / (n * n) as f64;
            assert!(((c - e) / e).abs() < 0.1);
        }
        let c = fd_singular_c(&p, PI, 200, 1e-3, 2);
        let p_sing = ParameterSet::new(1.0, 1.0, c).unwrap();
        let cfg = FdConfig { length: PI, nx: 200, dt: 1e-3, horizon: 0.01, snapshot_every: 1 };
        let zeros = vec![0.0; 200];
        let res = fd_solve(&p_sing, &cfg, &zeros, &zeros, &BoundarySignal::new_zero(0.01));
        assert!(matches!(res, Err(Error::DiscreteExceptional { row: 2 })), "{:?}", res.err());
    }
}
