//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime.
//!
//! Criterion 6 cannot hold for this equation (see the README); it is run as
//! stated and reported as an expected failure. Any other failure makes the
//! process exit nonzero.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use cattaneo_core::boundary::{
    build_blocks, evolve_with_boundary, BoundarySignal, DirichletDatum, DirichletLift, ExponentialBurst, Polynomial,
    SemigroupBlock, Sine, SmoothStep, TimeProfile,
};
use cattaneo_core::experiments::{
    limit1_c_values, limit1_row, limit2_scan, limit3_scan, propagation_burst, singularity_scan, Approach,
};
use cattaneo_core::modal::{
    characteristic_roots, solve_mode, CharacteristicRoots, ModalInitialData, ModalSolution, ParameterSet,
    DEFAULT_DEGENERATE_TOLERANCE,
};
use cattaneo_core::oracle::{dopri5, fd_solve, integrate_mode, FdConfig, OdeProblem};
use cattaneo_core::solver::evolve_homogeneous;
use cattaneo_core::spectrum::sine_mode;
use cattaneo_core::{BasisDescriptor, Error, Field};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    expected_failure: bool,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(x: f64, y: f64, scale: f64) -> f64 {
    (x - y).abs() / scale.max(f64::MIN_POSITIVE)
}

fn oracle_gap(p: &ParameterSet, lambda_sq: f64, init: ModalInitialData, horizon: f64) -> Result<f64, String> {
    let sol = solve_mode(p, lambda_sq, init, DEFAULT_DEGENERATE_TOLERANCE).map_err(|e| e.to_string())?;
    let ode = p.mode_ode(lambda_sq);
    let prob = OdeProblem { leading: ode.leading, damping: ode.damping, stiffness: ode.stiffness, init, horizon };
    let traj = integrate_mode(&prob, 1e-12, 1e-14).map_err(|e| e.to_string())?;
    let samples: Vec<_> = (0..=10).map(|i| horizon * i as f64 / 10.0).map(|t| (sol.eval(t), traj.sample(t))).collect();
    let scale_v = samples.iter().map(|s| s.0.value.abs()).fold(0.0, f64::max);
    let scale_d = samples.iter().map(|s| s.0.derivative.abs()).fold(0.0, f64::max);
    Ok(samples
        .iter()
        .map(|(e, (v, d))| rel(*v, e.value, scale_v).max(rel(*d, e.derivative, scale_d)))
        .fold(0.0, f64::max))
}

fn compatibility_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n: usize = rng.gen_range(1..=32);
        let lambda_sq = (n * n) as f64;
        let (a, b) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
        let p = ParameterSet::new(a, b, 1.0 / lambda_sq).map_err(|e| e.to_string())?;
        let rate = -b * lambda_sq / a;
        let alpha: f64 = rng.gen_range(-3.0..3.0);
        let off = rng.gen_range(0.01..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let bad = ModalInitialData::new(alpha, rate * alpha + off * rate.abs().max(1.0));
        ensure(
            matches!(solve_mode(&p, lambda_sq, bad, DEFAULT_DEGENERATE_TOLERANCE), Err(Error::UnsolvableMode { .. })),
            || format!("incompatible data accepted at n = {n}"),
        )?;
        let good = ModalInitialData::new(alpha, rate * alpha);
        let sol = solve_mode(&p, lambda_sq, good, DEFAULT_DEGENERATE_TOLERANCE).map_err(|e| e.to_string())?;
        ensure(matches!(sol, ModalSolution::FirstOrder { .. }), || "compatible mode is not first order".into())?;
        for i in 1..=10 {
            let t = i as f64 / 10.0;
            let want = alpha * (rate * t).exp();
            if want != 0.0 && want.is_normal() {
                worst = worst.max(rel(sol.eval(t).value, want, want.abs()));
            }
        }
    }
    ensure(worst <= 1e-12, || format!("worst relative error {worst:e}"))?;
    Ok(format!("1000 incompatible pairs refused; compatible worst {worst:.1e}"))
}

fn closed_form_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 3];
    let mut seen = [0usize; 3];
    for i in 0..200 {
        let regime = i % 3;
        let lambda_sq = rng.gen_range(0.5..9.0);
        let c = rng.gen_range(0.0..0.8) / lambda_sq;
        let leading = 1.0 - c * lambda_sq;
        let a: f64 = rng.gen_range(0.3..3.0);
        let critical = a * a / (4.0 * lambda_sq * leading);
        let b = match regime {
            0 => rng.gen_range(0.05..0.8) * critical,
            1 => rng.gen_range(1.5..8.0) * critical,
            _ => critical,
        };
        let p = ParameterSet::new(a, b, c.max(1e-6)).map_err(|e| e.to_string())?;
        let got = characteristic_roots(&p, lambda_sq, DEFAULT_DEGENERATE_TOLERANCE).map_err(|e| e.to_string())?;
        let r = match got {
            CharacteristicRoots::RealDistinct { .. } => 0,
            CharacteristicRoots::Complex { .. } => 1,
            CharacteristicRoots::Double(_) => 2,
        };
        seen[r] += 1;
        let init = ModalInitialData::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        worst[r] = worst[r].max(oracle_gap(&p, lambda_sq, init, 1.0)?);
    }
    ensure(seen.iter().all(|&s| s > 0), || format!("regimes covered {seen:?}"))?;
    let w = worst.iter().copied().fold(0.0, f64::max);
    ensure(w <= 1e-8, || format!("worst {worst:?}"))?;
    Ok(format!("regime counts {seen:?}, worst {w:.1e}"))
}

fn integrate_block<P: TimeProfile>(b: &SemigroupBlock, w0: [f64; 2], time: &P, t: f64) -> Result<[f64; 2], String> {
    let (h, k, d, beta) = (b.h, b.k, b.d, b.beta);
    let traj = dopri5(
        |s, y, dy| {
            dy[0] = y[1];
            dy[1] = k * y[0] - h * y[1] + d * (time.second_derivative(s) - beta * time.value(s));
        },
        0.0,
        &w0,
        t,
        1e-12,
        1e-13,
    )
    .map_err(|e| e.to_string())?;
    let y = traj.final_state();
    Ok([y[0], y[1]])
}

fn boundary_gap<P: TimeProfile + Clone>(time: P) -> Result<f64, String> {
    let p = ParameterSet::new(1.0, 1.0, 0.3).map_err(|e| e.to_string())?;
    let basis = BasisDescriptor::interval(PI, 12).map_err(|e| e.to_string())?;
    let datum = DirichletDatum::Interval { g0: 1.0, g1: -0.5 };
    let blocks = build_blocks(&p, &basis, &datum).map_err(|e| e.to_string())?;
    let th0 = Field::new(basis.clone(), (1..=12).map(|n| 0.3 / n as f64).collect()).map_err(|e| e.to_string())?;
    let th1 = Field::unit(&basis, 2).map_err(|e| e.to_string())?;
    let signal = BoundarySignal::new(datum, time.clone(), 1.0).map_err(|e| e.to_string())?;
    let (u, v) = evolve_with_boundary(&blocks, &th0, &th1, &signal, 1.0, 1e-3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (j, b) in blocks.iter().enumerate() {
        let want = integrate_block(b, [th0.coefficients()[j], th1.coefficients()[j]], &time, 1.0)?;
        let scale = want[0].abs().max(want[1].abs()).max(1.0);
        worst = worst
            .max((u.coefficients()[j] - want[0]).abs().max((v.coefficients()[j] - want[1]).abs()) / scale);
    }
    Ok(worst)
}

fn root_pair(r: CharacteristicRoots) -> [(f64, f64); 2] {
    let mut pair = match r {
        CharacteristicRoots::RealDistinct { plus, minus } => [(plus, 0.0), (minus, 0.0)],
        CharacteristicRoots::Double(r) => [(r, 0.0), (r, 0.0)],
        CharacteristicRoots::Complex { re, im } => [(re, im.abs()), (re, -im.abs())],
    };
    pair.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pair
}

fn semigroup_identity() -> Outcome {
    let p = ParameterSet::new(1.5, 2.0, 0.37).map_err(|e| e.to_string())?;
    let basis = BasisDescriptor::interval(PI, 500).map_err(|e| e.to_string())?;
    let blocks =
        build_blocks(&p, &basis, &DirichletDatum::Interval { g0: 1.0, g1: 0.0 }).map_err(|e| e.to_string())?;
    let mut eig: f64 = 0.0;
    for b in &blocks {
        let roots = characteristic_roots(&p, b.lambda_sq, DEFAULT_DEGENERATE_TOLERANCE).map_err(|e| e.to_string())?;
        for (x, y) in root_pair(b.eigenvalues()).iter().zip(&root_pair(roots)) {
            let scale = x.0.hypot(x.1).max(1.0);
            eig = eig.max((x.0 - y.0).abs() / scale).max((x.1 - y.1).abs() / scale);
        }
    }
    ensure(eig <= 1e-10, || format!("block eigenvalues off by {eig:e}"))?;
    let gaps = [
        boundary_gap(Sine { omega: 1.0, phase: 0.0 })?,
        boundary_gap(Polynomial(vec![0.2, -1.0, 0.5, 0.3]))?,
        boundary_gap(SmoothStep { center: 0.5, width: 0.2 })?,
    ];
    ensure(gaps.iter().all(|&g| g <= 1e-7), || format!("boundary gaps {gaps:?}"))?;
    Ok(format!("eigenvalues {eig:.1e}; boundary gaps {:.1e}, {:.1e}, {:.1e}", gaps[0], gaps[1], gaps[2]))
}

fn dirichlet_map() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let basis = BasisDescriptor::interval(PI, 16).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        // 1/c strictly between consecutive squares keeps sin(π/√c) away from 0.
        let n: u32 = rng.gen_range(1..=8);
        let kappa = f64::from(n) + rng.gen_range(0.1..0.9);
        let c = 1.0 / (kappa * kappa);
        let (g0, g1) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lift = DirichletLift::new(c, &basis, &DirichletDatum::Interval { g0, g1 }).map_err(|e| e.to_string())?;
        for i in 1..=100 {
            let (u, _, u2) = lift.eval_interval(PI * i as f64 / 101.0);
            worst = worst.max((u + c * u2).abs() / u.abs().max((c * u2).abs()).max(1.0));
        }
        let (u0, u1) = (lift.eval_interval(0.0).0, lift.eval_interval(PI).0);
        ensure((u0 - g0).abs() <= 1e-12 && (u1 - g1).abs() <= 1e-12, || format!("trace off at c = {c}"))?;
    }
    ensure(worst <= 1e-10, || format!("interior residual {worst:e}"))?;
    for c in [0.25, 1.0 / 9.0, 1.0] {
        let r = DirichletLift::new(c, &basis, &DirichletDatum::Interval { g0: 1.0, g1: 1.0 });
        ensure(matches!(r, Err(Error::ExceptionalParameter { .. })), || format!("c = {c} accepted"))?;
    }
    Ok(format!("interior residual {worst:.1e}; c = 1/4, 1/9, 1 refused"))
}

fn propagation() -> Outcome {
    let horizon = 0.05;
    let p = ParameterSet::new(1.0, 1.0, 0.5).map_err(|e| e.to_string())?;
    let basis = BasisDescriptor::interval(PI, 256).map_err(|e| e.to_string())?;
    let ns: Vec<usize> = (1..=12).map(|j| 1usize << j).collect();
    for &n in &ns {
        let f = ExponentialBurst { rate: n as f64, horizon };
        ensure(f.first_derivative(horizon) == 1.0, || format!("f_n'(T) != 1 at n = {n}"))?;
    }
    let f0 = DirichletDatum::Interval { g0: 1.0, g1: 0.0 };
    let rep = propagation_burst(&p, &basis, &f0, horizon, &ns, (1.0, 2.0)).map_err(|e| e.to_string())?;
    let last = rep.rows.last().ok_or("no rows")?.ratio;
    let n = rep.threshold_n.ok_or_else(|| format!("ratio never reached 1/2 (last {last})"))?;
    ensure(last > 0.9, || format!("ratio at n = 4096 is {last}"))?;
    Ok(format!("ratio >= 1/2 from n = {n}; ratio {last:.5} at n = 4096"))
}

fn singular_growth(approach: Approach) -> Result<(f64, f64), String> {
    let rows = singularity_scan(1.0, 1.0, 0.5, 1.0, 1..=20, approach, 1.0).map_err(|e| e.to_string())?;
    let at = |j: i32| rows.iter().find(|r| r.j == j).map(|r| r.second_log_abs).ok_or("missing row");
    let growth = at(20)? - at(10)?;
    let first = rows.iter().map(|r| r.first_abs).fold(0.0, f64::max);
    Ok((growth, first))
}

fn whole_line_singularity() -> Outcome {
    let (growth, first) = singular_growth(Approach::Below)?;
    ensure(first <= 1.0, || format!("first term reaches {first}"))?;
    ensure(growth >= 10f64.ln(), || {
        format!("ln(|second(j=20)|/|second(j=10)|) = {growth:.4e}; first term bounded by {first:.3}")
    })?;
    Ok(format!("growth factor e^{growth:.3e}"))
}

fn limit1() -> Outcome {
    let (a, b, l, t) = (1.0, 1.0, 1.0, 0.5);
    let mut cs = limit1_c_values(l, 2..=6);
    cs.extend([(1.0 + 1e-5) / l, (1.0 - 1e-5) / l]);
    for &c in &cs {
        let row = limit1_row(a, b, l, c, t).map_err(|e| e.to_string())?;
        let above = c > 1.0 / l;
        ensure((row.exp_second > 0.0) == above, || format!("exponent sign wrong at c = {c}"))?;
    }
    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for c in [(1.0 + 1e-5) / l, (1.0 - 1e-5) / l] {
        let row = limit1_row(a, b, l, c, t).map_err(|e| e.to_string())?;
        worst_a = worst_a.max((row.coeff_a + a / (b * l)).abs());
        let target = b * l / (a * a * a);
        worst_b = worst_b.max((row.coeff_b / (row.leading * row.leading) - target).abs() / target);
    }
    ensure(worst_a <= 1e-4 && worst_b <= 0.05, || format!("A off by {worst_a:e}, B ratio off by {worst_b:e}"))?;
    Ok(format!("A off by {worst_a:.1e}, B/(1-cλ²)² off by {:.2}%", 100.0 * worst_b))
}

fn limit2() -> Outcome {
    let basis = BasisDescriptor::interval(PI, 40).map_err(|e| e.to_string())?;
    let rep = limit2_scan(1.0, 1.0, 1.0, &basis, 4..=40, 0.1, 1e3).map_err(|e| e.to_string())?;
    let (g, c) = (rep.growth_exponent, rep.coefficient_exponent);
    ensure((1.40..=1.60).contains(&g) && (-2.6..=-2.4).contains(&c), || {
        format!("growth {g:.4}, coefficient {c:.4}")
    })?;
    Ok(format!("growth exponent {g:.4}, coefficient exponent {c:.4}"))
}

fn limit3() -> Outcome {
    let t = 0.1;
    let rep = limit3_scan(1..=12, t).map_err(|e| e.to_string())?;
    let mut oracle: f64 = 0.0;
    for r in &rep.rows {
        let n2 = (r.k * r.k) as f64;
        let k4 = n2 * n2;
        let sigma = r.parameter;
        let at_zero = r.coeff_first + r.coeff_second;
        ensure((at_zero - 1.0 / k4).abs() <= 1e-12 / k4, || format!("θ(0) = {at_zero} at k = {}", r.k))?;
        for i in 1..=50 {
            let s = i as f64 * 0.02;
            let second = r.second_addendum(s).value();
            ensure(second.abs() < 2.0 / k4, || format!("second addendum {second} at k = {}, t = {s}", r.k))?;
        }
        let init = ModalInitialData::new(1.0 / k4, -0.5 / n2);
        let prob = OdeProblem { leading: sigma - sigma * sigma * n2 / 4.0, damping: 2.0, stiffness: n2, init, horizon: t };
        let traj = integrate_mode(&prob, 1e-12, 1e-15).map_err(|e| e.to_string())?;
        for i in 1..=10 {
            let s = t * i as f64 / 10.0;
            let got = (r.first_addendum(s) + r.second_addendum(s)).value();
            let want = traj.sample(s).0;
            oracle = oracle.max(rel(got, want, want.abs()));
        }
    }
    ensure(oracle <= 1e-8, || format!("oracle gap {oracle:e}"))?;
    ensure(rep.heat_compatible, || "heat compatibility fails".into())?;
    let again = limit3_scan(1..=12, t).map_err(|e| e.to_string())?;
    ensure(again.threshold_k == rep.threshold_k, || "threshold changed between runs".into())?;
    let k = rep.threshold_k.ok_or("no k with |θ_k(0.1)| > k")?;
    Ok(format!("oracle gap {oracle:.1e}; threshold k = {k}"))
}

fn fd_gap(p: &ParameterSet, nx: usize, dt: f64, t: f64) -> Result<f64, String> {
    let config = FdConfig { length: PI, nx, dt, horizon: t, snapshot_every: usize::MAX };
    let xs = config.grid();
    let phi: Vec<f64> = xs.iter().map(|&x| sine_mode(1, PI, x)).collect();
    let fd = fd_solve(p, &config, &vec![0.0; nx], &phi, &BoundarySignal::new_zero(t)).map_err(|e| e.to_string())?;
    let basis = BasisDescriptor::interval(PI, 1).map_err(|e| e.to_string())?;
    let one = Field::unit(&basis, 1).map_err(|e| e.to_string())?;
    let (u, _) = evolve_homogeneous(p, &Field::zeros(&basis), &one, t).map_err(|e| e.to_string())?;
    let (mut num, mut den) = (0.0, 0.0);
    for (x, v) in xs.iter().zip(fd.final_state()) {
        let want = u.coefficients()[0] * sine_mode(1, PI, *x);
        num += (v - want).powi(2);
        den += want * want;
    }
    Ok((num / den).sqrt())
}

fn spectral_vs_fd() -> Outcome {
    let p = ParameterSet::new(3.0, 1.0, 0.5).map_err(|e| e.to_string())?;
    let coarse = fd_gap(&p, 2000, 1e-4, 0.7)?;
    let fine = fd_gap(&p, 4000, 5e-5, 0.7)?;
    ensure(coarse <= 1e-2 && coarse / fine >= 3.0, || format!("{coarse:e} -> {fine:e}"))?;
    Ok(format!("relative L² {coarse:.2e} at nx = 2000, {fine:.2e} at nx = 4000"))
}

const DETERMINISM_RUNS: &[&[&str]] = &[
    &["spectrum", "--L", "pi", "--L", "2", "--N", "64"],
    &["exceptional", "--N", "32", "--kind", "sigma", "--gamma-rho", "4"],
    &["solve", "--a", "1", "--b", "2", "--c", "0.3", "--N", "32", "--theta0", "1,0.5,0.25"],
    &["boundary", "--a", "1", "--b", "1", "--c", "0.3", "--N", "32", "--check", "11"],
    &["limit1"],
    &["limit2"],
    &["limit3"],
    &["heatcmp"],
    &["propagation", "--N", "64", "--jmax", "8"],
    &["wholeline"],
    &["verify", "--cases", "50"],
];

fn run_cli(args: &[&str], threads: usize) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cattaneo"))
        .args(args)
        .env("CATTANEO_THREADS", threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} exited with {}", out.status))?;
    Ok((out.stdout, out.stderr))
}

fn determinism() -> Outcome {
    for args in DETERMINISM_RUNS {
        let reference = run_cli(args, 1)?;
        for threads in [1, 4] {
            for _ in 0..3 {
                ensure(run_cli(args, threads)? == reference, || format!("{args:?} differs at {threads} threads"))?;
            }
        }
    }
    Ok(format!("{} subcommands, 3 runs each at 1 and 4 threads", DETERMINISM_RUNS.len()))
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "compatibility dichotomy", budget: Duration::from_secs(1), expected_failure: false, run: compatibility_dichotomy },
    Criterion { id: 2, name: "closed form vs ODE oracle", budget: Duration::from_secs(10), expected_failure: false, run: closed_form_vs_oracle },
    Criterion { id: 3, name: "semigroup identity", budget: Duration::from_secs(30), expected_failure: false, run: semigroup_identity },
    Criterion { id: 4, name: "Dirichlet map", budget: Duration::from_secs(1), expected_failure: false, run: dirichlet_map },
    Criterion { id: 5, name: "propagation speed", budget: Duration::from_secs(120), expected_failure: false, run: propagation },
    Criterion { id: 6, name: "whole-line singularity", budget: Duration::from_secs(1), expected_failure: true, run: whole_line_singularity },
    Criterion { id: 7, name: "limit 1", budget: Duration::from_secs(1), expected_failure: false, run: limit1 },
    Criterion { id: 8, name: "limit 2", budget: Duration::from_secs(1), expected_failure: false, run: limit2 },
    Criterion { id: 9, name: "limit 3", budget: Duration::from_secs(1), expected_failure: false, run: limit3 },
    Criterion { id: 10, name: "spectral vs finite differences", budget: Duration::from_secs(120), expected_failure: false, run: spectral_vs_fd },
    Criterion { id: 11, name: "determinism", budget: Duration::from_secs(60), expected_failure: false, run: determinism },
];

fn main() {
    let mut unexpected = 0;
    for c in CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; over budget {:?}", c.budget))
            }
        });
        let secs = elapsed.as_secs_f64();
        match (&outcome, c.expected_failure) {
            (Ok(detail), _) => println!("PASS  {:>2} {} ({detail}) [{secs:.3} s]", c.id, c.name),
            (Err(why), true) => println!("FAIL  {:>2} {} ({why}) [{secs:.3} s] expected failure, see README", c.id, c.name),
            (Err(why), false) => {
                unexpected += 1;
                println!("FAIL  {:>2} {} ({why}) [{secs:.3} s]", c.id, c.name);
            }
        }
    }
    if let Ok((growth, first)) = singular_growth(Approach::Above) {
        println!(
            "INFO   6 mirrored scan λ = 1/√c + 2⁻ʲ: ln(|second(j=20)|/|second(j=10)|) = {growth:.4e}, first term bounded by {first:.3}"
        );
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
