use cattaneo_core::boundary::{
    build_blocks, dirichlet_map_interval, evolve_with_boundary, mild_solution_check, BoundarySignal, DirichletDatum,
    DirichletLift, Polynomial, SemigroupBlock, Sine, SmoothStep, TimeProfile,
};
use cattaneo_core::modal::{characteristic_roots, CharacteristicRoots, ParameterSet, DEFAULT_DEGENERATE_TOLERANCE};
use cattaneo_core::oracle::dopri5;
use cattaneo_core::{BasisDescriptor, Error, Field};
use proptest::prelude::*;
use std::f64::consts::PI;

/// `W' = 𝔸W - β d f + d f''` integrated step by step.
fn integrate_block<P: TimeProfile>(b: &SemigroupBlock, w0: [f64; 2], time: &P, t: f64) -> [f64; 2] {
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
    .unwrap();
    let y = traj.final_state();
    [y[0], y[1]]
}

fn setup() -> (ParameterSet, BasisDescriptor, DirichletDatum) {
    (
        ParameterSet::new(1.0, 1.0, 0.3).unwrap(),
        BasisDescriptor::interval(PI, 12).unwrap(),
        DirichletDatum::Interval { g0: 1.0, g1: -0.5 },
    )
}

fn worst_gap<P: TimeProfile + Clone>(time: P, t: f64, quad_step: f64) -> f64 {
    let (p, basis, datum) = setup();
    let blocks = build_blocks(&p, &basis, &datum).unwrap();
    let th0 = Field::new(basis.clone(), (1..=12).map(|n| 0.3 / n as f64).collect()).unwrap();
    let th1 = Field::unit(&basis, 2).unwrap();
    let signal = BoundarySignal::new(datum, time.clone(), t).unwrap();
    let (u, v) = evolve_with_boundary(&blocks, &th0, &th1, &signal, t, quad_step).unwrap();
    blocks
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let want = integrate_block(b, [th0.coefficients()[j], th1.coefficients()[j]], &time, t);
            let scale = want[0].abs().max(want[1].abs()).max(1.0);
            ((u.coefficients()[j] - want[0]).abs().max((v.coefficients()[j] - want[1]).abs())) / scale
        })
        .fold(0.0, f64::max)
}

#[test]
fn integrated_formula_matches_first_order_system() {
    assert!(worst_gap(Sine { omega: 1.0, phase: 0.0 }, 1.0, 1e-3) <= 1e-7);
    assert!(worst_gap(Polynomial(vec![0.2, -1.0, 0.5, 0.3]), 1.0, 1e-3) <= 1e-7);
    assert!(worst_gap(SmoothStep { center: 0.5, width: 0.2 }, 1.0, 1e-3) <= 1e-7);
}

#[test]
fn convolution_quadrature_is_fourth_order() {
    let signal = Sine { omega: 3.0, phase: 0.4 };
    let errors: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&q| worst_gap(signal, 1.0, q)).collect();
    for w in errors.windows(2) {
        assert!(w[0] / w[1] >= 8.0, "{errors:?}");
    }
}

#[test]
fn block_spectrum_matches_mode_roots_for_500_modes() {
    let p = ParameterSet::new(0.7, 1.3, 0.013).unwrap();
    let basis = BasisDescriptor::interval(PI, 500).unwrap();
    let blocks = build_blocks(&p, &basis, &DirichletDatum::Interval { g0: 1.0, g1: 0.0 }).unwrap();
    for b in &blocks {
        let block = b.eigenvalues();
        let modal = characteristic_roots(&p, b.lambda_sq, DEFAULT_DEGENERATE_TOLERANCE).unwrap();
        match (block, modal) {
            (CharacteristicRoots::RealDistinct { plus, minus }, CharacteristicRoots::RealDistinct { plus: p2, minus: m2 }) => {
                let (hi, lo) = if p2 > m2 { (p2, m2) } else { (m2, p2) };
                assert!((plus - hi).abs() <= 1e-10 * hi.abs() && (minus - lo).abs() <= 1e-10 * lo.abs(), "mode {}", b.mode_index);
            }
            (CharacteristicRoots::Complex { re, im }, CharacteristicRoots::Complex { re: r2, im: i2 }) => {
                let scale = re.hypot(im);
                assert!((re - r2).abs() <= 1e-10 * scale && (im.abs() - i2.abs()).abs() <= 1e-10 * scale, "mode {}", b.mode_index);
            }
            (x, y) => panic!("mode {}: {x:?} vs {y:?}", b.mode_index),
        }
    }
}

#[test]
fn smooth_approximations_converge_with_a_lipschitz_bound() {
    let (p, basis, datum) = setup();
    let blocks = build_blocks(&p, &basis, &datum).unwrap();
    let zero = Field::zeros(&basis);
    let run = |eps: f64| {
        let time = Sine { omega: 1.0, phase: 0.0 };
        let perturbed = cattaneo_core::boundary::FnProfile {
            value: move |t: f64| time.value(t) + eps * (3.0 * t).cos(),
            first: move |t: f64| time.first_derivative(t) - 3.0 * eps * (3.0 * t).sin(),
            second: move |t: f64| time.second_derivative(t) - 9.0 * eps * (3.0 * t).cos(),
        };
        let signal = BoundarySignal::new(datum.clone(), perturbed, 1.0).unwrap();
        evolve_with_boundary(&blocks, &zero, &zero, &signal, 1.0, 1e-3).unwrap()
    };
    let (u, v) = run(0.0);
    let gap = |eps: f64| {
        let (uj, vj) = run(eps);
        let du = uj.sub(&u).unwrap().coefficients().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let dv = vj.sub(&v).unwrap().coefficients().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        du.max(dv)
    };
    // The two-derivative size of the perturbation eps·cos(3t) is 9·eps.
    let lipschitz = gap(1.0) / 9.0;
    let mut last = f64::INFINITY;
    for j in 1..=16 {
        let eps = 1.0 / j as f64;
        let g = gap(eps);
        assert!(g <= 1.01 * lipschitz * 9.0 * eps);
        assert!(g < last);
        last = g;
    }
}

#[test]
fn zero_signal_passes_trivially_and_steps_report_worst_mode() {
    let (p, basis, datum) = setup();
    let blocks = build_blocks(&p, &basis, &datum).unwrap();
    let th0 = Field::unit(&basis, 1).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let zero = BoundarySignal::new(datum.clone(), Polynomial(vec![0.0]), 1.0).unwrap();
    let r = mild_solution_check(&blocks, &th0, &Field::zeros(&basis), &zero, &grid, 1e-3).unwrap();
    assert!(r.passes(1e-5, 1e-7), "{r:?}");
    let step = BoundarySignal::new(datum, SmoothStep { center: 0.5, width: 1e-3 }, 1.0).unwrap();
    let r = mild_solution_check(&blocks, &th0, &Field::zeros(&basis), &step, &grid, 1e-4).unwrap();
    assert!(r.second_difference_residual.is_finite() && r.lifted_relation_residual.is_finite());
    assert!((1..=12).contains(&r.second_difference_worst_mode));
}

#[test]
fn exceptional_c_is_rejected_on_the_interval() {
    for c in [0.25, 1.0 / 9.0, 1.0] {
        let r = dirichlet_map_interval(c, PI, 8, &DirichletDatum::Interval { g0: 1.0, g1: 0.0 });
        assert!(matches!(r, Err(Error::ExceptionalParameter { .. })), "{c}");
    }
}

proptest! {
    #[test]
    fn lift_solves_the_helmholtz_problem(
        c in 0.005f64..3.0,
        g0 in -5.0f64..5.0,
        g1 in -5.0f64..5.0,
    ) {
        let sin_l = (PI / c.sqrt()).sin();
        prop_assume!(sin_l.abs() > 1e-6);
        let basis = BasisDescriptor::interval(PI, 4).unwrap();
        let lift = DirichletLift::new(c, &basis, &DirichletDatum::Interval { g0, g1 }).unwrap();
        let scale = (g0.abs() + g1.abs()).max(1e-3) / sin_l.abs();
        let (u_0, _, _) = lift.eval_interval(0.0);
        let (u_l, _, _) = lift.eval_interval(PI);
        prop_assert!((u_0 - g0).abs() <= 1e-10 * scale && (u_l - g1).abs() <= 1e-10 * scale);
        let w = 1.0 / c.sqrt();
        for i in 1..=100 {
            let x = PI * i as f64 / 101.0;
            let (u, _, u2) = lift.eval_interval(x);
            let want = (g0 * ((PI - x) * w).sin() + g1 * (x * w).sin()) / sin_l;
            prop_assert!((u - want).abs() <= 1e-10 * scale);
            prop_assert!((u + c * u2).abs() <= 1e-10 * scale);
        }
    }
}
