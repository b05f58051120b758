use cattaneo_core::boundary::{
    build_blocks, evolve_with_boundary, mild_solution_check, BoundarySignal, Constant, DirichletDatum,
    ExponentialBurst, Polynomial, Sine, SmoothStep, TimeProfile,
};
use cattaneo_core::experiments::{
    heat_comparison, limit1_c_values, limit1_row, limit2_scan, limit3_scan, propagation_burst, singularity_scan,
    Approach, RowFlag,
};
use cattaneo_core::modal::ParameterSet;
use cattaneo_core::solver::{check_wellposed, evolve_homogeneous_with, EvolveOptions, Verdict};
use cattaneo_core::spectrum::{box_modes, exceptional_for_c, exceptional_for_sigma, weyl_exponent_fit};
use cattaneo_core::{BasisDescriptor, Error, Field};

use crate::args::*;
use crate::output::{float, Report, Table};
use crate::{verify, CliError};

pub fn dispatch(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Exceptional(a) => exceptional(a),
        Command::Solve(a) => solve(a),
        Command::Boundary(a) => boundary(a),
        Command::Limit1(a) => limit1(a),
        Command::Limit2(a) => limit2(a),
        Command::Limit3(a) => limit3(a),
        Command::Heatcmp(a) => heatcmp(a),
        Command::Propagation(a) => propagation(a),
        Command::Wholeline(a) => wholeline(a),
        Command::Verify(a) => verify::run(a.seed, a.cases),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Resolves exactly one coefficient style; `fallback` applies when neither
/// style is given.
pub fn parameter_set(p: &ParamArgs, fallback: Option<(f64, f64, f64)>) -> Result<ParameterSet, CliError> {
    let direct = p.a.is_some() || p.b.is_some() || p.c.is_some();
    let physical = p.chi.is_some() || p.sigma.is_some() || p.gamma_rho.is_some() || p.map.is_some();
    match (direct, physical) {
        (true, true) => Err(usage("use either --a/--b/--c or --chi/--sigma/--gamma-rho, not both")),
        (true, false) => match (p.a, p.b, p.c) {
            (Some(a), Some(b), Some(c)) => Ok(ParameterSet::new(a, b, c)?),
            _ => Err(usage("--a, --b and --c must be given together")),
        },
        (false, true) => match (p.chi, p.sigma, p.gamma_rho) {
            (Some(chi), Some(sigma), Some(gr)) => Ok(match p.map.unwrap_or(MapKind::M1) {
                MapKind::M1 => ParameterSet::from_physical(chi, sigma, gr)?,
                MapKind::M2 => ParameterSet::sigma_explicit(chi, sigma, gr)?,
            }),
            _ => Err(usage("--chi, --sigma and --gamma-rho must be given together")),
        },
        (false, false) => match fallback {
            Some((a, b, c)) => Ok(ParameterSet::new(a, b, c)?),
            None => Err(usage("coefficients required: --a/--b/--c or --chi/--sigma/--gamma-rho")),
        },
    }
}

fn basis(d: &DomainArgs) -> Result<BasisDescriptor, CliError> {
    Ok(BasisDescriptor::new(d.lengths.clone(), d.truncation)?)
}

fn multi_index(idx: &[usize]) -> String {
    idx.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn finite_flag(values: &[f64]) -> &'static str {
    if values.iter().all(|v| v.is_finite()) {
        RowFlag::Ok.token()
    } else {
        RowFlag::Saturated.token()
    }
}

fn verdict_token(v: Verdict) -> &'static str {
    match v {
        Verdict::WellPosed => "well_posed",
        Verdict::Exceptional => "exceptional",
        Verdict::NearExceptional => "near_exceptional",
    }
}

fn spectrum(args: &SpectrumArgs) -> Result<Report, CliError> {
    let basis = basis(&args.domain)?;
    let modes = box_modes(&basis);
    let mut table = Table::new(&["index", "lambda_sq", "multi_index"]);
    for m in &modes {
        table.push(vec![m.index.to_string(), float(m.lambda_sq), multi_index(&m.multi_index)]);
    }
    let d = basis.dimension();
    let mut summary = format!("{} modes in dimension {d}", modes.len());
    if let Ok(fit) = weyl_exponent_fit(&modes, d) {
        summary.push_str(&format!("; Weyl exponent {:.4} (predicted {:.4})", fit.exponent, fit.predicted));
    }
    Ok(Report { table, summary, failure: None })
}

fn exceptional(args: &ExceptionalArgs) -> Result<Report, CliError> {
    let modes = box_modes(&basis(&args.domain)?);
    let set = match args.kind {
        SetKind::C => exceptional_for_c(&modes)?,
        SetKind::Sigma => {
            let gr = args.gamma_rho.ok_or_else(|| usage("--kind sigma needs --gamma-rho"))?;
            exceptional_for_sigma(&modes, gr)?
        }
    };
    let mut table = Table::new(&["index", "value"]);
    for (i, v) in set.values.iter().enumerate() {
        table.push(vec![(i + 1).to_string(), float(*v)]);
    }
    let summary = format!("{} distinct exceptional values from {} modes", set.values.len(), modes.len());
    Ok(Report { table, summary, failure: None })
}

fn padded(basis: &BasisDescriptor, values: &[f64], name: &str) -> Result<Field, CliError> {
    let n = basis.truncation();
    if values.len() > n {
        return Err(usage(format!("--{name} has {} coefficients for {n} modes", values.len())));
    }
    let mut coeffs = values.to_vec();
    coeffs.resize(n, 0.0);
    Ok(Field::new(basis.clone(), coeffs)?)
}

fn solve(args: &SolveArgs) -> Result<Report, CliError> {
    let p = parameter_set(&args.params, None)?;
    let basis = basis(&args.domain)?;
    let theta0 = padded(&basis, &args.theta0, "theta0")?;
    let theta1 = padded(&basis, &args.theta1, "theta1")?;
    let report = check_wellposed(p.effective_c(), &basis, args.threshold)?;
    let options = EvolveOptions { allow_exceptional: args.allow_exceptional };
    let modes = box_modes(&basis);
    let mut table = Table::new(&["t", "mode", "lambda_sq", "theta", "theta_prime", "flag"]);
    for &t in &args.times {
        let (u, v) = evolve_homogeneous_with(&p, &theta0, &theta1, t, options)?;
        for (j, m) in modes.iter().enumerate() {
            let (x, y) = (u.coefficients()[j], v.coefficients()[j]);
            table.push(vec![float(t), m.index.to_string(), float(m.lambda_sq), float(x), float(y), finite_flag(&[x, y]).into()]);
        }
    }
    let summary = format!(
        "{}: c = {} at distance {:e} from exceptional value {}; {} modes x {} times",
        verdict_token(report.verdict),
        report.c_value,
        report.distance,
        report.nearest_exceptional,
        modes.len(),
        args.times.len()
    );
    Ok(Report { table, summary, failure: None })
}

fn profile(kind: ProfileKind, params: &[f64], horizon: f64) -> Result<Box<dyn TimeProfile>, CliError> {
    let get = |i: usize, default: Option<f64>| {
        params.get(i).copied().or(default).ok_or_else(|| usage(format!("--profile-params needs at least {} values", i + 1)))
    };
    Ok(match kind {
        ProfileKind::Constant => Box::new(Constant(get(0, None)?)),
        ProfileKind::Sine => Box::new(Sine { omega: get(0, None)?, phase: get(1, Some(0.0))? }),
        ProfileKind::Polynomial => Box::new(Polynomial(params.to_vec())),
        ProfileKind::Step => Box::new(SmoothStep { center: get(0, None)?, width: get(1, None)? }),
        ProfileKind::Burst => Box::new(ExponentialBurst { rate: get(0, None)?, horizon }),
    })
}

fn boundary(args: &BoundaryArgs) -> Result<Report, CliError> {
    if args.domain.lengths.len() != 1 {
        return Err(usage("boundary runs on an interval; give one --L"));
    }
    let p = parameter_set(&args.params, None)?;
    let basis = basis(&args.domain)?;
    let datum = DirichletDatum::Interval { g0: args.g0, g1: args.g1 };
    let blocks = build_blocks(&p, &basis, &datum)?;
    let signal = BoundarySignal::new(datum, profile(args.profile, &args.profile_params, args.t)?, args.t)?;
    let quad_step = args.quad_step.unwrap_or(1e-3 * args.t);
    let zero = Field::zeros(&basis);
    let (u, v) = evolve_with_boundary(&blocks, &zero, &zero, &signal, args.t, quad_step)?;
    let mut table = Table::new(&["mode", "lambda_sq", "d", "theta", "theta_prime", "flag"]);
    for (j, b) in blocks.iter().enumerate() {
        let (x, y) = (u.coefficients()[j], v.coefficients()[j]);
        table.push(vec![b.mode_index.to_string(), float(b.lambda_sq), float(b.d), float(x), float(y), finite_flag(&[x, y]).into()]);
    }
    let mut summary = format!("{} modes from rest to t = {}", blocks.len(), args.t);
    if let Some(points) = args.check {
        if points < 3 {
            return Err(usage("--check needs at least 3 time points"));
        }
        let grid: Vec<f64> = (0..points).map(|i| args.t * i as f64 / (points - 1) as f64).collect();
        let r = mild_solution_check(&blocks, &zero, &zero, &signal, &grid, quad_step)?;
        summary.push_str(&format!(
            "; second-difference residual {:e} (mode {}), lifted-relation residual {:e} (mode {})",
            r.second_difference_residual,
            r.second_difference_worst_mode,
            r.lifted_relation_residual,
            r.lifted_relation_worst_mode
        ));
    }
    Ok(Report { table, summary, failure: None })
}

fn limit1(args: &Limit1Args) -> Result<Report, CliError> {
    if args.jmin > args.jmax {
        return Err(usage("--jmin exceeds --jmax"));
    }
    let cs = match &args.cs {
        Some(cs) => cs.clone(),
        None => limit1_c_values(args.lambda_sq, args.jmin..=args.jmax),
    };
    let mut table = Table::new(&[
        "c", "leading", "delta", "coeff_a", "coeff_b", "exp1", "exp2", "first", "second_log", "second", "first_limit",
        "flag",
    ]);
    for &c in &cs {
        match limit1_row(args.a, args.b, args.lambda_sq, c, args.t) {
            Ok(r) => {
                let flag = if r.second_addendum.is_saturated() { RowFlag::Saturated } else { RowFlag::Ok };
                table.push(vec![
                    float(c),
                    float(r.leading),
                    float(r.delta),
                    float(r.coeff_a),
                    float(r.coeff_b),
                    float(r.exp_first),
                    float(r.exp_second),
                    float(r.first_addendum.value()),
                    float(r.second_addendum.log),
                    float(r.second_addendum.value()),
                    float(r.first_addendum_limit),
                    flag.token().into(),
                ]);
            }
            Err(Error::ExceptionalParameter { .. }) => {
                let mut row = vec![float(c)];
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(RowFlag::Exceptional.token().into());
                table.push(row);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let summary = format!(
        "{} values of c around 1/λ² = {}; first-addendum limit {} at t = {}",
        cs.len(),
        1.0 / args.lambda_sq,
        cattaneo_core::experiments::limit1_first_addendum_limit(args.a, args.b, args.lambda_sq, args.t),
        args.t
    );
    Ok(Report { table, summary, failure: None })
}

fn scan_row(r: &cattaneo_core::experiments::LimitScanRow) -> Vec<String> {
    vec![
        r.k.to_string(),
        float(r.parameter),
        float(r.coeff_first),
        float(r.exp_first),
        float(r.coeff_second),
        float(r.exp_second),
        float(r.value_at_t.log),
    ]
}

fn limit2(args: &Limit2Args) -> Result<Report, CliError> {
    let basis = BasisDescriptor::new(args.lengths.clone(), args.kmax)?;
    let rep = limit2_scan(args.a, args.b, args.gamma, &basis, args.kmin..=args.kmax, args.t, args.bound)?;
    let mut table = Table::new(&["k", "c", "coeff1", "exp1", "coeff2", "exp2", "logvalue", "value", "flag"]);
    for r in &rep.rows {
        let mut row = scan_row(r);
        row.push(float(r.value_at_t.value()));
        row.push(r.flag.token().into());
        table.push(row);
    }
    let d = basis.dimension() as f64;
    let summary = format!(
        "gamma {}; growth exponent {:.4} (predicted {:.4}); coefficient exponent {:.4} (predicted {:.4}); first exponents nonpositive: {}; smallest k above {}: {}",
        rep.gamma,
        rep.growth_exponent,
        1.5 / d,
        rep.coefficient_exponent,
        -(1.0 + 1.5 / d),
        rep.first_exponents_nonpositive,
        rep.bound,
        rep.threshold_k.map_or("none".to_string(), |k| k.to_string())
    );
    Ok(Report { table, summary, failure: None })
}

fn limit3(args: &Limit3Args) -> Result<Report, CliError> {
    if args.kmin > args.kmax {
        return Err(usage("--kmin exceeds --kmax"));
    }
    let rep = limit3_scan(args.kmin..=args.kmax, args.t)?;
    let mut table = Table::new(&["k", "sigma", "coeff1", "exp1", "coeff2", "exp2", "logvalue", "flag"]);
    for r in &rep.rows {
        let mut row = scan_row(r);
        row.push(r.flag.token().into());
        table.push(row);
    }
    let summary = format!(
        "smallest k with |θ_k({})| > k: {}; heat compatibility exact: {}",
        args.t,
        rep.threshold_k.map_or("none".to_string(), |k| k.to_string()),
        rep.heat_compatible
    );
    Ok(Report { table, summary, failure: None })
}

fn heatcmp(args: &HeatcmpArgs) -> Result<Report, CliError> {
    let sigmas = match &args.sigmas {
        Some(s) => s.clone(),
        None => (args.kmin.max(1)..=args.kmax).map(cattaneo_core::experiments::limit3_sigma).collect(),
    };
    let basis = BasisDescriptor::interval(std::f64::consts::PI, args.truncation)?;
    let n = |j: usize| (j + 1) as f64;
    let theta0 = Field::new(basis.clone(), (0..args.truncation).map(|j| n(j).powi(-4)).collect())?;
    let theta1 = Field::new(basis.clone(), (0..args.truncation).map(|j| -0.5 * n(j).powi(-2)).collect())?;
    let p = ParameterSet::sigma_explicit(args.chi, 1.0, args.gamma_rho)?;
    let mut table = Table::new(&["sigma", "log_distance", "distance", "flag"]);
    for row in heat_comparison(&p, &sigmas, &theta0, &theta1, args.t) {
        let r = row?;
        table.push(vec![float(r.sigma), float(r.log_distance), float(r.distance), r.flag.token().into()]);
    }
    let summary = format!("{} values of σ, {} modes, t = {}", sigmas.len(), args.truncation, args.t);
    Ok(Report { table, summary, failure: None })
}

fn propagation(args: &PropagationArgs) -> Result<Report, CliError> {
    let p = parameter_set(&args.params, Some((1.0, 1.0, 0.5)))?;
    let basis = BasisDescriptor::interval(args.length, args.truncation)?;
    let f0 = DirichletDatum::Interval { g0: args.g0, g1: args.g1 };
    if args.jmax == 0 || args.jmax > 30 {
        return Err(usage("--jmax must lie in 1..=30"));
    }
    let ns: Vec<usize> = (1..=args.jmax).map(|j| 1usize << j).collect();
    let rep = propagation_burst(&p, &basis, &f0, args.horizon, &ns, (args.lo, args.hi))?;
    let mut table = Table::new(&["n", "mass", "target", "ratio"]);
    for r in &rep.rows {
        table.push(vec![r.n.to_string(), float(r.mass_in_subregion), float(r.target_mass), float(r.ratio)]);
    }
    let summary = format!(
        "T = {}: smallest n with ratio >= 1/2: {}; ratio at n = {}: {:.6}",
        args.horizon,
        rep.threshold_n.map_or("none".to_string(), |n| n.to_string()),
        ns[ns.len() - 1],
        rep.rows[rep.rows.len() - 1].ratio
    );
    Ok(Report { table, summary, failure: None })
}

fn wholeline(args: &WholelineArgs) -> Result<Report, CliError> {
    if args.jmin > args.jmax {
        return Err(usage("--jmin exceeds --jmax"));
    }
    let approach = match args.side {
        SideKind::Below => Approach::Below,
        SideKind::Above => Approach::Above,
    };
    let rows = singularity_scan(args.a, args.b, args.c, args.t, args.jmin..=args.jmax, approach, args.w1)?;
    let mut table = Table::new(&["j", "lambda", "first_abs", "second_log_abs", "second_abs", "flag"]);
    for r in &rows {
        let flag = if r.second_abs.is_finite() { RowFlag::Ok } else { RowFlag::Saturated };
        table.push(vec![
            r.j.to_string(),
            float(r.lambda),
            float(r.first_abs),
            float(r.second_log_abs),
            float(r.second_abs),
            flag.token().into(),
        ]);
    }
    let first_bound = rows.iter().map(|r| r.first_abs).fold(0.0, f64::max);
    let mut summary = format!("{} frequencies toward 1/√c = {}; max first term {:e}", rows.len(), 1.0 / args.c.sqrt(), first_bound);
    let at = |j: i32| rows.iter().find(|r| r.j == j);
    if let (Some(r10), Some(r20)) = (at(10), at(20)) {
        summary.push_str(&format!("; ln(|second(j=20)|/|second(j=10)|) = {:.6e}", r20.second_log_abs - r10.second_log_abs));
    }
    Ok(Report { table, summary, failure: None })
}
