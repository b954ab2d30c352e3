//! Pipeline orchestration: parse -> Euler-Lagrange -> ansatz -> solve ->
//! charges -> verify -> report, plus the transform and numeric-only modes.

use noether_core::calculus::{euler_lagrange, LagrangianSpec};
use noether_core::conserved::{
    bootstrap_sigma, noether_charge, span_contains, span_contains_exprs, verify_offshell,
    ConservedQuantity,
};
use noether_core::cyclic::{
    equivalent_lagrangian, gauge_lift_check, is_cyclic, ostrogradsky_momentum, transform_expr,
    transform_lagrangian, PointTransformation,
};
use noether_core::expr::{parse, to_text, Expr};
use noether_core::numeric::{drift, integrate, reduce_to_first_order, FirstOrderSystem};
use noether_core::rational::format_rational;
use noether_core::symmetry::{assemble_system, build_ansatz, SymmetryGenerator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};
use crate::problem::{NumericSection, ProblemFile};
use crate::report::Report;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub order_cap: u32,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            order_cap: noether_core::DEFAULT_ORDER_CAP,
            tol_abs: None,
            tol_rel: None,
        }
    }
}

fn build_spec(problem: &ProblemFile, cap: u32) -> CliResult<LagrangianSpec> {
    if problem.order > cap {
        return Err(CliError::input(format!(
            "order {} exceeds the jet-order cap {cap}",
            problem.order
        )));
    }
    let l = parse_in(problem, &problem.lagrangian, "lagrangian")?;
    LagrangianSpec::new(problem.coordinates.len(), problem.order, l)
        .map_err(|e| CliError::engine("lagrangian", e))
}

fn parse_in(problem: &ProblemFile, text: &str, what: &str) -> CliResult<Expr> {
    parse(text, &problem.coordinates, &problem.parameters)
        .map_err(|e| CliError::engine(&format!("{what} `{text}`"), e))
}

fn expr_fact(report: &mut Report, key: impl Into<String>, e: &Expr, coords: &[String]) {
    report.fact(key, to_text(e, coords));
}

/// Full symmetry pipeline over a problem file.
pub fn run_solve(problem: &ProblemFile, opts: &RunOptions) -> CliResult<Report> {
    let cap = opts.order_cap;
    let mut report = Report::new(&problem.name, "solve", opts.seed, cap);
    report.fact("coordinates", problem.coordinates.join(","));
    let spec = build_spec(problem, cap)?;
    let coords = &problem.coordinates;
    expr_fact(&mut report, "lagrangian", &spec.lagrangian, coords);
    report.fact("order", spec.order);

    for i in 0..spec.n_coords {
        let el = euler_lagrange(&spec, i, cap).map_err(|e| CliError::engine("euler-lagrange", e))?;
        expr_fact(&mut report, format!("el[{i}]"), &el, coords);
    }

    let sigma = bootstrap_sigma(cap).map_err(|e| CliError::engine("sigma bootstrap", e))?;
    report.fact("sigma", sigma);

    let ansatz = build_ansatz(&spec, &problem.ansatz, cap)
        .map_err(|e| CliError::engine("ansatz", e))?;
    for note in &ansatz.notes {
        report.fact("note", note);
    }
    report.fact("ansatz-unknowns", ansatz.unknown_count());
    let system =
        assemble_system(&spec, &ansatz, cap).map_err(|e| CliError::engine("assembly", e))?;
    report.fact("system-rows", system.row_count());
    report.fact("system-rank", system.rank());
    let basis = system.nullspace();
    report.fact("generators", basis.len());
    let generators =
        noether_core::symmetry::extract_generators(&spec, &ansatz, &basis, cap)
            .map_err(|e| CliError::engine("generator extraction", e))?;

    let mut charges: Vec<ConservedQuantity> = Vec::with_capacity(generators.len());
    for (i, g) in generators.iter().enumerate() {
        expr_fact(&mut report, format!("generator[{i}].zeta"), &g.zeta, coords);
        for (j, eta) in g.eta.iter().enumerate() {
            expr_fact(&mut report, format!("generator[{i}].eta[{j}]"), eta, coords);
        }
        expr_fact(&mut report, format!("generator[{i}].gauge"), &g.gauge, coords);
        let mut q =
            noether_charge(&spec, g, cap).map_err(|e| CliError::engine("charge", e))?;
        expr_fact(&mut report, format!("charge[{i}]"), &q.expr, coords);
        let ok = verify_offshell(&spec, &mut q, sigma, cap)
            .map_err(|e| CliError::engine("off-shell verification", e))?;
        report.check(format!("offshell[{i}]"), ok);
        charges.push(q);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for (i, text) in problem.expected.iter().enumerate() {
        report.fact(format!("expected[{i}].integral"), text);
        let candidate = parse_in(problem, text, "expected integral")?;
        let matched = span_contains(&charges, &candidate, &mut rng)
            .map_err(|e| CliError::engine("span matching", e))?;
        match matched {
            Some(m) => {
                report.check(format!("expected[{i}].span"), true);
                let list = m
                    .coefficients
                    .iter()
                    .map(format_rational)
                    .collect::<Vec<_>>()
                    .join(",");
                report.fact(format!("expected[{i}].coefficients"), list);
                report.fact(format!("expected[{i}].constant"), format_rational(&m.constant));
            }
            None => report.check(format!("expected[{i}].span"), false),
        }
    }

    if let Some(numeric) = &problem.numeric {
        let charge_exprs: Vec<(String, Expr)> = charges
            .iter()
            .enumerate()
            .map(|(i, q)| (format!("charge[{i}]"), q.expr.clone()))
            .collect();
        run_numeric_block(&mut report, &spec, numeric, opts, &charge_exprs, cap)?;
    }
    Ok(report)
}

/// Numeric-only mode: integrate and measure drift of the expected
/// integrals, without symmetry solving.
pub fn run_verify(problem: &ProblemFile, opts: &RunOptions) -> CliResult<Report> {
    let cap = opts.order_cap;
    let mut report = Report::new(&problem.name, "verify", opts.seed, cap);
    report.fact("coordinates", problem.coordinates.join(","));
    let spec = build_spec(problem, cap)?;
    expr_fact(&mut report, "lagrangian", &spec.lagrangian, &problem.coordinates);
    let numeric = problem
        .numeric
        .as_ref()
        .ok_or_else(|| CliError::input("verify mode requires a [numeric] section"))?;
    let mut probes = Vec::new();
    for (i, text) in problem.expected.iter().enumerate() {
        report.fact(format!("expected[{i}].integral"), text);
        probes.push((format!("expected[{i}]"), parse_in(problem, text, "expected integral")?));
    }
    if probes.is_empty() {
        return Err(CliError::input(
            "verify mode requires an [expected] section with integrals",
        ));
    }
    run_numeric_block(&mut report, &spec, numeric, opts, &probes, cap)?;
    Ok(report)
}

fn run_numeric_block(
    report: &mut Report,
    spec: &LagrangianSpec,
    numeric: &NumericSection,
    opts: &RunOptions,
    charges: &[(String, Expr)],
    cap: u32,
) -> CliResult<()> {
    let tol_abs = opts.tol_abs.unwrap_or(numeric.tol_abs);
    let tol_rel = opts.tol_rel.unwrap_or(numeric.tol_rel);
    let sys: FirstOrderSystem = reduce_to_first_order(spec, cap)
        .map_err(|e| CliError::engine("first-order reduction", e))?;
    report.fact("numeric.dimension", sys.dim());
    report.fact("numeric.t-end", numeric.t_end);
    report.fact("numeric.step", numeric.step);
    report.fact("numeric.tol-abs", format!("{tol_abs:e}"));
    report.fact("numeric.tol-rel", format!("{tol_rel:e}"));
    if numeric.t_end <= 0.0 {
        report.fact(
            "numeric.warning",
            "t_end <= 0 gives a single-sample trajectory; drift is trivially zero",
        );
    }
    for (s, initial) in numeric.initials.iter().enumerate() {
        report.fact(
            format!("numeric[{s}].initial"),
            initial
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        let traj = integrate(&sys, initial, numeric.t_end, numeric.step)
            .map_err(|e| CliError::engine("integration", e))?;
        if let Some(t) = traj.truncated_at {
            report.fact(format!("numeric[{s}].truncated-at"), t);
            report.check(format!("numeric[{s}].finite"), false);
            continue;
        }
        for (label, expr) in charges {
            let d = drift(&traj, &sys, expr)
                .map_err(|e| CliError::engine("drift evaluation", e))?;
            report.fact(format!("numeric[{s}].{label}.max-abs"), format!("{:e}", d.max_abs));
            report.fact(format!("numeric[{s}].{label}.max-rel"), format!("{:e}", d.max_rel));
            report.check(
                format!("numeric[{s}].{label}.drift"),
                d.max_abs <= tol_abs && d.max_rel <= tol_rel,
            );
        }
    }
    Ok(())
}

/// Point-transformation workflow: L', gauge lift, equivalent Lagrangian,
/// cyclicity, Ostrogradsky momentum, and the span match back to the
/// original frame's integral.
pub fn run_transform(problem: &ProblemFile, opts: &RunOptions) -> CliResult<Report> {
    let cap = opts.order_cap;
    let mut report = Report::new(&problem.name, "transform", opts.seed, cap);
    report.fact("coordinates", problem.coordinates.join(","));
    let spec = build_spec(problem, cap)?;
    let coords = &problem.coordinates;
    expr_fact(&mut report, "lagrangian", &spec.lagrangian, coords);
    let section = problem
        .transform
        .as_ref()
        .ok_or_else(|| CliError::input("transform mode requires a [transform] section"))?;

    let t_of = parse_in(problem, &section.t_of, "t_of")?;
    let x_of = section
        .x_of
        .iter()
        .map(|s| parse_in(problem, s, "x_of"))
        .collect::<CliResult<Vec<_>>>()?;
    let tr = PointTransformation::new(t_of, x_of)
        .map_err(|e| CliError::engine("transformation", e))?;
    expr_fact(&mut report, "transform.t", &tr.t_of, coords);
    for (i, x) in tr.x_of.iter().enumerate() {
        expr_fact(&mut report, format!("transform.x[{i}]"), x, coords);
    }
    let k = section.cyclic_index;
    report.fact("transform.cyclic-index", k);

    let lp = transform_lagrangian(&spec, &tr, cap)
        .map_err(|e| CliError::engine("lagrangian transformation", e))?;
    expr_fact(&mut report, "transform.l-prime", &lp.lagrangian, coords);
    if let Some(text) = &section.expect_l_prime {
        let want = parse_in(problem, text, "expect_l_prime")?;
        report.check("transform.l-prime-matches", lp.lagrangian == want);
    }

    let f = match &section.f {
        Some(text) => parse_in(problem, text, "F")?,
        None => Expr::zero(),
    };
    expr_fact(&mut report, "transform.f", &f, coords);
    match (&section.gauge, &section.f) {
        (Some(g_text), Some(_)) => {
            let g = parse_in(problem, g_text, "G")?;
            expr_fact(&mut report, "transform.g", &g, coords);
            let ok = gauge_lift_check(&g, &f, &tr, k, cap)
                .map_err(|e| CliError::engine("gauge lift", e))?;
            report.check("transform.gauge-lift", ok);
        }
        (Some(_), None) => {
            return Err(CliError::input(
                "[transform] provides G without F; the gauge lift needs both",
            ))
        }
        _ => {}
    }

    let lt = equivalent_lagrangian(&lp, &f, cap)
        .map_err(|e| CliError::engine("equivalent lagrangian", e))?;
    expr_fact(&mut report, "transform.l-tilde", &lt.lagrangian, coords);
    if let Some(text) = &section.expect_l_tilde {
        let want = parse_in(problem, text, "expect_l_tilde")?;
        report.check("transform.l-tilde-matches", lt.lagrangian == want);
    }

    let cyclic = is_cyclic(&lt, k);
    report.fact("transform.cyclic", cyclic);
    if let Some(want) = section.expect_cyclic {
        report.check("transform.cyclic-matches", cyclic == want);
    }

    let momentum = ostrogradsky_momentum(&lt, k, cap)
        .map_err(|e| CliError::engine("momentum", e))?;
    expr_fact(&mut report, "transform.momentum", &momentum, coords);
    if let Some(text) = &section.expect_momentum {
        let want = parse_in(problem, text, "expect_momentum")?;
        report.check("transform.momentum-matches", momentum == want);
    }

    if cyclic {
        // conservation of the momentum is the translation charge's
        // off-shell identity in the primed frame
        let sigma = bootstrap_sigma(cap).map_err(|e| CliError::engine("sigma bootstrap", e))?;
        report.fact("sigma", sigma);
        let mut eta = vec![Expr::zero(); lt.n_coords];
        eta[k] = Expr::one();
        let translation = SymmetryGenerator::new(Expr::zero(), eta, Expr::zero());
        let mut q = ConservedQuantity {
            expr: momentum.clone(),
            generator: translation,
            checked_offshell: false,
            checked_numeric: false,
        };
        let ok = verify_offshell(&lt, &mut q, sigma, cap)
            .map_err(|e| CliError::engine("momentum off-shell check", e))?;
        report.check("transform.momentum-offshell", ok);
    }

    if let Some(text) = &section.momentum_matches {
        report.fact("transform.momentum-candidate", text);
        let candidate = parse_in(problem, text, "momentum_matches")?;
        let primed = transform_expr(&candidate, &tr, cap)
            .map_err(|e| CliError::engine("candidate re-expression", e))?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let matched = span_contains_exprs(&[&momentum], &primed, &mut rng)
            .map_err(|e| CliError::engine("momentum span matching", e))?;
        match matched {
            Some(m) => {
                report.check("transform.momentum-span", true);
                report.fact(
                    "transform.momentum-coefficient",
                    format_rational(&m.coefficients[0]),
                );
                report.fact(
                    "transform.momentum-constant",
                    format_rational(&m.constant),
                );
            }
            None => report.check("transform.momentum-span", false),
        }
    }
    Ok(report)
}
