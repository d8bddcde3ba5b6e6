use std::fmt::Write as _;

use anisolab_core::bounds::{check_mu_decay, check_n_laplace_inequality, check_wulff, eigen_torsion_bound};
use anisolab_core::gauge::DEFAULT_DIRECTIONS;
use anisolab_core::identities::{classic_pohozaev_residual, nonexistence_predicate, pohozaev_residual, PohozaevReport, serrin_constant};
use anisolab_core::mesh::MeshStats;
use anisolab_core::solver::{solve_dirichlet, torsional_rigidity};
use anisolab_core::spaceform::{self, solve_radial_torsion, SpaceformBall};
use anisolab_core::{solve_eigen, triangulate, Error, GaugeFamily, Result, SourceSpec, TriMesh};
use serde_json::{json, Value};

use crate::config::{Command, Experiment};
use crate::report::{to_value, CheckRow};

/// Everything a command produces besides the common report header.
pub struct Outcome {
    pub results: Value,
    pub files: Vec<(&'static str, String)>,
    pub checks: Vec<CheckRow>,
    pub ok: bool,
    pub mesh: Option<MeshStats>,
}

pub fn build_mesh(exp: &Experiment) -> Result<TriMesh> {
    let mut mesh = triangulate(&exp.polygon, exp.target_h)?;
    for _ in 0..exp.refine {
        mesh = mesh.refine_uniform();
    }
    Ok(mesh)
}

pub fn run(exp: &Experiment) -> Result<Outcome> {
    match exp.command {
        Command::SolveTorsion => solve_torsion(exp),
        Command::SolveEigen => solve_eigen_cmd(exp),
        Command::CheckPohozaev => check_pohozaev(exp),
        Command::CheckBounds => check_bounds(exp),
        Command::SpaceformReport => spaceform_report(exp),
        Command::WulffInfo => wulff_info(exp),
        Command::Suite => unreachable!("suites are dispatched separately"),
    }
}

fn solve_torsion(exp: &Experiment) -> Result<Outcome> {
    let mesh = build_mesh(exp)?;
    let src = SourceSpec::torsion(exp.p).with_weight_b(exp.b);
    let r = solve_dirichlet(&mesh, &exp.gauge, &src, &exp.config.solver)?;
    let (profile, wulff) = check_wulff(&r.field, &exp.gauge, &exp.bounds)?;
    let mut results = json!({
        "torsional_rigidity": r.field.integrate_with(|_, u, _| u),
        "max": r.field.max(),
        "energy": r.energy,
        "iterations": r.iterations,
        "grad_norm": r.grad_norm,
        "converged": r.converged,
        "pde_residual": r.pde_residual,
    });
    if exp.b == 0.0 {
        results["rigidity_forms"] = to_value(&torsional_rigidity(&r, &exp.gauge, exp.p));
    }
    Ok(Outcome {
        results,
        files: vec![("field.csv", r.field.to_csv()), ("levels.csv", profile.to_csv(Some(&wulff)))],
        checks: Vec::new(),
        ok: r.converged,
        mesh: Some(mesh.stats()),
    })
}

fn solve_eigen_cmd(exp: &Experiment) -> Result<Outcome> {
    let mesh = build_mesh(exp)?;
    let e = solve_eigen(&mesh, &exp.gauge, exp.p, &exp.config.solver)?;
    let (profile, wulff) = check_wulff(&e.field, &exp.gauge, &exp.bounds)?;
    let results = json!({
        "lambda": e.lambda,
        "iterations": e.iterations,
        "quotient_history": e.quotient_history,
        "max": e.field.max(),
    });
    Ok(Outcome {
        results,
        files: vec![("field.csv", e.field.to_csv()), ("levels.csv", profile.to_csv(Some(&wulff)))],
        checks: Vec::new(),
        ok: true,
        mesh: Some(mesh.stats()),
    })
}

fn row(exp: &Experiment, check: &str, r: &anisolab_core::BoundReport) -> CheckRow {
    CheckRow::from_bound(&exp.domain_label, &exp.gauge.name(), exp.p, check, r)
}

fn equality_row(exp: &Experiment, check: &str, lhs: f64, rhs: f64, tolerance: f64) -> CheckRow {
    let gap = (lhs - rhs).abs();
    CheckRow {
        domain: exp.domain_label.clone(),
        gauge: exp.gauge.name(),
        p: exp.p,
        check: check.into(),
        lhs,
        rhs,
        slack: -gap,
        tolerance,
        satisfied: gap <= tolerance,
    }
}

fn check_pohozaev(exp: &Experiment) -> Result<Outcome> {
    let mesh = build_mesh(exp)?;
    let r = solve_dirichlet(&mesh, &exp.gauge, &exp.source, &exp.config.solver)?;
    let rep = pohozaev_residual(&r.field, &exp.gauge, &exp.source)?;
    let budget = |r: &PohozaevReport| exp.bounds.tolerance(&mesh, r.budget_scale());
    let mut checks = vec![equality_row(exp, "pohozaev_identity", rep.lhs, rep.rhs_boundary, budget(&rep))];

    let mut results = json!({
        "solution": {"max": r.field.max(), "min": r.field.min(), "iterations": r.iterations, "pde_residual": r.pde_residual},
        "pohozaev": to_value(&rep),
        "star_shape_margin": exp.polygon.star_shape_margin(),
        "nonexistence": to_value(&nonexistence_predicate(2, exp.p, exp.b, &exp.source)),
    });
    match classic_pohozaev_residual(&r.field, &exp.gauge, &exp.source) {
        Ok(c) => {
            checks.push(equality_row(exp, "classical_pohozaev_identity", c.lhs, c.rhs_boundary, budget(&c)));
            results["classical_pohozaev"] = to_value(&c);
        }
        Err(Error::WrongRegime(why)) => results["classical_pohozaev"] = json!({"skipped": why}),
        Err(e) => return Err(e),
    }
    let plain_torsion = exp.p == 2.0 && exp.b == 0.0 && exp.source == SourceSpec::torsion(2.0);
    if plain_torsion && exp.gauge.family() == GaugeFamily::Euclidean {
        results["serrin"] = to_value(&serrin_constant(&r.field));
    }
    let ok = checks.iter().all(|c| c.satisfied);
    Ok(Outcome { results, files: vec![("field.csv", r.field.to_csv())], checks, ok, mesh: Some(mesh.stats()) })
}

fn check_bounds(exp: &Experiment) -> Result<Outcome> {
    let mesh = build_mesh(exp)?;
    let (gauge, p, opts) = (&exp.gauge, exp.p, &exp.bounds);
    let v = solve_dirichlet(&mesh, gauge, &SourceSpec::torsion(p), &opts.solver)?.field;
    let torsion = v.integrate_with(|_, u, _| u);
    let kappa = gauge.wulff_volume(opts.directions)?.kappa_n;
    let mut checks = Vec::new();
    let mut results = json!({"torsional_rigidity": torsion, "kappa": kappa, "volume": mesh.total_area()});

    if gauge.hessian_positive_definite(p, 360) {
        let lambda = solve_eigen(&mesh, gauge, p, &opts.solver)?.lambda;
        let r = eigen_torsion_bound(lambda, torsion, mesh.total_area(), kappa, p, opts.tolerance(&mesh, 1.0));
        results["eigen_torsion"] = json!({"lambda": lambda, "report": to_value(&r)});
        checks.push(row(exp, "eigen_torsion", &r));
    } else {
        results["eigen_torsion"] = json!({"skipped": "Hessian of F^p is not positive definite"});
    }

    let mu = check_mu_decay(&v, gauge, p, opts)?;
    if let Some(worst) = mu.reports.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)) {
        checks.push(row(exp, "mu_decay", &worst_of(worst, mu.satisfied)));
    }
    results["mu_decay"] = json!({"a": mu.a, "b": mu.b, "satisfied": mu.satisfied});

    let (profile, wulff) = check_wulff(&v, gauge, opts)?;
    if let Some(w) = wulff.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)) {
        let tol = opts.tolerance(&mesh, 1.0);
        let r = anisolab_core::BoundReport::at_least(w.perim_f, w.bound, tol);
        checks.push(row(exp, "wulff_levels", &worst_of(&r, wulff.iter().all(|l| l.satisfied))));
    }

    if p == 2.0 {
        match check_n_laplace_inequality(&mesh, gauge, &exp.source, opts) {
            Ok(c) => {
                checks.push(row(exp, "n_laplace", &c.report));
                results["n_laplace"] = to_value(&c);
            }
            Err(Error::WrongRegime(why) | Error::HypothesisViolated(why)) => results["n_laplace"] = json!({"skipped": why}),
            Err(e) => return Err(e),
        }
    }

    let mut levels = String::from("s,mu,mu_bound,perim_F,wulff_bound,wulff_slack\n");
    for (i, w) in wulff.iter().enumerate() {
        let _ = writeln!(
            levels,
            "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
            w.s, profile.mu[i], mu.reports[i].rhs, w.perim_f, w.bound, w.slack
        );
    }
    let ok = checks.iter().all(|c| c.satisfied);
    Ok(Outcome { results, files: vec![("field.csv", v.to_csv()), ("levels.csv", levels)], checks, ok, mesh: Some(mesh.stats()) })
}

/// The tightest level, marked unsatisfied if any level failed.
fn worst_of(r: &anisolab_core::BoundReport, all_satisfied: bool) -> anisolab_core::BoundReport {
    anisolab_core::BoundReport { satisfied: r.satisfied && all_satisfied, ..*r }
}

fn spaceform_report(exp: &Experiment) -> Result<Outcome> {
    let sf = &exp.config.spaceform;
    let rows = spaceform::sweep(&sf.n, &sf.kappa, &sf.theta, sf.grid, sf.g_const)?;
    let first = sf
        .n
        .iter()
        .flat_map(|&n| sf.kappa.iter().flat_map(move |&k| sf.theta.iter().map(move |&t| (n, k, t))))
        .find_map(|(n, k, t)| SpaceformBall::with_grid(n, k, t, sf.grid).ok());
    let mut files = vec![("suite.csv", spaceform::sweep_csv(&rows))];
    if let Some(ball) = first {
        files.push(("field.csv", solve_radial_torsion(&ball)?.to_csv()));
    }
    let ok = rows.iter().all(|r| r.satisfied);
    Ok(Outcome { results: json!({ "rows": to_value(&rows) }), files, checks: Vec::new(), ok, mesh: None })
}

fn wulff_info(exp: &Experiment) -> Result<Outcome> {
    let g = &exp.gauge;
    let info = g.wulff_volume(DEFAULT_DIRECTIONS)?;
    let (alpha, beta) = g.norm_bounds(DEFAULT_DIRECTIONS);
    let mut boundary = String::from("x,y\n");
    for k in 0..360 {
        let t = (k as f64).to_radians();
        let d = [t.cos(), t.sin()];
        let r = g.polar(&d);
        let _ = writeln!(boundary, "{:.11e},{:.11e}", d[0] / r, d[1] / r);
    }
    let results = json!({
        "gauge": g.name(),
        "kappa_n": info.kappa_n,
        "omega_k": info.omega_k,
        "norm_bounds": [alpha, beta],
        "p": exp.p,
        "hessian_positive_definite": g.hessian_positive_definite(exp.p, 360),
    });
    Ok(Outcome { results, files: vec![("field.csv", boundary)], checks: Vec::new(), ok: true, mesh: None })
}
