use std::path::{Path, PathBuf};

use anisolab_core::bounds::{check_mu_decay, check_n_laplace_inequality, check_wulff, eigen_torsion_bound, BoundOptions};
use anisolab_core::spaceform;
use anisolab_core::{solve_dirichlet, solve_eigen, triangulate, BoundReport, Gauge, Polygon, SourceSpec, TriMesh};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::commands;
use crate::config::{self, Command, Experiment, Overrides};
use crate::report::{checks_csv, to_value, CheckRow};
use crate::{finish, CliError};

pub struct SuiteResult {
    pub report: Value,
    pub rows: Vec<CheckRow>,
    pub ok: bool,
}

/// Runs the experiments listed by the suite config, or the built-in matrix
/// when the list is empty.
pub fn run(exp: &Experiment, overrides: Overrides, out: &Path) -> Result<SuiteResult, CliError> {
    if exp.config.experiments.is_empty() {
        Ok(default_matrix(exp))
    } else {
        experiments(exp, overrides, out)
    }
}

fn experiments(exp: &Experiment, overrides: Overrides, out: &Path) -> Result<SuiteResult, CliError> {
    let mut jobs: Vec<(String, Experiment)> = Vec::new();
    for rel in &exp.config.experiments {
        let path: PathBuf = exp.suite_dir.join(rel);
        let cfg = config::load(&path)?;
        let command = cfg.command.ok_or_else(|| CliError::Config(format!("{} does not name a command", path.display())))?;
        if command == Command::Suite {
            return Err(CliError::Config(format!("{} is itself a suite", path.display())));
        }
        let dir = path.parent().unwrap_or(Path::new("."));
        let name = path.file_stem().map_or_else(|| format!("experiment_{}", jobs.len()), |s| s.to_string_lossy().into_owned());
        if jobs.iter().any(|(n, _)| *n == name) {
            return Err(CliError::Config(format!("two experiments share the name {name}")));
        }
        jobs.push((name, config::validate(command, cfg, overrides, dir)?));
    }
    let results: Vec<Result<(bool, Vec<CheckRow>), CliError>> = jobs
        .par_iter()
        .map(|(name, job)| {
            let dir = out.join(name);
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            let outcome = commands::run(job);
            finish(job, overrides, &dir, outcome)
        })
        .collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut ok = true;
    for ((name, job), result) in jobs.iter().zip(results) {
        let (passed, checks) = result?;
        ok &= passed;
        entries.push(json!({"name": name, "command": job.command.name(), "ok": passed}));
        rows.extend(checks);
    }
    Ok(SuiteResult { report: json!({"experiments": entries}), rows, ok })
}

fn default_matrix(exp: &Experiment) -> SuiteResult {
    let domains: Vec<(&str, Polygon)> = ["unit_disk_64", "square(2)", "ellipse_64(2,1)"]
        .into_iter()
        .map(|name| (name, Polygon::from_name(name).expect("built-in domain")))
        .collect();
    let gauges = [Gauge::euclidean(2).expect("built-in gauge"), Gauge::ellipse(2.0, 1.0).expect("built-in gauge")];
    let meshes: Vec<Result<TriMesh, String>> = domains
        .par_iter()
        .map(|(_, poly)| {
            let mut m = triangulate(poly, exp.target_h).map_err(|e| e.to_string())?;
            for _ in 0..exp.refine {
                m = m.refine_uniform();
            }
            Ok(m)
        })
        .collect();

    let mut jobs = Vec::new();
    for (d, (name, _)) in domains.iter().enumerate() {
        for g in &gauges {
            for p in [2.0, 2.5, 3.0] {
                jobs.push((d, *name, g.clone(), p));
            }
        }
    }
    let per_job: Vec<(Vec<CheckRow>, Vec<String>)> = jobs
        .par_iter()
        .map(|(d, name, g, p)| match &meshes[*d] {
            Ok(m) => planar_rows(m, name, g, *p, &exp.bounds),
            Err(e) => (Vec::new(), vec![format!("{name}: mesh generation failed: {e}")]),
        })
        .collect();

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (r, e) in per_job {
        rows.extend(r);
        errors.extend(e);
    }
    let sf = &exp.config.spaceform;
    match spaceform::sweep(&sf.n, &sf.kappa, &sf.theta, sf.grid, sf.g_const) {
        Ok(sweep) => rows.extend(sweep.into_iter().map(|s| CheckRow {
            domain: format!("ball(n={},kappa={},theta={})", s.n, s.kappa, s.theta),
            gauge: "riemannian".into(),
            p: 2.0,
            check: s.check.into(),
            lhs: s.lhs,
            rhs: s.rhs,
            slack: s.slack,
            tolerance: 0.0,
            satisfied: s.satisfied,
        })),
        Err(e) => errors.push(format!("space-form sweep failed: {e}")),
    }
    let ok = errors.is_empty() && rows.iter().all(|r| r.satisfied);
    let failed: Vec<Value> = rows.iter().filter(|r| !r.satisfied).map(to_value).collect();
    SuiteResult { report: json!({"rows": rows.len(), "failed": failed, "errors": errors}), rows, ok }
}

fn planar_rows(mesh: &TriMesh, domain: &str, gauge: &Gauge, p: f64, opts: &BoundOptions) -> (Vec<CheckRow>, Vec<String>) {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    let gname = gauge.name();
    let mut push = |check: &str, r: &BoundReport| rows.push(CheckRow::from_bound(domain, &gname, p, check, r));
    let tag = |e: anisolab_core::Error| format!("{domain}/{gname}/p={p}: {e}");

    let src = SourceSpec::torsion(p);
    let v = match solve_dirichlet(mesh, gauge, &src, &opts.solver) {
        Ok(r) => r.field,
        Err(e) => return (rows, vec![tag(e)]),
    };
    let torsion = v.integrate_with(|_, u, _| u);
    let tol = opts.tolerance(mesh, 1.0);

    match gauge.wulff_volume(opts.directions) {
        Ok(info) if gauge.hessian_positive_definite(p, 360) => match solve_eigen(mesh, gauge, p, &opts.solver) {
            Ok(e) => push("eigen_torsion", &eigen_torsion_bound(e.lambda, torsion, mesh.total_area(), info.kappa_n, p, tol)),
            Err(e) => errors.push(tag(e)),
        },
        Ok(_) => {}
        Err(e) => errors.push(tag(e)),
    }
    match check_mu_decay(&v, gauge, p, opts) {
        Ok(mu) => {
            if let Some(w) = mu.reports.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)) {
                push("mu_decay", &BoundReport { satisfied: mu.satisfied, ..*w });
            }
        }
        Err(e) => errors.push(tag(e)),
    }
    match check_wulff(&v, gauge, opts) {
        Ok((_, levels)) => {
            if let Some(w) = levels.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)) {
                let r = BoundReport::at_least(w.perim_f, w.bound, tol);
                push("wulff_levels", &BoundReport { satisfied: levels.iter().all(|l| l.satisfied), ..r });
            }
        }
        Err(e) => errors.push(tag(e)),
    }
    if p == 2.0 {
        match check_n_laplace_inequality(mesh, gauge, &src, opts) {
            Ok(c) => push("n_laplace", &c.report),
            Err(e) => errors.push(tag(e)),
        }
    }
    (rows, errors)
}

/// Human-readable pass/fail table.
pub fn table(rows: &[CheckRow]) -> String {
    let mut out = String::new();
    for r in rows {
        out.push_str(&format!(
            "{} {:<34} {:<14} p={:<4} {:<26} slack {:>12.4e} tol {:>10.3e}\n",
            if r.satisfied { "PASS" } else { "FAIL" },
            r.domain,
            r.gauge,
            r.p,
            r.check,
            r.slack,
            r.tolerance
        ));
    }
    out
}

pub fn csv(rows: &[CheckRow]) -> String {
    checks_csv(rows)
}
