use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn anisolab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_anisolab"));
    cmd.args(args).env_remove("ANISOLAB_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn run(command: &str, json: &str, extra: &[&str]) -> (TempDir, Output) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "exp.json", json);
    let out = tmp.path().join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let output = anisolab(&args, &[]);
    (tmp, output)
}

fn report(tmp: &TempDir) -> Value {
    serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn solve_torsion_on_disk() {
    let (tmp, out) = run("solve-torsion", r#"{"domain": "unit_disk_64", "p": 2, "mesh": {"target_h": 0.05}}"#, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp);
    let t = r["results"]["torsional_rigidity"].as_f64().unwrap();
    let pi8 = std::f64::consts::PI / 8.0;
    assert!((0.97 * pi8..=1.03 * pi8).contains(&t), "{t}");
    assert_eq!(r["status"], "ok");
    assert!(r.get("wall_seconds").is_none());
    for f in ["field.csv", "levels.csv", "timing.json"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f}");
    }
    let field = std::fs::read_to_string(tmp.path().join("out/field.csv")).unwrap();
    assert!(field.starts_with("x,y,u\n"));
}

#[test]
fn reports_are_byte_stable() {
    let json = r#"{"domain": "square(2)", "gauge": "ellipse(2,1)", "p": 2.5, "mesh": {"target_h": 0.15}}"#;
    let (a, _) = run("check-bounds", json, &[]);
    let (b, _) = run("check-bounds", json, &[]);
    for f in ["report.json", "levels.csv", "field.csv"] {
        let read = |t: &TempDir| std::fs::read(t.path().join("out").join(f)).unwrap();
        assert_eq!(read(&a), read(&b), "{f}");
    }
}

#[test]
fn wulff_info_reports_kappa() {
    let (tmp, out) = run("wulff-info", r#"{"gauge": "ellipse(2,1)"}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let k = report(&tmp)["results"]["kappa_n"].as_f64().unwrap();
    assert!((k / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-6, "{k}");
}

#[test]
fn invalid_configs_exit_two_without_report() {
    for (command, json) in [
        ("solve-torsion", r#"{"gauge": "hexagon(1)"}"#),
        ("solve-torsion", r#"{"p": 1.2}"#),
        ("solve-torsion", r#"{"command": "solve-eigen"}"#),
        ("solve-torsion", r#"{"domain": "square(2)", "surprise": true}"#),
        ("solve-torsion", "not json"),
    ] {
        let (tmp, out) = run(command, json, &[]);
        assert_eq!(out.status.code(), Some(2), "{json}");
        assert!(!tmp.path().join("out/report.json").exists());
    }
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let out = anisolab(&["wulff-info", "--out", out_dir.to_str().unwrap()], &[("ANISOLAB_THREADS", "many")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_one_with_report() {
    let (tmp, out) = run("solve-torsion", r#"{"p": 3, "mesh": {"target_h": 0.2}, "solver": {"max_iters": 1, "newton": false}}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&tmp);
    assert_eq!(r["status"], "failed");
    assert!(r["error"].as_str().unwrap().contains("did not converge"));
}

#[test]
fn pohozaev_check_and_refinement() {
    let json = r#"{"domain": "unit_disk_64", "mesh": {"target_h": 0.1}}"#;
    let (tmp, out) = run("check-pohozaev", json, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r0 = report(&tmp);
    let checks = r0["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!((r0["results"]["serrin"]["c_sq"].as_f64().unwrap() / 0.25 - 1.0).abs() < 0.03);
    assert_eq!(r0["results"]["nonexistence"]["verdict"], "INCONCLUSIVE");

    let (tmp, _) = run("check-pohozaev", json, &["--refine", "1"]);
    let r1 = report(&tmp);
    let h = |r: &Value| r["mesh"]["h_max"].as_f64().unwrap();
    assert!((h(&r1) / h(&r0) - 0.5).abs() < 1e-12);
    let res = |r: &Value| r["results"]["pohozaev"]["rel_residual"].as_f64().unwrap();
    assert!(res(&r1) < res(&r0));

    let (_, strict) = run("check-pohozaev", json, &["--strict"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn absorption_source_gives_zero_solution() {
    let json = r#"{"domain": "square(2)", "mesh": {"target_h": 0.2}, "source": {"terms": [{"coef": -1, "power": 4}]}}"#;
    let (tmp, out) = run("check-pohozaev", json, &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&tmp);
    assert_eq!(r["results"]["solution"]["max"], 0.0);
    assert_eq!(r["results"]["nonexistence"]["verdict"], "NONEXISTENCE");
}

#[test]
fn spaceform_report_writes_sweep() {
    let (tmp, out) = run("spaceform-report", r#"{"spaceform": {"n": [2, 3], "kappa": [0, 1], "theta": [1.0, 3.5]}}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("out/suite.csv")).unwrap();
    assert!(csv.starts_with("n,kappa,theta,check,lhs,rhs,slack,satisfied\n"));
    assert!(!csv.contains(",1,3.5,"));
    assert!(std::fs::read_to_string(tmp.path().join("out/field.csv")).unwrap().starts_with("r,u,u_prime,u_double_prime\n"));
}

#[test]
fn suite_of_experiment_files() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "torsion.json", r#"{"command": "solve-torsion", "mesh": {"target_h": 0.15}}"#);
    write_config(tmp.path(), "bounds.json", r#"{"command": "check-bounds", "domain": "square(2)", "mesh": {"target_h": 0.15}}"#);
    let suite = write_config(tmp.path(), "suite.json", r#"{"experiments": ["torsion.json", "bounds.json"]}"#);
    let out = tmp.path().join("out");
    let o = anisolab(&["suite", "--config", suite.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("ANISOLAB_THREADS", "2")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("torsion/report.json").exists());
    assert!(out.join("bounds/levels.csv").exists());
    let csv = std::fs::read_to_string(out.join("suite.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(csv.contains(",eigen_torsion,"));
}

#[test]
fn default_suite_passes_on_coarse_meshes() {
    let (tmp, out) = run("suite", r#"{"mesh": {"target_h": 0.1}}"#, &[]);
    let table = String::from_utf8_lossy(&out.stdout).into_owned();
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(table.lines().all(|l| l.starts_with("PASS")));
    let csv = std::fs::read_to_string(tmp.path().join("out/suite.csv")).unwrap();
    assert!(csv.contains("unit_disk_64,\"ellipse(2,1)\",3,eigen_torsion"));
    assert!(csv.contains("ball(n=2,kappa=1,theta=1),\"riemannian\",2,reilly"));
}
