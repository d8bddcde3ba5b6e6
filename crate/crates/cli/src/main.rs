//! `anisolab <command> --config <file> --out <dir> [--strict] [--refine k]`
//!
//! Writes `report.json` plus the command's CSV tables into `--out` and the
//! wall time into `timing.json`. Exit status: 0 when every requested solve
//! converged and every check held, 1 on solver failure or a violated check,
//! 2 on an invalid configuration (no report is written).

mod commands;
mod config;
mod report;
mod suite;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use config::{Command, Experiment, ExperimentConfig, Overrides};
use report::{to_value, write_file, write_report, CheckRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Parser, Debug)]
#[command(name = "anisolab", version, about = "Anisotropic p-Laplacian numerical laboratory")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Experiment file (JSON); defaults apply to every omitted field.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Compare with zero tolerance instead of `C · h_max`.
    #[arg(long)]
    strict: bool,
    /// Uniform refinements applied after meshing.
    #[arg(long, default_value_t = 0)]
    refine: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let result = execute(&args);
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(ok) => {
            let timing = json!({"command": args.command.name(), "wall_seconds": secs});
            if let Err(e) = write_file(&args.out, "timing.json", &format!("{timing}\n")) {
                eprintln!("anisolab: {e}");
            }
            eprintln!("anisolab: {} {} in {secs:.2} s", args.command.name(), if ok { "passed" } else { "failed" });
            ExitCode::from(if ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("anisolab: {e}");
            ExitCode::from(if matches!(e, CliError::Config(_)) { 2 } else { 1 })
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(var) = std::env::var("ANISOLAB_THREADS") else { return Ok(()) };
    let n: usize = var
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("ANISOLAB_THREADS must be a positive integer, got {var:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn execute(args: &Args) -> Result<bool, CliError> {
    configure_threads()?;
    let overrides = Overrides { strict: args.strict, refine: args.refine };
    let (cfg, dir) = match &args.config {
        Some(path) => (config::load(path)?, path.parent().unwrap_or(Path::new(".")).to_path_buf()),
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    let exp = config::validate(args.command, cfg, overrides, &dir)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", args.out.display())))?;

    if exp.command == Command::Suite {
        let s = suite::run(&exp, overrides, &args.out)?;
        print!("{}", suite::table(&s.rows));
        write_file(&args.out, "suite.csv", &suite::csv(&s.rows))?;
        let mut report = header(&exp, overrides);
        report["status"] = json!(if s.ok { "ok" } else { "failed" });
        report["results"] = s.report;
        write_report(&args.out, &report)?;
        return Ok(s.ok);
    }
    let (ok, checks) = finish(&exp, overrides, &args.out, commands::run(&exp))?;
    print!("{}", suite::table(&checks));
    Ok(ok)
}

fn header(exp: &Experiment, overrides: Overrides) -> Value {
    json!({
        "command": exp.command.name(),
        "config": to_value(&exp.config),
        "domain": exp.domain_label,
        "gauge": exp.gauge.name(),
        "p": exp.p,
        "b": exp.b,
        "refine": overrides.refine,
        "tolerance": {
            "model": "C * h_max * scale",
            "c": exp.bounds.tolerance_c,
            "strict": overrides.strict,
        },
    })
}

/// Writes the report and files of one experiment into `dir`.
pub fn finish(
    exp: &Experiment,
    overrides: Overrides,
    dir: &Path,
    outcome: anisolab_core::Result<commands::Outcome>,
) -> Result<(bool, Vec<CheckRow>), CliError> {
    let mut report = header(exp, overrides);
    let result = match outcome {
        Ok(o) => {
            report["status"] = json!(if o.ok { "ok" } else { "failed" });
            if let Some(stats) = &o.mesh {
                report["mesh"] = to_value(stats);
                report["tolerance"]["h_max"] = json!(stats.h_max);
            }
            report["results"] = o.results;
            report["checks"] = to_value(&o.checks);
            for (name, contents) in &o.files {
                write_file(dir, name, contents)?;
            }
            (o.ok, o.checks)
        }
        Err(e) => {
            report["status"] = json!("failed");
            report["error"] = json!(e.to_string());
            (false, Vec::new())
        }
    };
    write_report(dir, &report)?;
    Ok(result)
}
