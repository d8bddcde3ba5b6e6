use std::fmt::Write as _;
use std::path::Path;

use anisolab_core::BoundReport;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// One compared inequality or identity, as written to `suite.csv`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckRow {
    pub domain: String,
    pub gauge: String,
    pub p: f64,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

impl CheckRow {
    pub fn from_bound(domain: &str, gauge: &str, p: f64, check: &str, r: &BoundReport) -> Self {
        Self {
            domain: domain.into(),
            gauge: gauge.into(),
            p,
            check: check.into(),
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            tolerance: r.tolerance_used,
            satisfied: r.satisfied,
        }
    }
}

pub fn checks_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("domain,gauge,p,check,lhs,rhs,slack,tolerance,satisfied\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{:.11e},{:.11e},{:.11e},{:.11e},{}",
            r.domain, r.gauge, r.p, r.check, r.lhs, r.rhs, r.slack, r.tolerance, r.satisfied
        );
    }
    out
}

/// Rounds every float in `value` to 12 significant digits.
pub fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            if let Some(r) = serde_json::Number::from_f64(rounded) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Serializes `report` with rounded floats and writes it to `dir/report.json`.
pub fn write_report(dir: &Path, report: &Value) -> Result<(), CliError> {
    let mut report = report.clone();
    round_floats(&mut report);
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(dir, "report.json", &(text + "\n"))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
