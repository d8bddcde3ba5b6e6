use std::path::{Path, PathBuf};

use anisolab_core::bounds::BoundOptions;
use anisolab_core::solver::{ConstTerm, PowerTerm, SolverOptions, SourceSpec};
use anisolab_core::spaceform::{SpaceformBall, DEFAULT_GRID};
use anisolab_core::{Gauge, Polygon};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveTorsion,
    SolveEigen,
    CheckPohozaev,
    CheckBounds,
    SpaceformReport,
    WulffInfo,
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::SolveTorsion => "solve-torsion",
            Self::SolveEigen => "solve-eigen",
            Self::CheckPohozaev => "check-pohozaev",
            Self::CheckBounds => "check-bounds",
            Self::SpaceformReport => "spaceform-report",
            Self::WulffInfo => "wulff-info",
            Self::Suite => "suite",
        }
    }
}

/// A gauge given either by name, `"ellipse(2,1)"`, or as a structured spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GaugeInput {
    Name(String),
    Spec(serde_json::Value),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Name(String),
    Named {
        name: String,
        #[serde(default)]
        translate: Option<[f64; 2]>,
        #[serde(default)]
        scale: Option<f64>,
    },
    Vertices {
        vertices: Vec<[f64; 2]>,
        #[serde(default)]
        translate: Option<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    #[serde(default)]
    pub terms: Vec<PowerTerm>,
    #[serde(default)]
    pub constant: Option<ConstTerm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub target_h: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { target_h: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub tolerance_c: f64,
    pub levels: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { tolerance_c: 0.5, levels: 200 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceformConfig {
    pub n: Vec<usize>,
    pub kappa: Vec<f64>,
    pub theta: Vec<f64>,
    pub grid: usize,
    pub g_const: f64,
}

impl Default for SpaceformConfig {
    fn default() -> Self {
        Self { n: vec![2, 3, 4], kappa: vec![-1.0, 0.0, 1.0], theta: vec![0.5, 1.0, 2.0], grid: DEFAULT_GRID, g_const: 1.0 }
    }
}

fn default_p() -> f64 {
    2.0
}

/// One experiment file. Every field has a default, so `{}` is a valid config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub gauge: Option<GaugeInput>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub source: Option<SourceConfig>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub spaceform: SpaceformConfig,
    /// Experiment files run by `suite`, relative to this file.
    #[serde(default)]
    pub experiments: Vec<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

/// Command-line switches that refine a config.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub strict: bool,
    pub refine: usize,
}

/// A config with every parameter checked against the module preconditions.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub command: Command,
    pub config: ExperimentConfig,
    pub gauge: Gauge,
    pub domain_label: String,
    pub polygon: Polygon,
    pub p: f64,
    pub b: f64,
    /// The configured source, or `g ≡ 1` when none is given.
    pub source: SourceSpec,
    pub source_given: bool,
    pub target_h: f64,
    pub refine: usize,
    pub bounds: BoundOptions,
    pub suite_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse_gauge(input: Option<&GaugeInput>) -> Result<Gauge, CliError> {
    let gauge = match input {
        None => Gauge::euclidean(2),
        Some(GaugeInput::Name(name)) => name.parse(),
        Some(GaugeInput::Spec(v)) => serde_json::from_value::<Gauge>(v.clone()).map_err(|e| anisolab_core::Error::InvalidGauge(e.to_string())),
    };
    gauge.map_err(|e| CliError::Config(e.to_string()))
}

pub fn parse_domain(spec: Option<&DomainSpec>) -> Result<(String, Polygon), CliError> {
    let cfg = |e: anisolab_core::Error| CliError::Config(e.to_string());
    let shift = |poly: Polygon, by: Option<[f64; 2]>| match by {
        Some(v) if v.iter().all(|x| x.is_finite()) => Ok(poly.translated(v)),
        Some(v) => Err(CliError::Config(format!("non-finite translation {v:?}"))),
        None => Ok(poly),
    };
    match spec {
        None => Ok(("unit_disk_64".into(), Polygon::unit_disk(64).map_err(cfg)?)),
        Some(DomainSpec::Name(name)) => Ok((name.clone(), Polygon::from_name(name).map_err(cfg)?)),
        Some(DomainSpec::Named { name, translate, scale }) => {
            let mut poly = Polygon::from_name(name).map_err(cfg)?;
            if let Some(s) = scale {
                poly = poly.scaled(*s).map_err(cfg)?;
            }
            Ok((name.clone(), shift(poly, *translate)?))
        }
        Some(DomainSpec::Vertices { vertices, translate }) => {
            Ok((format!("polygon_{}", vertices.len()), shift(Polygon::new(vertices.clone()).map_err(cfg)?, *translate)?))
        }
    }
}

/// Validates `config` for `command` (which must agree with the config's own
/// command, if it names one).
pub fn validate(command: Command, config: ExperimentConfig, overrides: Overrides, dir: &Path) -> Result<Experiment, CliError> {
    let bad = |msg: String| Err(CliError::Config(msg));
    if let Some(c) = config.command {
        if c != command {
            return bad(format!("config is for {} but {} was requested", c.name(), command.name()));
        }
    }
    let gauge = parse_gauge(config.gauge.as_ref())?;
    if gauge.dim() != 2 {
        return bad(format!("planar experiments need a two-dimensional gauge, got dimension {}", gauge.dim()));
    }
    let (domain_label, polygon) = parse_domain(config.domain.as_ref())?;
    let (p, b) = (config.p, config.b);
    if !(p >= 2.0 && p.is_finite()) {
        return bad(format!("p must be a finite number ≥ 2, got {p}"));
    }
    let source_given = config.source.is_some();
    let uses_source = matches!(command, Command::CheckPohozaev | Command::CheckBounds | Command::Suite);
    if source_given && !uses_source {
        return bad(format!("{} does not take a source", command.name()));
    }
    if b != 0.0 && matches!(command, Command::SolveEigen | Command::CheckBounds) {
        return bad(format!("{} is unweighted; b must be 0", command.name()));
    }
    let source = match &config.source {
        Some(s) => SourceSpec { terms: s.terms.clone(), constant: s.constant, weight_b: b, p },
        None => SourceSpec::torsion(p).with_weight_b(b),
    };
    source.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let target_h = config.mesh.target_h;
    if !(target_h > 0.0 && target_h.is_finite()) {
        return bad(format!("mesh target_h must be positive, got {target_h}"));
    }
    if target_h < 1e-3 * polygon.diameter() {
        return bad(format!("mesh target_h {target_h} is too small for this domain"));
    }
    let s = &config.solver;
    if !(s.tol > 0.0 && s.energy_tol >= 0.0 && s.eigen_tol > 0.0 && s.max_iters > 0 && s.eigen_max_iters > 0) {
        return bad(format!("solver tolerances and iteration limits must be positive: {s:?}"));
    }
    let bc = &config.bounds;
    if !(bc.tolerance_c >= 0.0 && bc.tolerance_c.is_finite()) || bc.levels < 2 {
        return bad(format!("bounds need tolerance_c ≥ 0 and at least 2 levels: {bc:?}"));
    }
    if overrides.refine > 4 {
        return bad(format!("--refine {} exceeds the limit of 4", overrides.refine));
    }
    if command == Command::SpaceformReport || command == Command::Suite {
        let sf = &config.spaceform;
        if sf.n.is_empty() || sf.kappa.is_empty() || sf.theta.is_empty() {
            return bad("spaceform grid lists must be nonempty".into());
        }
        if !(sf.g_const >= 0.0 && sf.g_const.is_finite()) {
            return bad(format!("spaceform g_const must be nonnegative, got {}", sf.g_const));
        }
        for &n in &sf.n {
            for &k in &sf.kappa {
                for &t in &sf.theta {
                    match SpaceformBall::with_grid(n, k, t, sf.grid) {
                        Ok(_) | Err(anisolab_core::Error::InvalidRadius { .. }) => {}
                        Err(e) => return bad(e.to_string()),
                    }
                }
            }
        }
    }
    let bounds = BoundOptions {
        tolerance_c: bc.tolerance_c,
        strict: overrides.strict,
        levels: bc.levels,
        solver: config.solver.clone(),
        ..BoundOptions::default()
    };
    Ok(Experiment {
        command,
        gauge,
        domain_label,
        polygon,
        p,
        b,
        source,
        source_given,
        target_h,
        refine: overrides.refine,
        bounds,
        suite_dir: dir.to_path_buf(),
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> ExperimentConfig {
        serde_json::from_str(json).unwrap()
    }

    fn check(command: Command, json: &str) -> Result<Experiment, CliError> {
        validate(command, parse(json), Overrides::default(), Path::new("."))
    }

    #[test]
    fn defaults() {
        let e = check(Command::SolveTorsion, "{}").unwrap();
        assert_eq!(e.domain_label, "unit_disk_64");
        assert_eq!(e.gauge, Gauge::euclidean(2).unwrap());
        assert_eq!(e.p, 2.0);
        assert_eq!(e.source, SourceSpec::torsion(2.0));
        assert!(!e.source_given);
    }

    #[test]
    fn gauge_and_domain_forms() {
        let e = check(
            Command::CheckBounds,
            r#"{"gauge": "ellipse(2,1)", "domain": {"name": "square(2)", "translate": [0.5, 0]}, "p": 2.5}"#,
        )
        .unwrap();
        assert_eq!(e.gauge, Gauge::ellipse(2.0, 1.0).unwrap());
        assert!(e.polygon.vertices().iter().any(|v| v[0] == 1.5));
        let e = check(Command::CheckBounds, r#"{"gauge": {"family": "lp_norm", "q": 3}, "domain": {"vertices": [[0,0],[1,0],[0,1]]}}"#)
            .unwrap();
        assert_eq!(e.gauge, Gauge::lp_norm(3.0, 2).unwrap());
        assert_eq!(e.domain_label, "polygon_3");
    }

    #[test]
    fn rejections() {
        for json in [
            r#"{"gauge": "hexagon"}"#,
            r#"{"gauge": "ellipse(-1,1)"}"#,
            r#"{"domain": "triangle"}"#,
            r#"{"p": 1.5}"#,
            r#"{"b": 1.0}"#,
            r#"{"mesh": {"target_h": 0}}"#,
            r#"{"solver": {"tol": -1}}"#,
            r#"{"source": {"terms": [{"coef": 1, "power": 0.5}]}}"#,
            r#"{"command": "solve-eigen"}"#,
            r#"{"bounds": {"levels": 1}}"#,
            r#"{"source": {"constant": {"coef": 2}}}"#,
        ] {
            assert!(check(Command::SolveTorsion, json).is_err(), "{json}");
        }
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"unknown": 1}"#).is_err());
        assert!(check(Command::SolveEigen, r#"{"b": 0.2}"#).is_err());
        assert!(check(Command::CheckPohozaev, r#"{"b": 0.2, "source": {"constant": {"coef": 2}}}"#).is_ok());
        assert!(check(Command::SpaceformReport, r#"{"spaceform": {"n": [1]}}"#).is_err());
        assert!(check(Command::SpaceformReport, r#"{"spaceform": {"kappa": [1], "theta": [4]}}"#).is_ok());
    }
}
