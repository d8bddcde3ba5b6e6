//! Quantitative inequalities on planar domains: the eigenvalue–torsion bound,
//! the decay of the distribution function of the torsion function, and the
//! anisotropic n-Laplace inequality for n = p = 2.
//!
//! Every comparison carries a tolerance `C · h_max · scale`, where `scale` is
//! the magnitude of the compared quantities; strict mode sets it to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{uniform_levels, LevelProfile, ScalarField, WulffLevel};
use crate::gauge::{Gauge, DEFAULT_DIRECTIONS};
use crate::mesh::TriMesh;
use crate::solver::{solve_dirichlet, solve_eigen, solve_torsion, SolverOptions, SourceSpec};

const N: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundOptions {
    pub tolerance_c: f64,
    pub strict: bool,
    pub levels: usize,
    pub directions: usize,
    pub solver: SolverOptions,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self { tolerance_c: 0.5, strict: false, levels: 200, directions: DEFAULT_DIRECTIONS, solver: SolverOptions::default() }
    }
}

impl BoundOptions {
    /// `C · h_max · scale`, or zero in strict mode.
    pub fn tolerance(&self, mesh: &TriMesh, scale: f64) -> f64 {
        if self.strict { 0.0 } else { self.tolerance_c * mesh.h_max() * scale }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    /// Distance to violation: positive when the inequality holds.
    pub slack: f64,
    pub satisfied: bool,
    pub tolerance_used: f64,
}

impl BoundReport {
    /// Report for `lhs ≤ rhs`.
    pub fn at_most(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::from_slack(lhs, rhs, rhs - lhs, tolerance)
    }

    /// Report for `lhs ≥ rhs`.
    pub fn at_least(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self::from_slack(lhs, rhs, lhs - rhs, tolerance)
    }

    fn from_slack(lhs: f64, rhs: f64, slack: f64, tolerance: f64) -> Self {
        Self { lhs, rhs, slack, satisfied: slack >= -tolerance, tolerance_used: tolerance }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenTorsionCheck {
    pub report: BoundReport,
    pub lambda: f64,
    pub torsion: f64,
    pub volume: f64,
    pub kappa: f64,
    pub p: f64,
}

/// Coefficient of `T / |Ω|^{1 + p/(n(p−1))}` in the eigenvalue–torsion bound.
pub fn eigen_torsion_constant(p: f64, kappa: f64) -> f64 {
    let q = p / (p - 1.0);
    p.powf((2.0 * p - 3.0) / (p - 1.0)) * (N * kappa.powf(1.0 / N)).powf(q)
        / (N * (p - 1.0) * (N * (p - 1.0) + p))
}

/// `λ T^{p−1} / |Ω|^{p−1} ≤ 1 − c(p, κ) T / |Ω|^{1 + p/(n(p−1))}` from precomputed quantities.
pub fn eigen_torsion_bound(lambda: f64, torsion: f64, volume: f64, kappa: f64, p: f64, tolerance_c_h: f64) -> BoundReport {
    let lhs = lambda * torsion.powf(p - 1.0) / volume.powf(p - 1.0);
    let rhs = 1.0 - eigen_torsion_constant(p, kappa) * torsion / volume.powf(1.0 + p / (N * (p - 1.0)));
    BoundReport::at_most(lhs, rhs, tolerance_c_h * lhs.abs().max(rhs.abs()))
}

/// Solves the eigenvalue and torsion problems on `mesh` and compares them.
pub fn check_eigen_torsion_bound(mesh: &TriMesh, gauge: &Gauge, p: f64, opts: &BoundOptions) -> Result<EigenTorsionCheck> {
    if !gauge.hessian_positive_definite(p, 360) {
        return Err(Error::HypothesisViolated(format!("Hessian of F^p is not positive definite for {}", gauge.name())));
    }
    let kappa = gauge.wulff_volume(opts.directions)?.kappa_n;
    let eigen = solve_eigen(mesh, gauge, p, &opts.solver)?;
    let torsion = solve_torsion(mesh, gauge, p, &opts.solver)?.field.integrate_with(|_, u, _| u);
    let volume = mesh.total_area();
    let report = eigen_torsion_bound(eigen.lambda, torsion, volume, kappa, p, opts.tolerance(mesh, 1.0));
    Ok(EigenTorsionCheck { report, lambda: eigen.lambda, torsion, volume, kappa, p })
}

#[derive(Clone, Debug, Serialize)]
pub struct MuDecayCheck {
    /// Exponent `n(p−1)/p`.
    pub a: f64,
    /// Rate `(nκ^{1/n})^{p/(p−1)} · p/(n(p−1)) · |Ω|^{−1/a}`.
    pub b: f64,
    pub volume: f64,
    pub kappa: f64,
    pub levels: Vec<f64>,
    /// `μ(s) ≤ |Ω|(1 − b s)₊^a` per level.
    pub reports: Vec<BoundReport>,
    pub satisfied: bool,
}

/// Compares a distribution function with `|Ω|(1 − b s)₊^a`; the tolerance
/// scale is `|Ω|` at every level.
pub fn mu_decay_bound(profile: &LevelProfile, volume: f64, kappa: f64, p: f64, tolerance_c_h: f64) -> MuDecayCheck {
    let a = N * (p - 1.0) / p;
    let b = (N * kappa.powf(1.0 / N)).powf(p / (p - 1.0)) * p / (N * (p - 1.0)) * volume.powf(-1.0 / a);
    let tol = tolerance_c_h * volume;
    let reports: Vec<BoundReport> = profile
        .levels
        .iter()
        .zip(&profile.mu)
        .map(|(&s, &mu)| BoundReport::at_most(mu, volume * (1.0 - b * s).max(0.0).powf(a), tol))
        .collect();
    let satisfied = reports.iter().all(|r| r.satisfied);
    MuDecayCheck { a, b, volume, kappa, levels: profile.levels.clone(), reports, satisfied }
}

/// Distribution function of a torsion solution against its decay bound.
pub fn check_mu_decay(torsion: &ScalarField<'_>, gauge: &Gauge, p: f64, opts: &BoundOptions) -> Result<MuDecayCheck> {
    let kappa = gauge.wulff_volume(opts.directions)?.kappa_n;
    let mesh = torsion.mesh();
    let profile = torsion.distribution_function(gauge, &uniform_levels(torsion.max(), opts.levels));
    Ok(mu_decay_bound(&profile, mesh.total_area(), kappa, p, opts.tolerance(mesh, 1.0)))
}

/// Wulff comparison `P_F({u > s}) ≥ 2κ^{1/2}μ(s)^{1/2}` on the default level
/// grid with the absolute tolerance `C · h_max`.
pub fn check_wulff(field: &ScalarField<'_>, gauge: &Gauge, opts: &BoundOptions) -> Result<(LevelProfile, Vec<WulffLevel>)> {
    let kappa = gauge.wulff_volume(opts.directions)?.kappa_n;
    let profile = field.distribution_function(gauge, &uniform_levels(field.max(), opts.levels));
    let checks = profile.wulff_check(kappa, opts.tolerance(field.mesh(), 1.0));
    Ok((profile, checks))
}

#[derive(Clone, Debug, Serialize)]
pub struct NLaplaceCheck {
    pub report: BoundReport,
    /// `∫ g(u)`.
    pub integral_g: f64,
    /// `∫ G(u)`.
    pub integral_big_g: f64,
    pub kappa: f64,
}

/// `(∫g(u))^{n/(n−1)} ≥ n^{(2n−1)/(n−1)} κ^{1/(n−1)}/(n−1) · ∫G(u)` for n = p = 2.
pub fn check_n_laplace_inequality(mesh: &TriMesh, gauge: &Gauge, src: &SourceSpec, opts: &BoundOptions) -> Result<NLaplaceCheck> {
    if src.p != N {
        return Err(Error::WrongRegime(format!("the n-Laplace inequality needs p = n = 2, got p = {}", src.p)));
    }
    if src.weight_b != 0.0 || src.terms.iter().any(|t| t.weight_exp != 0.0) || src.constant.is_some_and(|c| c.weight_exp != 0.0) {
        return Err(Error::WrongRegime("the n-Laplace inequality needs an autonomous, unweighted source".into()));
    }
    if src.terms.iter().any(|t| t.coef < 0.0) || src.constant.is_some_and(|c| c.coef < 0.0) {
        return Err(Error::HypothesisViolated("g must be nonnegative on [0, ∞)".into()));
    }
    let kappa = gauge.wulff_volume(opts.directions)?.kappa_n;
    let u = solve_dirichlet(mesh, gauge, src, &opts.solver)?.field;
    Ok(n_laplace_bound(&u, src, kappa, opts.tolerance(mesh, 1.0)))
}

/// Both sides of the n-Laplace inequality for a given solution field.
pub fn n_laplace_bound(u: &ScalarField<'_>, src: &SourceSpec, kappa: f64, tolerance_c_h: f64) -> NLaplaceCheck {
    let integral_g = u.integrate_with(|_, v, _| src.g(1.0, v));
    let integral_big_g = u.integrate_with(|_, v, _| src.primitive(1.0, v));
    let lhs = integral_g.powf(N / (N - 1.0));
    let rhs = N.powf((2.0 * N - 1.0) / (N - 1.0)) * kappa.powf(1.0 / (N - 1.0)) / (N - 1.0) * integral_big_g;
    NLaplaceCheck {
        report: BoundReport::at_least(lhs, rhs, tolerance_c_h * lhs.abs().max(rhs.abs())),
        integral_g,
        integral_big_g,
        kappa,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::mesh::{triangulate, Polygon};

    proptest! {
        #[test]
        fn satisfied_iff_slack_within_tolerance(lhs in -1e3f64..1e3, rhs in -1e3f64..1e3, tol in 0.0f64..10.0) {
            let le = BoundReport::at_most(lhs, rhs, tol);
            let ge = BoundReport::at_least(lhs, rhs, tol);
            prop_assert_eq!(le.slack, -ge.slack);
            prop_assert_eq!(le.satisfied, le.slack >= -tol);
            prop_assert_eq!(ge.satisfied, ge.slack >= -tol);
            prop_assert!(le.satisfied || ge.satisfied);
        }
    }

    fn euclid() -> Gauge {
        Gauge::euclidean(2).unwrap()
    }

    fn disk(h: f64) -> TriMesh {
        triangulate(&Polygon::unit_disk(64).unwrap(), h).unwrap()
    }

    #[test]
    fn constant_reduces_to_kappa_at_p2() {
        for kappa in [PI, 2.0 * PI, 0.7] {
            assert!((eigen_torsion_constant(2.0, kappa) - kappa).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_disk_values() {
        let j01_sq = 5.783185962946784;
        let r = eigen_torsion_bound(j01_sq, PI / 8.0, PI, PI, 2.0, 0.0);
        assert!((r.lhs - 0.7229).abs() < 1e-4);
        assert!((r.rhs - 0.875).abs() < 1e-14);
        assert!(r.satisfied);
    }

    #[test]
    fn disk_eigen_torsion() {
        let m = disk(0.04);
        let c = check_eigen_torsion_bound(&m, &euclid(), 2.0, &BoundOptions::default()).unwrap();
        assert!((c.report.lhs / 0.7229 - 1.0).abs() < 0.01, "{c:?}");
        assert!((c.report.rhs / 0.875 - 1.0).abs() < 0.01);
        assert!(c.report.satisfied);
    }

    #[test]
    fn gauge_scaling_leaves_slack() {
        let m = disk(0.08);
        let base = check_eigen_torsion_bound(&m, &euclid(), 2.0, &BoundOptions::default()).unwrap();
        let a = 1.6;
        let scaled = check_eigen_torsion_bound(&m, &Gauge::ellipse(a, a).unwrap(), 2.0, &BoundOptions::default()).unwrap();
        assert!((scaled.kappa / (PI * a * a) - 1.0).abs() < 1e-6);
        assert!((scaled.report.slack / base.report.slack - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_non_elliptic_gauge() {
        let m = disk(0.3);
        let g = Gauge::lp_norm(4.0, 2).unwrap();
        assert!(matches!(check_eigen_torsion_bound(&m, &g, 2.0, &BoundOptions::default()), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn disk_mu_decay_is_equality() {
        let m = disk(0.03);
        let v = solve_torsion(&m, &euclid(), 2.0, &SolverOptions::default()).unwrap().field;
        let c = check_mu_decay(&v, &euclid(), 2.0, &BoundOptions::default()).unwrap();
        assert!((c.a - 1.0).abs() < 1e-15);
        assert!((c.b - 4.0 * PI / m.total_area()).abs() < 1e-6);
        assert!(c.satisfied);
        for (s, r) in c.levels.iter().zip(&c.reports) {
            assert!((r.lhs - PI * (1.0 - 4.0 * s)).abs() <= 0.02 * PI, "s={s} {r:?}");
        }
    }

    #[test]
    fn square_mu_decay_is_strict() {
        let sq = triangulate(&Polygon::square(2.0).unwrap(), 0.05).unwrap();
        let v = solve_torsion(&sq, &euclid(), 2.0, &SolverOptions::default()).unwrap().field;
        let c = check_mu_decay(&v, &euclid(), 2.0, &BoundOptions::default()).unwrap();
        assert!(c.satisfied);
        assert!(c.reports[1..40].iter().all(|r| r.slack > 0.0));
    }

    #[test]
    fn n_laplace_disk_and_square() {
        let src = SourceSpec::torsion(2.0);
        let m = disk(0.03);
        let c = check_n_laplace_inequality(&m, &euclid(), &src, &BoundOptions::default()).unwrap();
        assert!((c.report.lhs / (PI * PI) - 1.0).abs() < 0.02);
        assert!((c.report.rhs / (PI * PI) - 1.0).abs() < 0.02);
        assert!(c.report.satisfied);

        let sq = triangulate(&Polygon::square(2.0).unwrap(), 0.05).unwrap();
        let c = check_n_laplace_inequality(&sq, &euclid(), &src, &BoundOptions::default()).unwrap();
        assert!((c.report.lhs - 16.0).abs() < 1e-9);
        assert!((c.report.rhs / (8.0 * PI * 0.5623) - 1.0).abs() < 0.01);
        assert!(c.report.slack >= 4.0 * c.report.tolerance_used);

        let zero = check_n_laplace_inequality(&m, &euclid(), &SourceSpec::constant(0.0, 2.0), &BoundOptions::default()).unwrap();
        assert_eq!((zero.report.lhs, zero.report.rhs), (0.0, 0.0));
        assert!(zero.report.satisfied);

        assert!(matches!(
            check_n_laplace_inequality(&m, &euclid(), &SourceSpec::torsion(3.0), &BoundOptions::default()),
            Err(Error::WrongRegime(_))
        ));
    }

    #[test]
    fn strict_mode_has_zero_tolerance() {
        let m = disk(0.2);
        let opts = BoundOptions { strict: true, ..BoundOptions::default() };
        assert_eq!(opts.tolerance(&m, 10.0), 0.0);
        assert!(BoundOptions::default().tolerance(&m, 1.0) > 0.0);
    }
}
