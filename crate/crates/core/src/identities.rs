//! Both sides of the weighted Pohozaev identity, its classical Euclidean
//! form, the Serrin constant of a torsion solution and the sign conditions
//! under which power-law sources admit no positive solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, Weight};
use crate::gauge::{Gauge, GaugeFamily};
use crate::solver::SourceSpec;

const N: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PohozaevReport {
    /// `(1 + b − n/p) ∫ u g(x, u)`.
    pub lhs_term_ug: f64,
    /// `n ∫ G(x, u)`.
    pub lhs_term_g: f64,
    /// `∫ ⟨x, ∇ₓG(x, u)⟩`.
    pub lhs_term_xgrad_g: f64,
    pub lhs: f64,
    /// `(1 − 1/p) ∫_∂Ω |x|^{-bp} F^p(∇u) ⟨x, ν⟩`.
    pub rhs_boundary: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
}

impl PohozaevReport {
    fn new(lhs_term_ug: f64, lhs_term_g: f64, lhs_term_xgrad_g: f64, rhs_boundary: f64) -> Self {
        let lhs = lhs_term_ug + lhs_term_g + lhs_term_xgrad_g;
        let abs_residual = (lhs - rhs_boundary).abs();
        Self {
            lhs_term_ug,
            lhs_term_g,
            lhs_term_xgrad_g,
            lhs,
            rhs_boundary,
            abs_residual,
            rel_residual: abs_residual / (lhs.abs() + rhs_boundary.abs() + 1e-300),
        }
    }

    /// `|lhs| + |rhs|`, the scale multiplying `C h_max` in the residual budget.
    pub fn budget_scale(&self) -> f64 {
        self.lhs.abs() + self.rhs_boundary.abs()
    }
}

/// Evaluates the weighted anisotropic Pohozaev identity for a field solving
/// the Dirichlet problem with source `src` and gauge `gauge`.
///
/// Interior integrals use the centroid rule with `|x|` clamped below at
/// `h_max / 10`; the boundary integral takes each edge's adjacent triangle gradient.
pub fn pohozaev_residual(field: &ScalarField<'_>, gauge: &Gauge, src: &SourceSpec) -> Result<PohozaevReport> {
    src.validate()?;
    let mesh = field.mesh();
    let (p, b) = (src.p, src.weight_b);
    let clamp = Weight::new(mesh, 0.0)?;
    let boundary_weight = Weight::new(mesh, b * p)?;
    let radius = |x: [f64; 2]| clamp.radius(x);

    let ug = field.integrate_with(|x, u, _| u * src.g(radius(x), u));
    let big_g = field.integrate_with(|x, u, _| src.primitive(radius(x), u));
    let xg = field.integrate_with(|x, u, _| src.x_dot_grad_x_primitive(radius(x), u));
    let rhs = mesh.boundary_integral(|e| {
        let grad = field.gradient(e.triangle);
        let x_nu = e.midpoint[0] * e.normal[0] + e.midpoint[1] * e.normal[1];
        boundary_weight.at(e.midpoint) * gauge.eval2(grad).powf(p) * x_nu
    });
    Ok(PohozaevReport::new((1.0 + b - N / p) * ug, N * big_g, xg, (1.0 - 1.0 / p) * rhs))
}

/// Classical identity `(2 − n)∫ug + 2n∫G + 2∫⟨x,∇ₓG⟩ = ∫_∂Ω |∇u|²⟨x,ν⟩`,
/// which is twice the weighted identity in the Euclidean, unweighted, p = 2 case.
pub fn classic_pohozaev_residual(field: &ScalarField<'_>, gauge: &Gauge, src: &SourceSpec) -> Result<PohozaevReport> {
    if src.p != 2.0 {
        return Err(Error::WrongRegime(format!("classical identity needs p = 2, got {}", src.p)));
    }
    if src.weight_b != 0.0 {
        return Err(Error::WrongRegime(format!("classical identity needs b = 0, got {}", src.weight_b)));
    }
    if gauge.family() != GaugeFamily::Euclidean {
        return Err(Error::WrongRegime(format!("classical identity needs the Euclidean gauge, got {}", gauge.name())));
    }
    let r = pohozaev_residual(field, gauge, src)?;
    Ok(PohozaevReport::new(2.0 * r.lhs_term_ug, 2.0 * r.lhs_term_g, 2.0 * r.lhs_term_xgrad_g, 2.0 * r.rhs_boundary))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SerrinReport {
    pub torsional_rigidity: f64,
    pub volume: f64,
    /// `(n + 2) T / (n |Ω|)`.
    pub c_sq: f64,
    pub boundary_grad_min: f64,
    pub boundary_grad_max: f64,
    /// Length-weighted mean of `|∇u|` over the boundary.
    pub boundary_grad_mean: f64,
}

/// Serrin's constant of a p = 2 torsion solution and the spread of the boundary gradient.
pub fn serrin_constant(field: &ScalarField<'_>) -> SerrinReport {
    let mesh = field.mesh();
    let t = field.integrate_with(|_, u, _| u);
    let volume = mesh.total_area();
    let (mut lo, mut hi, mut sum, mut len) = (f64::INFINITY, 0.0f64, 0.0, 0.0);
    for e in mesh.boundary_edges() {
        let g = field.gradient(e.triangle);
        let m = g[0].hypot(g[1]);
        lo = lo.min(m);
        hi = hi.max(m);
        sum += m * e.length;
        len += e.length;
    }
    SerrinReport {
        torsional_rigidity: t,
        volume,
        c_sq: (N + 2.0) * t / (N * volume),
        boundary_grad_min: lo,
        boundary_grad_max: hi,
        boundary_grad_mean: sum / len,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Nonexistence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermSign {
    pub label: String,
    pub sigma: f64,
    /// Whether this condition must hold strictly (`< 0`) rather than `≤ 0`.
    pub strict: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonexistenceReport {
    pub terms: Vec<TermSign>,
    pub verdict: Verdict,
}

/// Sign conditions ruling out positive solutions on star-shaped domains.
///
/// Each power term contributes `σᵢ = λᵢ(1 + b − n/p + (n − αᵢ)/rᵢ)` and a
/// constant term `λ|x|^{-α}` contributes `σ₀ = λ(n + 1 + b − n/p − α)`. All
/// conditions are `σ ≤ 0` except the last power term, which needs `σ < 0`;
/// without a power term there is no strict condition and the verdict is inconclusive.
pub fn nonexistence_predicate(n: usize, p: f64, b: f64, src: &SourceSpec) -> NonexistenceReport {
    let nf = n as f64;
    let base = 1.0 + b - nf / p;
    let mut terms = Vec::with_capacity(src.terms.len() + 1);
    if let Some(c) = src.constant {
        let sigma = c.coef * (nf + 1.0 + b - nf / p - c.weight_exp);
        terms.push(TermSign { label: "constant".into(), sigma, strict: false, holds: sigma <= 0.0 });
    }
    let last = src.terms.len().checked_sub(1);
    for (i, t) in src.terms.iter().enumerate() {
        let sigma = t.coef * (base + (nf - t.weight_exp) / t.power);
        let strict = Some(i) == last;
        let holds = if strict { sigma < 0.0 } else { sigma <= 0.0 };
        terms.push(TermSign { label: format!("power[{i}]"), sigma, strict, holds });
    }
    let verdict = if last.is_some() && terms.iter().all(|t| t.holds) { Verdict::Nonexistence } else { Verdict::Inconclusive };
    NonexistenceReport { terms, verdict }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::mesh::{triangulate, Polygon, TriMesh};
    use crate::solver::{solve_torsion, PowerTerm, SolverOptions};

    fn euclid() -> Gauge {
        Gauge::euclidean(2).unwrap()
    }

    fn disk(h: f64) -> TriMesh {
        triangulate(&Polygon::unit_disk(64).unwrap(), h).unwrap()
    }

    #[test]
    fn disk_torsion_pohozaev() {
        let m = disk(0.03);
        let r = solve_torsion(&m, &euclid(), 2.0, &SolverOptions::default()).unwrap();
        let src = SourceSpec::torsion(2.0);
        let rep = pohozaev_residual(&r.field, &euclid(), &src).unwrap();
        assert_eq!(rep.lhs_term_ug, 0.0);
        assert_eq!(rep.lhs_term_xgrad_g, 0.0);
        assert!((rep.lhs / (PI / 4.0) - 1.0).abs() < 0.02);
        assert!((rep.rhs_boundary / (PI / 4.0) - 1.0).abs() < 0.02);
        assert!(rep.rel_residual <= 0.02, "{rep:?}");

        let classic = classic_pohozaev_residual(&r.field, &euclid(), &src).unwrap();
        assert!((classic.lhs / (PI / 2.0) - 1.0).abs() < 0.02);
        assert!((classic.lhs - 2.0 * rep.lhs).abs() <= 1e-15 * classic.lhs.abs());
        assert!((classic.rhs_boundary - 2.0 * rep.rhs_boundary).abs() <= 1e-15 * classic.rhs_boundary.abs());
    }

    #[test]
    fn residual_decreases_under_refinement() {
        let m0 = disk(0.1);
        let m1 = m0.refine_uniform();
        let m2 = m1.refine_uniform();
        let src = SourceSpec::torsion(2.0);
        let res: Vec<f64> = [&m0, &m1, &m2]
            .iter()
            .map(|m| {
                let r = solve_torsion(m, &euclid(), 2.0, &SolverOptions::default()).unwrap();
                pohozaev_residual(&r.field, &euclid(), &src).unwrap().rel_residual
            })
            .collect();
        assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
    }

    #[test]
    fn classic_requires_euclidean_quadratic_unweighted() {
        let m = disk(0.3);
        let f = ScalarField::interpolate(&m, |_| 0.0);
        let src = SourceSpec::torsion(2.0);
        assert!(matches!(classic_pohozaev_residual(&f, &euclid(), &SourceSpec::torsion(3.0)), Err(Error::WrongRegime(_))));
        assert!(matches!(
            classic_pohozaev_residual(&f, &euclid(), &src.clone().with_weight_b(0.5)),
            Err(Error::WrongRegime(_))
        ));
        assert!(matches!(
            classic_pohozaev_residual(&f, &Gauge::ellipse(2.0, 1.0).unwrap(), &src),
            Err(Error::WrongRegime(_))
        ));
    }

    #[test]
    fn zero_field_has_zero_terms() {
        let m = disk(0.2);
        let f = ScalarField::interpolate(&m, |_| 0.0);
        let src = SourceSpec {
            terms: vec![PowerTerm { coef: 3.0, weight_exp: 0.5, power: 4.0 }],
            constant: None,
            weight_b: 0.2,
            p: 2.5,
        };
        let rep = pohozaev_residual(&f, &Gauge::ellipse(2.0, 1.0).unwrap(), &src).unwrap();
        assert_eq!((rep.lhs, rep.rhs_boundary, rep.abs_residual, rep.rel_residual), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn serrin_disk_and_square() {
        let m = disk(0.03);
        let r = solve_torsion(&m, &euclid(), 2.0, &SolverOptions::default()).unwrap();
        let s = serrin_constant(&r.field);
        assert!((s.c_sq / 0.25 - 1.0).abs() < 0.01);
        assert!(s.boundary_grad_max - s.boundary_grad_min <= 0.02 + 0.5 * m.h_max(), "{s:?}");
        assert!((s.boundary_grad_mean / 0.5 - 1.0).abs() < 0.03);

        let big = triangulate(&Polygon::regular(64, 2.0).unwrap(), 0.06).unwrap();
        let r = solve_torsion(&big, &euclid(), 2.0, &SolverOptions::default()).unwrap();
        assert!((serrin_constant(&r.field).c_sq / 1.0 - 1.0).abs() < 0.01);

        let sq = triangulate(&Polygon::square(2.0).unwrap(), 0.03).unwrap();
        let r = solve_torsion(&sq, &euclid(), 2.0, &SolverOptions::default()).unwrap();
        let s = serrin_constant(&r.field);
        assert!((s.c_sq / (4.0 * 0.5623 / 8.0) - 1.0).abs() < 0.01);
        assert!(s.boundary_grad_min < 0.1);
        assert!((s.boundary_grad_max / 0.675 - 1.0).abs() < 0.05, "{s:?}");
    }

    fn single(lambda: f64, alpha: f64, r: f64) -> SourceSpec {
        SourceSpec::power(lambda, alpha, r, 2.0)
    }

    #[test]
    fn predicate_examples() {
        let rep = nonexistence_predicate(3, 2.0, 0.0, &single(1.0, 0.0, 8.0));
        assert!((rep.terms[0].sigma + 0.125).abs() < 1e-15);
        assert_eq!(rep.verdict, Verdict::Nonexistence);
        let rep = nonexistence_predicate(3, 2.0, 0.0, &single(1.0, 0.0, 6.0));
        assert_eq!(rep.terms[0].sigma, 0.0);
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        let rep = nonexistence_predicate(2, 3.0, 0.4, &single(0.0, 0.7, 3.0));
        assert_eq!(rep.terms[0].sigma, 0.0);
        // torsion: σ₀ = n + 1 − n/p > 0
        let rep = nonexistence_predicate(2, 2.0, 0.0, &SourceSpec::torsion(2.0));
        assert!(rep.terms[0].sigma > 0.0);
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert_eq!(serde_json_verdict(Verdict::Nonexistence), "\"NONEXISTENCE\"");
    }

    fn serde_json_verdict(v: Verdict) -> String {
        serde_json::to_string(&v).unwrap()
    }

    #[test]
    fn strict_sign_sits_on_last_power_term() {
        let mut src = single(1.0, 0.0, 6.0);
        src.terms.push(PowerTerm { coef: 1.0, weight_exp: 0.0, power: 8.0 });
        // σ = (0, −0.125): non-strict tie first, strict last
        assert_eq!(nonexistence_predicate(3, 2.0, 0.0, &src).verdict, Verdict::Nonexistence);
        src.terms.reverse();
        assert_eq!(nonexistence_predicate(3, 2.0, 0.0, &src).verdict, Verdict::Inconclusive);

        // the constant-term condition is non-strict
        let mut two_term = SourceSpec {
            terms: vec![PowerTerm { coef: 1.0, weight_exp: 0.0, power: 8.0 }],
            constant: Some(crate::solver::ConstTerm { coef: 0.0, weight_exp: 1.5 }),
            weight_b: 0.0,
            p: 2.0,
        };
        let rep = nonexistence_predicate(3, 2.0, 0.0, &two_term);
        assert_eq!(rep.terms[0].sigma, 0.0);
        assert_eq!(rep.verdict, Verdict::Nonexistence);
        two_term.constant.as_mut().unwrap().coef = -2.0;
        let rep = nonexistence_predicate(3, 2.0, 0.0, &two_term);
        assert!((rep.terms[0].sigma + 2.0).abs() < 1e-15);
        assert_eq!(rep.verdict, Verdict::Nonexistence);
        two_term.constant.as_mut().unwrap().coef = 2.0;
        assert_eq!(nonexistence_predicate(3, 2.0, 0.0, &two_term).verdict, Verdict::Inconclusive);
        assert_eq!(nonexistence_predicate(3, 2.0, 0.0, &SourceSpec::constant(-1.0, 2.0)).verdict, Verdict::Inconclusive);
    }
}
