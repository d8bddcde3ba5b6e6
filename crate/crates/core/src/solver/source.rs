use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `coef · |x|^{-weight_exp} · |u|^{power-2} u`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub coef: f64,
    #[serde(default)]
    pub weight_exp: f64,
    pub power: f64,
}

/// `coef · |x|^{-weight_exp}`, independent of `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstTerm {
    pub coef: f64,
    #[serde(default)]
    pub weight_exp: f64,
}

/// Right-hand side `g(x, u)` of `-(1/p) div(|x|^{-bp} ∇_ξ[F^p](∇u)) = g(x, u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default)]
    pub terms: Vec<PowerTerm>,
    #[serde(default)]
    pub constant: Option<ConstTerm>,
    #[serde(default)]
    pub weight_b: f64,
    pub p: f64,
}

impl SourceSpec {
    /// `g ≡ 1`, the torsion problem.
    pub fn torsion(p: f64) -> Self {
        Self::constant(1.0, p)
    }

    pub fn constant(coef: f64, p: f64) -> Self {
        Self { terms: Vec::new(), constant: Some(ConstTerm { coef, weight_exp: 0.0 }), weight_b: 0.0, p }
    }

    pub fn power(coef: f64, weight_exp: f64, power: f64, p: f64) -> Self {
        Self { terms: vec![PowerTerm { coef, weight_exp, power }], constant: None, weight_b: 0.0, p }
    }

    pub fn with_weight_b(mut self, b: f64) -> Self {
        self.weight_b = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.p >= 2.0 && self.p.is_finite()) {
            return bad(format!("p must be a finite number ≥ 2, got {}", self.p));
        }
        if !self.weight_b.is_finite() {
            return bad("weight exponent b must be finite".into());
        }
        if self.weight_b * self.p >= 2.0 {
            return Err(Error::WeightTooSingular { exponent: self.weight_b * self.p });
        }
        for t in &self.terms {
            if !(t.coef.is_finite() && t.weight_exp.is_finite() && t.power.is_finite()) {
                return bad(format!("non-finite source term {t:?}"));
            }
            if t.power <= 1.0 {
                return bad(format!("source power must exceed 1, got {}", t.power));
            }
            if t.weight_exp < 0.0 {
                return bad(format!("source weight exponent must be ≥ 0, got {}", t.weight_exp));
            }
            if t.weight_exp >= 2.0 {
                return Err(Error::WeightTooSingular { exponent: t.weight_exp });
            }
        }
        if let Some(c) = self.constant {
            if !(c.coef.is_finite() && c.weight_exp.is_finite()) {
                return bad(format!("non-finite constant term {c:?}"));
            }
            if c.weight_exp < 0.0 {
                return bad(format!("source weight exponent must be ≥ 0, got {}", c.weight_exp));
            }
            if c.weight_exp >= 2.0 {
                return Err(Error::WeightTooSingular { exponent: c.weight_exp });
            }
        }
        Ok(())
    }

    /// `g(x, u)` with `r = |x|`.
    pub fn g(&self, r: f64, u: f64) -> f64 {
        let mut g = self.constant.map_or(0.0, |c| c.coef * weight(r, c.weight_exp));
        for t in &self.terms {
            g += t.coef * weight(r, t.weight_exp) * u.abs().powf(t.power - 2.0) * u;
        }
        g
    }

    /// `G(x, u) = ∫₀ᵘ g(x, σ) dσ`.
    pub fn primitive(&self, r: f64, u: f64) -> f64 {
        let mut big = self.constant.map_or(0.0, |c| c.coef * weight(r, c.weight_exp) * u);
        for t in &self.terms {
            big += t.coef / t.power * weight(r, t.weight_exp) * u.abs().powf(t.power);
        }
        big
    }

    /// `∂g/∂u`, or `None` where it is unbounded (sublinear terms at `u = 0`).
    pub fn dg_du(&self, r: f64, u: f64) -> Option<f64> {
        let mut d = 0.0;
        for t in &self.terms {
            if t.power < 2.0 && u == 0.0 {
                return None;
            }
            d += t.coef * (t.power - 1.0) * weight(r, t.weight_exp) * u.abs().powf(t.power - 2.0);
        }
        Some(d)
    }

    /// `⟨x, ∇ₓG(x, u)⟩`, differentiated in closed form.
    pub fn x_dot_grad_x_primitive(&self, r: f64, u: f64) -> f64 {
        let mut s = self.constant.map_or(0.0, |c| -c.coef * c.weight_exp * weight(r, c.weight_exp) * u);
        for t in &self.terms {
            s -= t.coef * t.weight_exp / t.power * weight(r, t.weight_exp) * u.abs().powf(t.power);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0) && self.constant.map_or(true, |c| c.coef == 0.0)
    }

    /// True when `g` does not depend on `u`.
    pub fn is_constant_in_u(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }
}

fn weight(r: f64, exponent: f64) -> f64 {
    if exponent == 0.0 { 1.0 } else { r.powf(-exponent) }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn sample() -> SourceSpec {
        SourceSpec {
            terms: vec![
                PowerTerm { coef: -1.5, weight_exp: 0.7, power: 3.5 },
                PowerTerm { coef: 2.0, weight_exp: 0.0, power: 1.5 },
            ],
            constant: Some(ConstTerm { coef: 0.8, weight_exp: 1.2 }),
            weight_b: 0.25,
            p: 2.5,
        }
    }

    #[test]
    fn validation() {
        assert!(sample().validate().is_ok());
        assert!(SourceSpec::torsion(1.5).validate().is_err());
        assert!(matches!(SourceSpec::power(1.0, 2.0, 3.0, 2.0).validate(), Err(Error::WeightTooSingular { .. })));
        assert!(matches!(SourceSpec::torsion(2.0).with_weight_b(1.0).validate(), Err(Error::WeightTooSingular { .. })));
        assert!(SourceSpec::power(1.0, 0.0, 1.0, 2.0).validate().is_err());
        let json = r#"{"terms":[{"coef":1,"power":8}],"p":2}"#;
        let s: SourceSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s, SourceSpec::power(1.0, 0.0, 8.0, 2.0));
        assert!(serde_json::from_str::<SourceSpec>(r#"{"terms":[],"p":2,"lambda":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn primitive_derivatives(r in 0.05f64..3.0, u in -2.0f64..2.0) {
            let s = sample();
            let h = 1e-6;
            let dg = (s.primitive(r, u + h) - s.primitive(r, u - h)) / (2.0 * h);
            prop_assert!((dg - s.g(r, u)).abs() < 1e-6 * (1.0 + s.g(r, u).abs()));
            // the radial derivative of G along the ray through x, times |x|
            let dr = r * (s.primitive(r * (1.0 + h), u) - s.primitive(r * (1.0 - h), u)) / (2.0 * h * r);
            let xg = s.x_dot_grad_x_primitive(r, u);
            prop_assert!((dr - xg).abs() < 1e-6 * (1.0 + xg.abs()), "{} vs {}", dr, xg);
            if u.abs() > 1e-3 {
                let d2 = (s.g(r, u + h) - s.g(r, u - h)) / (2.0 * h);
                let exact = s.dg_du(r, u).unwrap();
                prop_assert!((d2 - exact).abs() < 1e-5 * (1.0 + exact.abs()));
            }
        }
    }
}
