//! Anisotropic gauge functions.
//!
//! A gauge `F` is an even, convex function that is positively homogeneous of
//! degree one. Its polar `F°(x) = sup ⟨x, ξ⟩ / F(ξ)` is the support function of
//! the unit ball `K = {F ≤ 1}`, and `K° = {F° ≤ 1}` is the Wulff shape.
//!
//! The supported families are smooth, with `F`, `F°` and the derivatives of
//! `F^p` in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of directions for grid-based polar evaluation and Wulff volumes.
pub const DEFAULT_DIRECTIONS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaugeFamily {
    Euclidean,
    /// `F(ξ) = sqrt(a² ξ₁² + b² ξ₂²)`; two-dimensional only.
    Ellipse { a: f64, b: f64 },
    /// `F(ξ) = (Σ |ξᵢ|^q)^{1/q}`.
    LpNorm { q: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaugeSpec", into = "GaugeSpec")]
pub struct Gauge {
    family: GaugeFamily,
    dim: usize,
}

/// Areas of the Wulff shape `K° = {F° ≤ 1}` and of the unit ball `K = {F ≤ 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WulffInfo {
    pub kappa_n: f64,
    pub omega_k: f64,
}

impl Gauge {
    pub fn euclidean(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { family: GaugeFamily::Euclidean, dim })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidGauge(format!("ellipse semi-axes must be positive, got a={a}, b={b}")));
        }
        Ok(Self { family: GaugeFamily::Ellipse { a, b }, dim: 2 })
    }

    pub fn lp_norm(q: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::InvalidGauge(format!("lp_norm exponent must satisfy q > 1, got {q}")));
        }
        Ok(Self { family: GaugeFamily::LpNorm { q }, dim })
    }

    pub fn family(&self) -> GaugeFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when `F²` is a quadratic form, so the Hessian of `F²` is constant.
    pub fn is_quadratic(&self) -> bool {
        matches!(self.family, GaugeFamily::Euclidean | GaugeFamily::Ellipse { .. })
    }

    pub fn name(&self) -> String {
        match self.family {
            GaugeFamily::Euclidean => "euclidean".to_string(),
            GaugeFamily::Ellipse { a, b } => format!("ellipse({a},{b})"),
            GaugeFamily::LpNorm { q } => format!("lp_norm({q})"),
        }
    }

    /// `F(ξ)`.
    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        match self.family {
            GaugeFamily::Euclidean => euclid_norm(xi),
            GaugeFamily::Ellipse { a, b } => (a * xi[0]).hypot(b * xi[1]),
            GaugeFamily::LpNorm { q } => lp(xi, q),
        }
    }

    /// `F°(x)`, the polar gauge, from its closed form.
    pub fn polar(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.family {
            GaugeFamily::Euclidean => euclid_norm(x),
            GaugeFamily::Ellipse { a, b } => (x[0] / a).hypot(x[1] / b),
            GaugeFamily::LpNorm { q } => lp(x, q / (q - 1.0)),
        }
    }

    /// `F°(x)` by maximizing `⟨x, ξ⟩ / F(ξ)` over `directions` unit directions.
    pub fn polar_on_grid(&self, x: [f64; 2], directions: usize) -> Result<f64> {
        self.require_dim(2)?;
        Ok(support_on_grid(x, directions, |xi| self.eval(xi)))
    }

    /// `∇_ξ [F^p](ξ)` written into `out`. Zero at `ξ = 0`.
    pub fn grad_fp_into(&self, p: f64, xi: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), xi.len());
        let f = self.eval(xi);
        if f == 0.0 {
            out.iter_mut().for_each(|o| *o = 0.0);
            return;
        }
        self.grad_f_into(xi, f, out);
        let scale = p * f.powf(p - 1.0);
        out.iter_mut().for_each(|o| *o *= scale);
    }

    pub fn grad_fp(&self, p: f64, xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; xi.len()];
        self.grad_fp_into(p, xi, &mut out);
        out
    }

    /// Row-major Hessian `[F^p]_{ξξ}(ξ)` written into `out` (length `n²`).
    pub fn hess_fp_into(&self, p: f64, xi: &[f64], out: &mut [f64]) -> Result<()> {
        let n = xi.len();
        debug_assert_eq!(out.len(), n * n);
        let f = self.eval(xi);
        if f == 0.0 {
            return Err(Error::DegenerateAtZero);
        }
        // H = p(p-1) F^{p-2} ∇F ∇Fᵀ + p F^{p-1} ∇²F
        self.hess_f_into(xi, f, out)?;
        // dimensions are capped at 8 by the constructors
        let mut grad = [0.0; 8];
        let grad = &mut grad[..n];
        self.grad_f_into(xi, f, grad);
        let c1 = p * (p - 1.0) * f.powf(p - 2.0);
        let c2 = p * f.powf(p - 1.0);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = c1 * grad[i] * grad[j] + c2 * out[i * n + j];
            }
        }
        Ok(())
    }

    pub fn hess_fp(&self, p: f64, xi: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; xi.len() * xi.len()];
        self.hess_fp_into(p, xi, &mut out)?;
        Ok(out)
    }

    pub fn eval2(&self, xi: [f64; 2]) -> f64 {
        self.eval(&xi)
    }

    pub fn grad_fp2(&self, p: f64, xi: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        self.grad_fp_into(p, &xi, &mut out);
        out
    }

    pub fn hess_fp2(&self, p: f64, xi: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let mut h = [0.0; 4];
        self.hess_fp_into(p, &xi, &mut h)?;
        Ok([[h[0], h[1]], [h[2], h[3]]])
    }

    /// Bounds `α ≤ F(ξ)/|ξ| ≤ β`. Sampled over a direction grid in two
    /// dimensions, closed form otherwise.
    pub fn norm_bounds(&self, directions: usize) -> (f64, f64) {
        if self.dim == 2 {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for k in 0..directions.max(4) {
                let t = PI * k as f64 / directions.max(4) as f64;
                let r = self.eval(&[t.cos(), t.sin()]);
                lo = lo.min(r);
                hi = hi.max(r);
            }
            return (lo, hi);
        }
        match self.family {
            GaugeFamily::Euclidean => (1.0, 1.0),
            GaugeFamily::Ellipse { a, b } => (a.min(b), a.max(b)),
            GaugeFamily::LpNorm { q } => {
                let c = (self.dim as f64).powf(1.0 / q - 0.5);
                (c.min(1.0), c.max(1.0))
            }
        }
    }

    /// Areas of `K°` and `K` from inscribed polygons with `directions` vertices.
    pub fn wulff_volume(&self, directions: usize) -> Result<WulffInfo> {
        self.require_dim(2)?;
        if directions < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 directions, got {directions}")));
        }
        let star_area = |radial: &dyn Fn(&[f64]) -> f64| {
            let pts: Vec<[f64; 2]> = (0..directions)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / directions as f64;
                    let d = [t.cos(), t.sin()];
                    let r = radial(&d);
                    [d[0] / r, d[1] / r]
                })
                .collect();
            shoelace(&pts)
        };
        Ok(WulffInfo { kappa_n: star_area(&|d| self.polar(d)), omega_k: star_area(&|d| self.eval(d)) })
    }

    /// Samples the positive-definiteness hypothesis on `[F^p]_{ξξ}` over unit directions.
    pub fn hessian_positive_definite(&self, p: f64, directions: usize) -> bool {
        if self.dim != 2 {
            return false;
        }
        (0..directions.max(4)).all(|k| {
            let t = 2.0 * PI * k as f64 / directions.max(4) as f64;
            match self.hess_fp2(p, [t.cos(), t.sin()]) {
                Ok(h) => sym2_eigenvalues(h).0 > 0.0,
                Err(_) => false,
            }
        })
    }

    fn require_dim(&self, expected: usize) -> Result<()> {
        if self.dim != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dim });
        }
        Ok(())
    }

    fn grad_f_into(&self, xi: &[f64], f: f64, out: &mut [f64]) {
        match self.family {
            GaugeFamily::Euclidean => {
                for (o, x) in out.iter_mut().zip(xi) {
                    *o = x / f;
                }
            }
            GaugeFamily::Ellipse { a, b } => {
                out[0] = a * a * xi[0] / f;
                out[1] = b * b * xi[1] / f;
            }
            GaugeFamily::LpNorm { q } => {
                for (o, x) in out.iter_mut().zip(xi) {
                    *o = x.signum() * (x.abs() / f).powf(q - 1.0);
                    if *x == 0.0 {
                        *o = 0.0;
                    }
                }
            }
        }
    }

    fn hess_f_into(&self, xi: &[f64], f: f64, out: &mut [f64]) -> Result<()> {
        let n = xi.len();
        match self.family {
            GaugeFamily::Euclidean => {
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        out[i * n + j] = (delta - xi[i] * xi[j] / (f * f)) / f;
                    }
                }
            }
            GaugeFamily::Ellipse { a, b } => {
                let d = [a * a, b * b];
                let dx = [d[0] * xi[0], d[1] * xi[1]];
                for i in 0..2 {
                    for j in 0..2 {
                        let diag = if i == j { d[i] } else { 0.0 };
                        out[i * 2 + j] = (diag - dx[i] * dx[j] / (f * f)) / f;
                    }
                }
            }
            GaugeFamily::LpNorm { q } => {
                if q < 2.0 && xi.iter().any(|&x| x == 0.0) {
                    return Err(Error::NonSmoothGauge(xi.to_vec()));
                }
                for i in 0..n {
                    let gi = xi[i].signum() * (xi[i].abs() / f).powf(q - 1.0);
                    for j in 0..n {
                        let gj = xi[j].signum() * (xi[j].abs() / f).powf(q - 1.0);
                        let diag = if i == j { (xi[i].abs() / f).powf(q - 2.0) } else { 0.0 };
                        out[i * n + j] = (q - 1.0) / f * (diag - gi * gj);
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=8).contains(&dim) {
        return Err(Error::InvalidGauge(format!("dimension must be in 2..=8, got {dim}")));
    }
    Ok(())
}

fn euclid_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn lp(x: &[f64], q: f64) -> f64 {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x.iter().map(|v| (v.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `sup_ξ ⟨x, ξ⟩ / norm(ξ)` over a uniform grid of unit directions in the plane.
pub fn support_on_grid(x: [f64; 2], directions: usize, norm: impl Fn(&[f64]) -> f64) -> f64 {
    let n = directions.max(4);
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let d = [t.cos(), t.sin()];
            (x[0] * d[0] + x[1] * d[1]) / norm(&d)
        })
        .fold(0.0, f64::max)
}

/// Signed area of a closed polygon (positive when counter-clockwise).
pub fn shoelace(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
}

/// Eigenvalues `(min, max)` of a symmetric 2×2 matrix.
pub fn sym2_eigenvalues(h: [[f64; 2]; 2]) -> (f64, f64) {
    let mean = 0.5 * (h[0][0] + h[1][1]);
    let dev = (0.5 * (h[0][0] - h[1][1])).hypot(0.5 * (h[0][1] + h[1][0]));
    (mean - dev, mean + dev)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaugeSpec {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
}

impl TryFrom<GaugeSpec> for Gauge {
    type Error = Error;

    fn try_from(spec: GaugeSpec) -> Result<Self> {
        let dim = spec.dimension.unwrap_or(2);
        let missing = |field: &str| Error::InvalidGauge(format!("family {:?} requires field {field:?}", spec.family));
        match spec.family.as_str() {
            "euclidean" => Gauge::euclidean(dim),
            "ellipse" => {
                if dim != 2 {
                    return Err(Error::InvalidGauge("ellipse gauges are two-dimensional".into()));
                }
                Gauge::ellipse(spec.a.ok_or_else(|| missing("a"))?, spec.b.ok_or_else(|| missing("b"))?)
            }
            "lp_norm" => Gauge::lp_norm(spec.q.ok_or_else(|| missing("q"))?, dim),
            other => Err(Error::InvalidGauge(format!("unknown gauge family {other:?}"))),
        }
    }
}

impl From<Gauge> for GaugeSpec {
    fn from(g: Gauge) -> Self {
        let mut spec = GaugeSpec { family: String::new(), a: None, b: None, q: None, dimension: Some(g.dim) };
        match g.family {
            GaugeFamily::Euclidean => spec.family = "euclidean".into(),
            GaugeFamily::Ellipse { a, b } => {
                spec.family = "ellipse".into();
                spec.a = Some(a);
                spec.b = Some(b);
            }
            GaugeFamily::LpNorm { q } => {
                spec.family = "lp_norm".into();
                spec.q = Some(q);
            }
        }
        spec
    }
}

impl std::str::FromStr for Gauge {
    type Err = Error;

    /// Parses `euclidean`, `ellipse(a,b)` or `lp_norm(q)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], parse_args(&s[i + 1..s.len() - 1])?),
            _ => (s, Vec::new()),
        };
        match (name, args.as_slice()) {
            ("euclidean", []) => Gauge::euclidean(2),
            ("ellipse", [a, b]) => Gauge::ellipse(*a, *b),
            ("lp_norm", [q]) => Gauge::lp_norm(*q, 2),
            _ => Err(Error::InvalidGauge(format!("cannot parse gauge {s:?}"))),
        }
    }
}

pub(crate) fn parse_args(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad number {t:?}"))))
        .collect()
}
