//! Piecewise-linear fields on a [`TriMesh`] and the level-set quantities built
//! from them: distribution function, anisotropic perimeter of superlevel sets
//! and the Wulff isoperimetric comparison.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::mesh::{Point, TriMesh};

/// Continuous P1 field given by its nodal values.
#[derive(Clone, Debug)]
pub struct ScalarField<'m> {
    mesh: &'m TriMesh,
    values: Vec<f64>,
}

impl<'m> ScalarField<'m> {
    pub fn new(mesh: &'m TriMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch { expected: mesh.n_vertices(), found: values.len() });
        }
        Ok(Self { mesh, values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &'m TriMesh, f: impl Fn(Point) -> f64) -> Self {
        Self { mesh, values: mesh.vertices().iter().map(|&x| f(x)).collect() }
    }

    pub fn mesh(&self) -> &'m TriMesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn centroid_value(&self, t: usize) -> f64 {
        let [a, b, c] = self.mesh.triangles()[t];
        (self.values[a] + self.values[b] + self.values[c]) / 3.0
    }

    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let tri = self.mesh.triangles()[t];
        let grads = self.mesh.basis_gradients(t);
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += self.values[tri[k]] * grads[k][0];
            g[1] += self.values[tri[k]] * grads[k][1];
        }
        g
    }

    pub fn gradient_field(&self) -> Vec<[f64; 2]> {
        (0..self.mesh.n_triangles()).map(|t| self.gradient(t)).collect()
    }

    /// Centroid rule `Σ |T| transform(u_T) |x_T|^{-c}`, with `|x|` clamped
    /// below at `h_max / 10` when a weight exponent `c` is given.
    pub fn integrate(&self, transform: impl Fn(f64) -> f64, weight_exponent: Option<f64>) -> Result<f64> {
        let weight = Weight::new(self.mesh, weight_exponent.unwrap_or(0.0))?;
        Ok(self.integrate_with(|x, u, _| transform(u) * weight.at(x)))
    }

    /// Centroid rule for an integrand depending on position, value and gradient.
    pub fn integrate_with(&self, mut integrand: impl FnMut(Point, f64, [f64; 2]) -> f64) -> f64 {
        (0..self.mesh.n_triangles())
            .map(|t| self.mesh.area(t) * integrand(self.mesh.centroid(t), self.centroid_value(t), self.gradient(t)))
            .sum()
    }

    /// `∫ F(∇u)^power`.
    pub fn gauge_integral(&self, gauge: &Gauge, power: f64) -> f64 {
        self.integrate_with(|_, _, g| gauge.eval2(g).powf(power))
    }

    /// Exact superlevel areas and anisotropic perimeters on the given levels.
    pub fn distribution_function(&self, gauge: &Gauge, levels: &[f64]) -> LevelProfile {
        let mut mu = Vec::with_capacity(levels.len());
        let mut perim_f = Vec::with_capacity(levels.len());
        for &s in levels {
            let (area, perim) = self.superlevel(gauge, s);
            mu.push(area.max(0.0));
            perim_f.push(perim);
        }
        LevelProfile { levels: levels.to_vec(), mu, perim_f }
    }

    /// Area of `{u > s}` and `P_F({u > s})`, with `u` extended by zero outside
    /// the mesh so that parts of the boundary where `u > s ≥ 0` count as perimeter.
    fn superlevel(&self, gauge: &Gauge, s: f64) -> (f64, f64) {
        let verts = self.mesh.vertices();
        let (mut area, mut perim) = (0.0, 0.0);
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let vals = tri.map(|i| self.values[i]);
            let above = vals.map(|v| v > s);
            let count = above.iter().filter(|&&a| a).count();
            if count == 0 {
                continue;
            }
            if count == 3 {
                area += self.mesh.area(t);
                continue;
            }
            let pts = tri.map(|i| verts[i]);
            let mut clipped: Vec<Point> = Vec::with_capacity(4);
            let mut cut: Vec<Point> = Vec::with_capacity(2);
            for k in 0..3 {
                let l = (k + 1) % 3;
                if above[k] {
                    clipped.push(pts[k]);
                }
                if above[k] != above[l] {
                    let w = (vals[k] - s) / (vals[k] - vals[l]);
                    let x = [pts[k][0] + w * (pts[l][0] - pts[k][0]), pts[k][1] + w * (pts[l][1] - pts[k][1])];
                    clipped.push(x);
                    cut.push(x);
                }
            }
            area += crate::gauge::shoelace(&clipped);

            // a cut lying on a mesh edge is shared with the neighbour; count it
            // once, and only if it separates the superlevel set from its complement
            if count == 1 {
                let k = above.iter().position(|&a| a).unwrap();
                let on_edge = vals[(k + 1) % 3] == s && vals[(k + 2) % 3] == s;
                if on_edge {
                    if let Some(n) = self.mesh.neighbor(t, k) {
                        let third = self.mesh.triangles()[n]
                            .iter()
                            .copied()
                            .find(|&v| v != tri[(k + 1) % 3] && v != tri[(k + 2) % 3])
                            .unwrap();
                        if self.values[third] > s {
                            continue;
                        }
                    }
                }
            }
            let d = [cut[1][0] - cut[0][0], cut[1][1] - cut[0][1]];
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                perim += len * gauge.eval2([d[1] / len, -d[0] / len]);
            }
        }
        for e in self.mesh.boundary_edges() {
            let (va, vb) = (self.values[e.vertices[0]], self.values[e.vertices[1]]);
            let (lo, hi) = (va.min(vb), va.max(vb));
            let fraction = if lo > s {
                1.0
            } else if hi > s {
                (hi - s) / (hi - lo)
            } else {
                0.0
            };
            perim += fraction * e.length * gauge.eval2(e.normal);
        }
        (area, perim)
    }

    /// Nodal values as `x,y,u` CSV rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,u\n");
        for (x, u) in self.mesh.vertices().iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(*u));
        }
        out
    }
}

/// `|x|^{-c}` with `|x|` clamped below at `h_max / 10`.
#[derive(Clone, Copy, Debug)]
pub struct Weight {
    exponent: f64,
    floor: f64,
}

impl Weight {
    pub fn new(mesh: &TriMesh, exponent: f64) -> Result<Self> {
        if exponent >= 2.0 {
            return Err(Error::WeightTooSingular { exponent });
        }
        Ok(Self { exponent, floor: mesh.h_max() / 10.0 })
    }

    pub fn at(&self, x: Point) -> f64 {
        if self.exponent == 0.0 {
            return 1.0;
        }
        x[0].hypot(x[1]).max(self.floor).powf(-self.exponent)
    }

    /// Distance from the origin after clamping.
    pub fn radius(&self, x: Point) -> f64 {
        x[0].hypot(x[1]).max(self.floor)
    }
}

/// `count` equally spaced levels from 0 to `sup` inclusive.
pub fn uniform_levels(sup: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|k| sup * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelProfile {
    pub levels: Vec<f64>,
    pub mu: Vec<f64>,
    pub perim_f: Vec<f64>,
}

impl LevelProfile {
    /// Trapezoid rule for `∫ μ(s) ds` over the level grid.
    pub fn layer_cake(&self) -> f64 {
        trapezoid(&self.levels, &self.mu)
    }

    /// Trapezoid rule for `∫ P_F({u > s}) ds` over the level grid.
    pub fn coarea(&self) -> f64 {
        trapezoid(&self.levels, &self.perim_f)
    }

    /// Compares each level with the Wulff isoperimetric lower bound
    /// `2 κ^{1/2} μ^{1/2}`, allowing an absolute slack `tol`.
    pub fn wulff_check(&self, kappa: f64, tol: f64) -> Vec<WulffLevel> {
        self.levels
            .iter()
            .zip(self.mu.iter().zip(&self.perim_f))
            .map(|(&s, (&mu, &perim))| {
                let bound = 2.0 * (kappa * mu).sqrt();
                WulffLevel { s, perim_f: perim, bound, slack: perim - bound, satisfied: perim + tol >= bound }
            })
            .collect()
    }

    /// `s,mu,perim_F,wulff_slack` rows; the slack column is empty without a check.
    pub fn to_csv(&self, wulff: Option<&[WulffLevel]>) -> String {
        let mut out = String::from("s,mu,perim_F,wulff_slack\n");
        for i in 0..self.levels.len() {
            let slack = wulff.map(|w| fmt_f64(w[i].slack)).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(self.levels[i]),
                fmt_f64(self.mu[i]),
                fmt_f64(self.perim_f[i]),
                slack
            );
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WulffLevel {
    pub s: f64,
    pub perim_f: f64,
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

/// Twelve significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}
