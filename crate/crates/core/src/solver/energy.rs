//! P1 discretization of `E(u) = Σ_T |T| w_T (1/p) F^p(∇u_T) − Σ_T |T| L_T(u(x_T))`
//! over the interior vertices, with `w_T = |x_T|^{-bp}` at centroids.

use crate::error::{Error, Result};
use crate::field::Weight;
use crate::gauge::Gauge;
use crate::mesh::TriMesh;

use super::linalg::{Factor, SparsePattern};
use super::source::SourceSpec;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy)]
pub(crate) enum Load<'a> {
    Source(&'a SourceSpec),
    /// `L_T(u) = f_T u` with one density per triangle.
    Linear(&'a [f64]),
}

pub(crate) struct Discretization<'m> {
    pub mesh: &'m TriMesh,
    pub gauge: Gauge,
    pub p: f64,
    weights: Vec<f64>,
    radii: Vec<f64>,
    dof: Vec<usize>,
    free: Vec<usize>,
    pattern: SparsePattern,
    local: Vec<[usize; 9]>,
    lumped: Vec<f64>,
    precond: Factor,
    /// `[F^p]_{ξξ}` where it is constant (p = 2 with a quadratic gauge).
    constant_hessian: Option<[[f64; 2]; 2]>,
}

impl<'m> Discretization<'m> {
    pub fn new(mesh: &'m TriMesh, gauge: &Gauge, p: f64, b: f64) -> Result<Self> {
        if gauge.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: gauge.dim() });
        }
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be a finite number ≥ 2, got {p}")));
        }
        let weight = Weight::new(mesh, b * p)?;
        let centroids: Vec<_> = (0..mesh.n_triangles()).map(|t| mesh.centroid(t)).collect();
        let weights = centroids.iter().map(|&x| weight.at(x)).collect();
        let radii = centroids.iter().map(|&x| weight.radius(x)).collect();

        let mut dof = vec![NONE; mesh.n_vertices()];
        let mut free = Vec::new();
        for v in 0..mesh.n_vertices() {
            if !mesh.is_boundary_vertex(v) {
                dof[v] = free.len();
                free.push(v);
            }
        }
        if free.is_empty() {
            return Err(Error::DegenerateGeometry("mesh has no interior vertices".into()));
        }

        let mut entries = Vec::with_capacity(mesh.n_triangles() * 6);
        for tri in mesh.triangles() {
            for a in tri {
                for b in tri {
                    let (da, db) = (dof[*a], dof[*b]);
                    if da != NONE && db != NONE && da > db {
                        entries.push((da, db));
                    }
                }
            }
        }
        let pattern = SparsePattern::new(free.len(), entries)?;
        let local = mesh
            .triangles()
            .iter()
            .map(|tri| {
                let mut idx = [NONE; 9];
                for a in 0..3 {
                    for b in 0..3 {
                        let (da, db) = (dof[tri[a]], dof[tri[b]]);
                        if da != NONE && db != NONE && da >= db {
                            idx[3 * a + b] = pattern.index(da, db);
                        }
                    }
                }
                idx
            })
            .collect::<Vec<_>>();

        let mut lumped = vec![0.0; free.len()];
        let mut stiffness = vec![0.0; pattern.nnz()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.area(t);
            let grads = mesh.basis_gradients(t);
            for a in 0..3 {
                if dof[tri[a]] != NONE {
                    lumped[dof[tri[a]]] += area / 3.0;
                }
                for b in 0..3 {
                    let k = local[t][3 * a + b];
                    if k != NONE {
                        stiffness[k] += area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                    }
                }
            }
        }
        let precond = pattern.factor(&stiffness)?;
        let constant_hessian = if p == 2.0 && gauge.is_quadratic() { Some(gauge.hess_fp2(2.0, [1.0, 0.0])?) } else { None };

        Ok(Self {
            mesh,
            gauge: gauge.clone(),
            p,
            weights,
            radii,
            dof,
            free,
            pattern,
            local,
            lumped,
            precond,
            constant_hessian,
        })
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Nodal vector with `x` on the interior vertices and zero on the boundary.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.mesh.n_vertices()];
        for (i, &v) in self.free.iter().enumerate() {
            u[v] = x[i];
        }
        u
    }

    pub fn restrict(&self, u: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&v| u[v]).collect()
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.lumped
    }

    pub fn precondition(&self, g: &[f64]) -> Vec<f64> {
        self.precond.solve(g)
    }

    fn grad(&self, t: usize, u: &[f64]) -> [f64; 2] {
        let tri = self.mesh.triangles()[t];
        let grads = self.mesh.basis_gradients(t);
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += u[tri[k]] * grads[k][0];
            g[1] += u[tri[k]] * grads[k][1];
        }
        g
    }

    fn centroid_value(&self, t: usize, u: &[f64]) -> f64 {
        let [a, b, c] = self.mesh.triangles()[t];
        (u[a] + u[b] + u[c]) / 3.0
    }

    fn load(&self, load: Load, t: usize, uc: f64) -> f64 {
        match load {
            Load::Source(s) => s.primitive(self.radii[t], uc),
            Load::Linear(f) => f[t] * uc,
        }
    }

    fn load_deriv(&self, load: Load, t: usize, uc: f64) -> f64 {
        match load {
            Load::Source(s) => s.g(self.radii[t], uc),
            Load::Linear(f) => f[t],
        }
    }

    /// `Σ |T| w_T F^p(∇u_T)`, that is `p` times the gradient part of the energy.
    pub fn gradient_form(&self, u: &[f64]) -> f64 {
        (0..self.mesh.n_triangles())
            .map(|t| self.mesh.area(t) * self.weights[t] * self.gauge.eval2(self.grad(t, u)).powf(self.p))
            .sum()
    }

    pub fn energy(&self, load: Load, u: &[f64]) -> f64 {
        let inv_p = 1.0 / self.p;
        (0..self.mesh.n_triangles())
            .map(|t| {
                let area = self.mesh.area(t);
                let f = self.gauge.eval2(self.grad(t, u)).powf(self.p);
                area * (self.weights[t] * inv_p * f - self.load(load, t, self.centroid_value(t, u)))
            })
            .sum()
    }

    /// Energy and its gradient with respect to the interior values.
    pub fn energy_grad(&self, load: Load, u: &[f64]) -> (f64, Vec<f64>) {
        let inv_p = 1.0 / self.p;
        let mut energy = 0.0;
        let mut grad = vec![0.0; self.free.len()];
        for (t, tri) in self.mesh.triangles().iter().enumerate() {
            let area = self.mesh.area(t);
            let g = self.grad(t, u);
            let uc = self.centroid_value(t, u);
            energy += area * (self.weights[t] * inv_p * self.gauge.eval2(g).powf(self.p) - self.load(load, t, uc));
            let flux = self.gauge.grad_fp2(self.p, g);
            let dl = self.load_deriv(load, t, uc) / 3.0;
            let basis = self.mesh.basis_gradients(t);
            for k in 0..3 {
                let d = self.dof[tri[k]];
                if d != NONE {
                    let dot = flux[0] * basis[k][0] + flux[1] * basis[k][1];
                    grad[d] += area * (self.weights[t] * inv_p * dot - dl);
                }
            }
        }
        (energy, grad)
    }

    /// Hessian values on the sparsity pattern, with a Tikhonov shift of
    /// `1e-10` times the largest diagonal entry.
    pub fn hessian(&self, load: Load, u: &[f64]) -> Result<Vec<f64>> {
        let inv_p = 1.0 / self.p;
        let mut vals = vec![0.0; self.pattern.nnz()];
        for t in 0..self.mesh.n_triangles() {
            let area = self.mesh.area(t);
            let g = self.grad(t, u);
            let h = match self.gauge.hess_fp2(self.p, g) {
                Ok(h) => h,
                Err(Error::DegenerateAtZero) => self.constant_hessian.unwrap_or([[0.0; 2]; 2]),
                Err(e) => return Err(e),
            };
            let second = match load {
                Load::Source(s) => s.dg_du(self.radii[t], self.centroid_value(t, u)).unwrap_or(0.0),
                Load::Linear(_) => 0.0,
            };
            let basis = self.mesh.basis_gradients(t);
            let hb: [[f64; 2]; 3] = std::array::from_fn(|b| {
                [h[0][0] * basis[b][0] + h[0][1] * basis[b][1], h[1][0] * basis[b][0] + h[1][1] * basis[b][1]]
            });
            for a in 0..3 {
                for b in 0..3 {
                    let k = self.local[t][3 * a + b];
                    if k == NONE {
                        continue;
                    }
                    let stiff = basis[a][0] * hb[b][0] + basis[a][1] * hb[b][1];
                    vals[k] += area * (self.weights[t] * inv_p * stiff - second / 9.0);
                }
            }
        }
        let shift = 1e-10 * self.pattern.diagonal_max(&vals);
        self.pattern.shift_diagonal(&mut vals, shift.max(f64::MIN_POSITIVE));
        Ok(vals)
    }

    pub fn factor(&self, values: &[f64]) -> Result<Factor> {
        self.pattern.factor(values)
    }

    /// `Σ |T| |u_T|^q` with centroid values.
    pub fn lq_norm_pow(&self, u: &[f64], q: f64) -> f64 {
        (0..self.mesh.n_triangles()).map(|t| self.mesh.area(t) * self.centroid_value(t, u).abs().powf(q)).sum()
    }

    /// Per-triangle `|u_T|^{q-2} u_T`.
    pub fn centroid_power(&self, u: &[f64], q: f64) -> Vec<f64> {
        (0..self.mesh.n_triangles())
            .map(|t| {
                let c = self.centroid_value(t, u);
                c.abs().powf(q - 2.0) * c
            })
            .collect()
    }
}
