//! Finite-element solvers for the anisotropic p-torsion problem, the weighted
//! Dirichlet problem with power-law sources and the first Dirichlet eigenpair.
//!
//! All three are energy minimizations over P1 fields vanishing on the boundary.
//! Each iteration tries a Newton step built from the Hessian of `F^p` and falls
//! back to gradient descent preconditioned by the Euclidean Laplacian stiffness
//! matrix; steps are accepted by Armijo backtracking.

mod energy;
mod linalg;
mod source;

use serde::{Deserialize, Serialize};

pub use source::{ConstTerm, PowerTerm, SourceSpec};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::gauge::Gauge;
use crate::mesh::TriMesh;
use energy::{Discretization, Load};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop once the preconditioned gradient norm drops below this.
    pub tol: f64,
    /// Stop once the relative energy decrease stays below this for three steps.
    pub energy_tol: f64,
    pub max_iters: usize,
    pub newton: bool,
    /// Relative change of the Rayleigh quotient that ends inverse iteration.
    pub eigen_tol: f64,
    pub eigen_max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-8, energy_tol: 1e-12, max_iters: 5000, newton: true, eigen_tol: 1e-8, eigen_max_iters: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport<'m> {
    pub field: ScalarField<'m>,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `max_i |∂E/∂u_i| / m_i` over interior vertices, `m_i` the lumped mass.
    pub pde_residual: f64,
    /// Energy after each accepted step, starting with the initial guess.
    pub energy_history: Vec<f64>,
    pub gauge: Gauge,
    pub source: SourceSpec,
}

#[derive(Clone, Debug)]
pub struct EigenPair<'m> {
    pub lambda: f64,
    /// Nonnegative, normalized so that `Σ_T |T| u_T^p = 1`.
    pub field: ScalarField<'m>,
    pub iterations: usize,
    /// Rayleigh quotient after each inverse-iteration step.
    pub quotient_history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TorsionalRigidity {
    /// `∫ v`.
    pub from_u: f64,
    /// `∫ F^p(∇v)`.
    pub from_energy: f64,
    /// `(∫|v|)^p / ∫ F^p(∇v)`, which equals `T^{p-1}` at the minimizer.
    pub variational_quotient: f64,
    pub relative_gap: f64,
}

/// Anisotropic p-torsion function: minimizes `∫ (1/p)F^p(∇v) − ∫ v`.
pub fn solve_torsion<'m>(mesh: &'m TriMesh, gauge: &Gauge, p: f64, opts: &SolverOptions) -> Result<SolveReport<'m>> {
    solve_dirichlet(mesh, gauge, &SourceSpec::torsion(p), opts)
}

/// Critical point of `∫ (1/p)|x|^{-bp}F^p(∇u) − ∫ G(x, u)` reached by descent from zero.
pub fn solve_dirichlet<'m>(
    mesh: &'m TriMesh,
    gauge: &Gauge,
    src: &SourceSpec,
    opts: &SolverOptions,
) -> Result<SolveReport<'m>> {
    solve_dirichlet_from(mesh, gauge, src, opts, None)
}

/// As [`solve_dirichlet`], starting from the given nodal values (boundary values are ignored).
pub fn solve_dirichlet_from<'m>(
    mesh: &'m TriMesh,
    gauge: &Gauge,
    src: &SourceSpec,
    opts: &SolverOptions,
    initial: Option<&[f64]>,
) -> Result<SolveReport<'m>> {
    src.validate()?;
    let disc = Discretization::new(mesh, gauge, src.p, src.weight_b)?;
    let x0 = match initial {
        Some(u) if u.len() != mesh.n_vertices() => {
            return Err(Error::DimensionMismatch { expected: mesh.n_vertices(), found: u.len() })
        }
        Some(u) => disc.restrict(u),
        None => vec![0.0; disc.n_free()],
    };
    let load = Load::Source(src);
    let min = minimize(&disc, load, x0, opts)?;
    let u = disc.expand(&min.x);
    if !min.converged {
        return Err(Error::NoConvergence { iterations: min.iterations, grad_norm: min.grad_norm, best: u });
    }
    let pde_residual = residual(&disc, load, &u);
    Ok(SolveReport {
        field: ScalarField::new(mesh, u)?,
        energy: min.energy,
        grad_norm: min.grad_norm,
        iterations: min.iterations,
        converged: true,
        pde_residual,
        energy_history: min.history,
        gauge: gauge.clone(),
        source: src.clone(),
    })
}

/// First Dirichlet eigenpair of the anisotropic p-Laplacian by inverse iteration.
pub fn solve_eigen<'m>(mesh: &'m TriMesh, gauge: &Gauge, p: f64, opts: &SolverOptions) -> Result<EigenPair<'m>> {
    let disc = Discretization::new(mesh, gauge, p, 0.0)?;
    let normalize = |u: &mut Vec<f64>| {
        let n = disc.lq_norm_pow(u, p).powf(1.0 / p);
        u.iter_mut().for_each(|x| *x /= n);
    };
    let mut u = disc.expand(&vec![1.0; disc.n_free()]);
    normalize(&mut u);
    let mut lambda = disc.gradient_form(&u);
    let mut history = vec![lambda];
    let mut w0 = vec![0.0; disc.n_free()];
    for it in 1..=opts.eigen_max_iters {
        let load = disc.centroid_power(&u, p);
        let min = minimize(&disc, Load::Linear(&load), w0, opts)?;
        if !min.converged {
            return Err(Error::NoConvergence { iterations: min.iterations, grad_norm: min.grad_norm, best: u });
        }
        let mut next = disc.expand(&min.x);
        normalize(&mut next);
        let quotient = disc.gradient_form(&next);
        history.push(quotient);
        let change = (lambda - quotient).abs() / quotient;
        u = next;
        lambda = quotient;
        w0 = disc.restrict(&u).iter().map(|x| x * lambda.powf(-1.0 / (p - 1.0))).collect();
        if change < opts.eigen_tol {
            let mut values = u;
            values.iter_mut().for_each(|x| *x = x.max(0.0));
            return Ok(EigenPair { lambda, field: ScalarField::new(mesh, values)?, iterations: it, quotient_history: history });
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.eigen_max_iters,
        grad_norm: (history[history.len() - 2] - lambda).abs() / lambda,
        best: u,
    })
}

/// Both forms of the torsional rigidity of a torsion solution, and the variational quotient.
pub fn torsional_rigidity(report: &SolveReport<'_>, gauge: &Gauge, p: f64) -> TorsionalRigidity {
    let v = &report.field;
    let from_u = v.integrate_with(|_, u, _| u);
    let from_energy = v.gauge_integral(gauge, p);
    let abs = v.integrate_with(|_, u, _| u.abs());
    TorsionalRigidity {
        from_u,
        from_energy,
        variational_quotient: abs.powf(p) / from_energy,
        relative_gap: (from_u - from_energy).abs() / from_u.abs(),
    }
}

struct Minimum {
    x: Vec<f64>,
    energy: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;

fn minimize(disc: &Discretization<'_>, load: Load<'_>, mut x: Vec<f64>, opts: &SolverOptions) -> Result<Minimum> {
    let mut u = disc.expand(&x);
    let e0 = disc.energy(load, &u);
    if !e0.is_finite() {
        return Err(Error::NonCoerciveSource { iterations: 0, energy: e0 });
    }
    let floor = -1e10 * (1.0 + e0.abs());
    let mut history = vec![e0];
    let mut stalled = 0;
    let mut iterations = 0;
    loop {
        let (e, g) = disc.energy_grad(load, &u);
        let pg = disc.precondition(&g);
        let grad_norm = dot(&g, &pg).max(0.0).sqrt();
        if grad_norm < opts.tol || stalled >= 3 || iterations >= opts.max_iters {
            return Ok(Minimum { x, energy: e, grad_norm, iterations, converged: grad_norm <= opts.tol, history });
        }
        iterations += 1;

        let newton = if opts.newton { newton_direction(disc, load, &u, &g) } else { None };
        let mut step = None;
        if let Some(d) = newton {
            step = line_search(disc, load, &x, e, &g, &d, 40);
        }
        if step.is_none() {
            let d: Vec<f64> = pg.iter().map(|v| -v).collect();
            step = line_search(disc, load, &x, e, &g, &d, 60);
        }
        let Some((x_new, e_new)) = step else {
            // no decrease possible at floating-point resolution
            return Ok(Minimum { x, energy: e, grad_norm, iterations, converged: grad_norm <= opts.tol, history });
        };
        if e_new < floor {
            return Err(Error::NonCoerciveSource { iterations, energy: e_new });
        }
        stalled = if e - e_new <= opts.energy_tol * e.abs().max(f64::MIN_POSITIVE) { stalled + 1 } else { 0 };
        history.push(e_new);
        x = x_new;
        u = disc.expand(&x);
    }
}

fn newton_direction(disc: &Discretization<'_>, load: Load<'_>, u: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let hess = disc.hessian(load, u).ok()?;
    let factor = disc.factor(&hess).ok()?;
    let d: Vec<f64> = factor.solve(g).iter().map(|v| -v).collect();
    if d.iter().all(|v| v.is_finite()) && dot(&d, g) < 0.0 { Some(d) } else { None }
}

/// Armijo backtracking from the unit step, with a round-off allowance in the
/// sufficient-decrease test.
fn line_search(
    disc: &Discretization<'_>,
    load: Load<'_>,
    x: &[f64],
    e: f64,
    g: &[f64],
    d: &[f64],
    max_halvings: usize,
) -> Option<(Vec<f64>, f64)> {
    let slope = dot(g, d);
    let roundoff = 1e-14 * (1.0 + e.abs());
    let mut t = 1.0;
    for _ in 0..max_halvings {
        let trial: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        let e_trial = disc.energy(load, &disc.expand(&trial));
        if e_trial.is_finite() && e_trial <= e + ARMIJO * t * slope + roundoff && e_trial <= e + roundoff {
            if e_trial == e && trial == x {
                return None;
            }
            return Some((trial, e_trial));
        }
        t *= 0.5;
    }
    None
}

fn residual(disc: &Discretization<'_>, load: Load<'_>, u: &[f64]) -> f64 {
    let (_, g) = disc.energy_grad(load, u);
    g.iter().zip(disc.lumped_mass()).map(|(g, m)| (g / m).abs()).fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests;
