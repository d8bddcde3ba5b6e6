//! Torsion problem `Δu = −1`, `u = 0` on the boundary, on geodesic balls of the
//! simply connected space forms of curvature −1, 0 or +1, reduced to radial
//! quadrature, together with the boundary inequalities and the Reilly identity
//! that the torsion function satisfies there.
//!
//! With `sn_κ` the warping function and `ct_κ = sn_κ′/sn_κ`, the radial torsion
//! profile satisfies `u′(r) = −sn_κ(r)^{1−n} ∫₀^r sn_κ^{n−1}` and
//! `u″ = −1 − (n−1) ct_κ u′`.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 2001;
pub const MIN_GRID: usize = 1000;

/// Tolerance scale for comparisons between quadrature values.
const QUADRATURE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceformBall {
    pub n: usize,
    pub kappa: f64,
    pub theta: f64,
    /// Number of radial grid points; always odd.
    pub grid: usize,
}

impl SpaceformBall {
    /// Ball with the default grid.
    pub fn new(n: usize, kappa: f64, theta: f64) -> Result<Self> {
        Self::with_grid(n, kappa, theta, DEFAULT_GRID)
    }

    /// An even `grid` is rounded up to the next odd count.
    pub fn with_grid(n: usize, kappa: f64, theta: f64, grid: usize) -> Result<Self> {
        if grid < MIN_GRID {
            return Err(Error::InvalidParameter(format!("radial grid needs at least {MIN_GRID} points, got {grid}")));
        }
        let ball = Self::unchecked(n, kappa, theta, grid);
        ball.validate()?;
        Ok(ball)
    }

    pub(crate) fn unchecked(n: usize, kappa: f64, theta: f64, grid: usize) -> Self {
        Self { n, kappa, theta, grid: grid | 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be at least 2, got {}", self.n)));
        }
        if ![-1.0, 0.0, 1.0].contains(&self.kappa) {
            return Err(Error::InvalidParameter(format!("curvature must be -1, 0 or 1, got {}", self.kappa)));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) || (self.kappa == 1.0 && self.theta >= std::f64::consts::PI) {
            return Err(Error::InvalidRadius { theta: self.theta, kappa: self.kappa });
        }
        if self.grid < 3 {
            return Err(Error::InvalidParameter("radial grid needs at least 3 points".into()));
        }
        Ok(())
    }

    pub fn sn(&self, r: f64) -> f64 {
        match self.kappa {
            k if k > 0.0 => r.sin(),
            k if k < 0.0 => r.sinh(),
            _ => r,
        }
    }

    pub fn ct(&self, r: f64) -> f64 {
        match self.kappa {
            k if k > 0.0 => r.cos() / r.sin(),
            k if k < 0.0 => r.cosh() / r.sinh(),
            _ => 1.0 / r,
        }
    }

    /// Density of the volume element in geodesic polar coordinates, per unit sphere area.
    fn density(&self, r: f64) -> f64 {
        self.sn(r).powi(self.n as i32 - 1)
    }

    /// Area of the unit sphere `S^{n−1}`.
    pub fn sphere_area(&self) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let (mut area, mut k) = if self.n % 2 == 0 { (two_pi, 2) } else { (2.0 * two_pi, 3) };
        while k < self.n {
            area *= two_pi / k as f64;
            k += 2;
        }
        area
    }

    /// Mean curvature of the boundary sphere, `ct_κ(θ)`.
    pub fn boundary_mean_curvature(&self) -> f64 {
        self.ct(self.theta)
    }

    pub fn radii(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.grid).map(|i| if i + 1 == self.grid { self.theta } else { i as f64 * h }).collect()
    }

    fn step(&self) -> f64 {
        self.theta / (self.grid - 1) as f64
    }

    /// `∫ f dV` for a radial function sampled on the grid, by composite Simpson.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let r = self.radii();
        let weighted: Vec<f64> = values.iter().zip(&r).map(|(v, &r)| if r == 0.0 { 0.0 } else { v * self.density(r) }).collect();
        self.sphere_area() * composite_simpson(&weighted, self.step())
    }

    pub fn area_of_boundary(&self) -> f64 {
        self.sphere_area() * self.density(self.theta)
    }

    /// `(sn_κ(s)/s)^{n−1}`, smooth and even in `s`.
    fn density_ratio(&self, s: f64) -> f64 {
        if s == 0.0 { 1.0 } else { (self.sn(s) / s).powi(self.n as i32 - 1) }
    }

    /// `∫_a^b sn_κ^{n−1}` by product Simpson: the ratio `(sn_κ(s)/s)^{n−1}` is
    /// interpolated at `a`, the midpoint and `b`, and the quadratic is
    /// integrated exactly against `s^{n−1}`.
    fn density_integral(&self, a: f64, b: f64) -> f64 {
        let m = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let (qa, qm, qb) = (self.density_ratio(a), self.density_ratio(m), self.density_ratio(b));
        let c1 = (qb - qa) / (2.0 * half);
        let c2 = (qa - 2.0 * qm + qb) / (2.0 * half * half);
        // moments ∫_{-half}^{half} (m + t)^{n−1} t^k dt for k = 0, 1, 2
        let e = self.n - 1;
        let mut moments = [0.0; 3];
        let mut binom = 1.0;
        for i in 0..=e {
            let mp = m.powi((e - i) as i32);
            for (k, mom) in moments.iter_mut().enumerate() {
                let deg = i + k;
                if deg % 2 == 0 {
                    *mom += binom * mp * 2.0 * half.powi(deg as i32 + 1) / (deg + 1) as f64;
                }
            }
            binom *= (e - i) as f64 / (i + 1) as f64;
        }
        qm * moments[0] + c1 * moments[1] + c2 * moments[2]
    }
}

fn composite_simpson(values: &[f64], h: f64) -> f64 {
    let last = values.len() - 1;
    let inner: f64 = values[1..last].iter().enumerate().map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v }).sum();
    h / 3.0 * (values[0] + inner + values[last])
}

#[derive(Clone, Debug, Serialize)]
pub struct RadialSolution {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub u_prime: Vec<f64>,
    pub u_double_prime: Vec<f64>,
    /// Torsional rigidity `∫ u dV`.
    pub torsion: f64,
    pub volume: f64,
    /// Area of the boundary sphere.
    pub area: f64,
    pub h_boundary: f64,
    pub max_boundary_grad_sq: f64,
}

impl RadialSolution {
    pub fn boundary_second_derivative(&self) -> f64 {
        self.u_double_prime[self.u_double_prime.len() - 1]
    }

    pub fn boundary_derivative(&self) -> f64 {
        self.u_prime[self.u_prime.len() - 1]
    }

    /// Tab-free CSV with columns `r,u,u_prime,u_double_prime`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,u_prime,u_double_prime\n");
        for i in 0..self.r.len() {
            out.push_str(&format!(
                "{:.11e},{:.11e},{:.11e},{:.11e}\n",
                self.r[i], self.u[i], self.u_prime[i], self.u_double_prime[i]
            ));
        }
        out
    }
}

/// Radial torsion function of a geodesic ball.
pub fn solve_radial_torsion(ball: &SpaceformBall) -> Result<RadialSolution> {
    ball.validate()?;
    let n = ball.n as f64;
    let r = ball.radii();
    let w = |s: f64| ball.density(s);
    let derivative = |s: f64, mass: f64| if s == 0.0 { 0.0 } else { -mass / w(s) };

    let mut mass = vec![0.0; r.len()];
    for i in 1..r.len() {
        mass[i] = mass[i - 1] + ball.density_integral(r[i - 1], r[i]);
    }
    let u_prime: Vec<f64> = r.iter().zip(&mass).map(|(&s, &m)| derivative(s, m)).collect();

    let mut u = vec![0.0; r.len()];
    for i in (0..r.len() - 1).rev() {
        let mid = 0.5 * (r[i] + r[i + 1]);
        let up_mid = derivative(mid, mass[i] + ball.density_integral(r[i], mid));
        u[i] = u[i + 1] - (r[i + 1] - r[i]) / 6.0 * (u_prime[i] + 4.0 * up_mid + u_prime[i + 1]);
    }

    let u_double_prime: Vec<f64> = r
        .iter()
        .zip(&u_prime)
        .map(|(&s, &up)| if s == 0.0 { -1.0 / n } else { -1.0 - (n - 1.0) * ball.ct(s) * up })
        .collect();

    let sphere = ball.sphere_area();
    let boundary_grad = u_prime[u_prime.len() - 1];
    Ok(RadialSolution {
        torsion: ball.integrate(&u),
        volume: sphere * mass[mass.len() - 1],
        area: sphere * w(ball.theta),
        h_boundary: ball.boundary_mean_curvature(),
        max_boundary_grad_sq: boundary_grad * boundary_grad,
        r,
        u,
        u_prime,
        u_double_prime,
    })
}

fn quadrature_tolerance(lhs: f64, rhs: f64) -> f64 {
    QUADRATURE_TOL * lhs.abs().max(rhs.abs()).max(1.0)
}

/// Pointwise bound on the second normal derivative at the boundary:
/// `u″(θ) ≤ −1/n − (n−1)κ T/V`.
pub fn check_normal_hessian_min(sol: &RadialSolution, ball: &SpaceformBall) -> BoundReport {
    let n = ball.n as f64;
    let lhs = sol.boundary_second_derivative();
    let rhs = -1.0 / n - (n - 1.0) * ball.kappa * sol.torsion / sol.volume;
    BoundReport::at_most(lhs, rhs, quadrature_tolerance(lhs, rhs))
}

/// Integrated bound on the second normal derivative for mean-convex balls:
/// `A u″(θ) ≤ (n−1)(V/n − κT)^{1/2}(A H)^{1/2} − A`.
pub fn check_normal_hessian_integral(sol: &RadialSolution, ball: &SpaceformBall) -> Result<BoundReport> {
    let n = ball.n as f64;
    if sol.h_boundary < 0.0 {
        return Err(Error::HypothesisViolated(format!("boundary mean curvature {} is negative", sol.h_boundary)));
    }
    let gap = sol.volume / n - ball.kappa * sol.torsion;
    if gap < 0.0 {
        return Err(Error::HypothesisViolated(format!("V/n − κT = {gap} is negative")));
    }
    let lhs = sol.area * sol.boundary_second_derivative();
    let rhs = (n - 1.0) * gap.sqrt() * (sol.area * sol.h_boundary).sqrt() - sol.area;
    Ok(BoundReport::at_most(lhs, rhs, quadrature_tolerance(lhs, rhs)))
}

/// `max |∇u|² ≥ (n+2)T/(nV) + (2(n−1)κ/V) ∫ u|∇u|²` on the boundary.
pub fn check_boundary_gradient(sol: &RadialSolution, ball: &SpaceformBall) -> BoundReport {
    let n = ball.n as f64;
    let u_grad_sq: Vec<f64> = sol.u.iter().zip(&sol.u_prime).map(|(u, up)| u * up * up).collect();
    let lhs = sol.max_boundary_grad_sq;
    let rhs = (n + 2.0) * sol.torsion / (n * sol.volume)
        + 2.0 * (n - 1.0) * ball.kappa / sol.volume * ball.integrate(&u_grad_sq);
    BoundReport::at_least(lhs, rhs, quadrature_tolerance(lhs, rhs))
}

/// `∫ g(u)(2(n−1)u g(u)/n − 3G(u) − (n−1)κu²) ≥ ∫_∂ (∂u/∂ν)³` for the constant
/// source `g ≡ g_const`, whose solution is `g_const` times the torsion function.
pub fn check_cubic_flux(ball: &SpaceformBall, g_const: f64) -> Result<BoundReport> {
    if !(g_const >= 0.0 && g_const.is_finite()) {
        return Err(Error::InvalidParameter(format!("source constant must be finite and nonnegative, got {g_const}")));
    }
    let sol = solve_radial_torsion(ball)?;
    let n = ball.n as f64;
    let integrand: Vec<f64> = sol
        .u
        .iter()
        .map(|&rho| {
            let u = g_const * rho;
            g_const * (2.0 * (n - 1.0) * u * g_const / n - 3.0 * g_const * u - (n - 1.0) * ball.kappa * u * u)
        })
        .collect();
    let lhs = ball.integrate(&integrand);
    let rhs = sol.area * (g_const * sol.boundary_derivative()).powi(3);
    Ok(BoundReport::at_least(lhs, rhs, quadrature_tolerance(lhs, rhs)))
}

/// The same inequality for a constant solution `u ≡ c` of a source with
/// `g(c) = 0`: every term vanishes.
pub fn check_constant_solution(ball: &SpaceformBall, value: f64) -> Result<BoundReport> {
    ball.validate()?;
    let n = ball.n as f64;
    let g = 0.0;
    let big_g = 0.0;
    let integrand = vec![g * (2.0 * (n - 1.0) * value * g / n - 3.0 * big_g - (n - 1.0) * ball.kappa * value * value); ball.grid];
    let lhs = ball.integrate(&integrand);
    let rhs = ball.area_of_boundary() * 0.0f64.powi(3);
    Ok(BoundReport::at_least(lhs, rhs, quadrature_tolerance(lhs, rhs)))
}

/// Relative residual `|L − R|/(|L| + |R|)` of the Reilly identity for a radial
/// function with derivatives `f′`, `f″` on the ball grid, where
/// `L = ∫((Δf)² − |∇²f|² − (n−1)κ f′²)` and `R = (n−1) H A f′(θ)²`.
pub fn reilly_residual_radial(ball: &SpaceformBall, f_prime: &[f64], f_double_prime: &[f64]) -> Result<f64> {
    ball.validate()?;
    for len in [f_prime.len(), f_double_prime.len()] {
        if len != ball.grid {
            return Err(Error::DimensionMismatch { expected: ball.grid, found: len });
        }
    }
    let n = ball.n as f64;
    let r = ball.radii();
    let integrand: Vec<f64> = (0..ball.grid)
        .map(|i| {
            if r[i] == 0.0 {
                return 0.0;
            }
            let (fp, fpp) = (f_prime[i], f_double_prime[i]);
            let c = ball.ct(r[i]) * fp;
            let laplacian = fpp + (n - 1.0) * c;
            laplacian * laplacian - fpp * fpp - (n - 1.0) * c * c - (n - 1.0) * ball.kappa * fp * fp
        })
        .collect();
    let lhs = ball.integrate(&integrand);
    let fp_end = f_prime[ball.grid - 1];
    let rhs = (n - 1.0) * ball.boundary_mean_curvature() * ball.area_of_boundary() * fp_end * fp_end;
    Ok((lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1e-300))
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub kappa: f64,
    pub theta: f64,
    pub check: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
}

/// All boundary checks and the Reilly residual of the torsion function for
/// every ball in the product grid. Inadmissible combinations (θ ≥ π on the
/// sphere) are skipped; the integrated normal-derivative bound is skipped
/// where the boundary is not mean convex.
pub fn sweep(ns: &[usize], kappas: &[f64], thetas: &[f64], grid: usize, g_const: f64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        for &kappa in kappas {
            for &theta in thetas {
                let ball = match SpaceformBall::with_grid(n, kappa, theta, grid) {
                    Ok(b) => b,
                    Err(Error::InvalidRadius { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let sol = solve_radial_torsion(&ball)?;
                let mut push = |check: &'static str, r: BoundReport| {
                    rows.push(SweepRow { n, kappa, theta, check, lhs: r.lhs, rhs: r.rhs, slack: r.slack, satisfied: r.satisfied })
                };
                push("normal_hessian_min", check_normal_hessian_min(&sol, &ball));
                if let Ok(r) = check_normal_hessian_integral(&sol, &ball) {
                    push("normal_hessian_integral", r);
                }
                push("boundary_gradient", check_boundary_gradient(&sol, &ball));
                push("cubic_flux", check_cubic_flux(&ball, g_const)?);
                let residual = reilly_residual_radial(&ball, &sol.u_prime, &sol.u_double_prime)?;
                rows.push(SweepRow { n, kappa, theta, check: "reilly", lhs: residual, rhs: 1e-6, slack: 1e-6 - residual, satisfied: residual <= 1e-6 });
            }
        }
    }
    Ok(rows)
}

/// CSV with columns `n,kappa,theta,check,lhs,rhs,slack,satisfied`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("n,kappa,theta,check,lhs,rhs,slack,satisfied\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.11e},{:.11e},{:.11e},{}\n",
            r.n, r.kappa, r.theta, r.check, r.lhs, r.rhs, r.slack, r.satisfied
        ));
    }
    out
}
