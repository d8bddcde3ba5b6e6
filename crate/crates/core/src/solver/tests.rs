use std::f64::consts::PI;

use super::*;
use crate::mesh::{triangulate, Polygon};

fn euclid() -> Gauge {
    Gauge::euclidean(2).unwrap()
}

fn disk(h: f64) -> TriMesh {
    triangulate(&Polygon::unit_disk(64).unwrap(), h).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// Torsional rigidity of the square `(-1, 1)²` from its double sine series.
pub(crate) fn square_torsion_series(terms: usize) -> f64 {
    let mut sum = 0.0;
    for m in (1..2 * terms).step_by(2) {
        for n in (1..2 * terms).step_by(2) {
            let (m, n) = (m as f64, n as f64);
            sum += 1.0 / (m * m * n * n * (m * m + n * n));
        }
    }
    1024.0 / PI.powi(6) * sum
}

#[test]
fn series_oracle() {
    let t = square_torsion_series(200);
    assert!((t - 0.5623).abs() < 1e-4, "{t}");
}

#[test]
fn disk_torsion_p2() {
    let m = disk(0.04);
    let r = solve_torsion(&m, &euclid(), 2.0, &opts()).unwrap();
    assert!(r.converged && r.grad_norm <= 1e-8);
    let t = torsional_rigidity(&r, &euclid(), 2.0);
    assert!((t.from_u / (PI / 8.0) - 1.0).abs() < 0.01, "{t:?}");
    assert!((r.field.max() / 0.25 - 1.0).abs() < 0.01);
    assert!(t.relative_gap < 1e-6);
    assert!((t.variational_quotient / t.from_u - 1.0).abs() < 1e-6);
    // interior positivity
    for (v, &x) in r.field.values().iter().enumerate() {
        if !m.is_boundary_vertex(v) {
            assert!(x > 0.0);
        }
    }
    assert!(r.pde_residual < 1e-6, "{}", r.pde_residual);
}

#[test]
fn disk_torsion_p3() {
    let m = disk(0.04);
    let r = solve_torsion(&m, &euclid(), 3.0, &opts()).unwrap();
    let t = torsional_rigidity(&r, &euclid(), 3.0);
    let want = 2.0 * PI / (7.0 * 2f64.sqrt());
    assert!((t.from_u / want - 1.0).abs() < 0.02, "{} vs {want}", t.from_u);
    assert!(t.relative_gap < 1e-5);
    assert!((t.variational_quotient / t.from_u.powi(2) - 1.0).abs() < 1e-5);
}

#[test]
fn energy_decreases_monotonically() {
    let m = disk(0.1);
    for (g, p) in [(euclid(), 2.0), (euclid(), 3.0), (Gauge::ellipse(2.0, 1.0).unwrap(), 2.5)] {
        let r = solve_torsion(&m, &g, p, &opts()).unwrap();
        for w in r.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-300));
        }
    }
}

#[test]
fn dirichlet_matches_torsion_and_series() {
    let m = disk(0.1);
    let a = solve_torsion(&m, &euclid(), 2.0, &opts()).unwrap();
    let b = solve_dirichlet(&m, &euclid(), &SourceSpec::constant(1.0, 2.0), &opts()).unwrap();
    for (x, y) in a.field.values().iter().zip(b.field.values()) {
        assert!((x - y).abs() <= 1e-10);
    }

    let sq = triangulate(&Polygon::square(2.0).unwrap(), 0.04).unwrap();
    let r = solve_dirichlet(&sq, &euclid(), &SourceSpec::constant(1.0, 2.0), &opts()).unwrap();
    let t = r.field.integrate_with(|_, u, _| u);
    assert!((t / square_torsion_series(200) - 1.0).abs() < 0.01, "{t}");
}

#[test]
fn linear_absorption_gives_zero() {
    let m = disk(0.1);
    let r = solve_dirichlet(&m, &euclid(), &SourceSpec::power(-1.0, 0.0, 2.0, 2.0), &opts()).unwrap();
    assert!(r.field.values().iter().all(|&x| x == 0.0));
}

#[test]
fn wulff_ball_torsion() {
    let g = Gauge::ellipse(2.0, 1.0).unwrap();
    let m = triangulate(&Polygon::ellipse(2.0, 1.0, 128).unwrap(), 0.05).unwrap();
    let r = solve_torsion(&m, &g, 2.0, &opts()).unwrap();
    let err = m
        .vertices()
        .iter()
        .zip(r.field.values())
        .map(|(x, u)| (u - (1.0 - g.polar(x).powi(2)) / 4.0).abs())
        .fold(0.0, f64::max);
    assert!(err <= 0.02 * 0.25, "{err}");
    assert!((r.field.max() / 0.25 - 1.0).abs() < 0.02);
}

#[test]
fn refinement_halves_differences() {
    let m0 = disk(0.08);
    let m1 = m0.refine_uniform();
    let m2 = m1.refine_uniform();
    let t: Vec<f64> = [&m0, &m1, &m2]
        .iter()
        .map(|m| solve_torsion(m, &euclid(), 2.0, &opts()).unwrap().field.integrate_with(|_, u, _| u))
        .collect();
    let ratio = (t[1] - t[0]).abs() / (t[2] - t[1]).abs();
    assert!(ratio >= 2.0, "{t:?} {ratio}");
}

#[test]
fn disk_eigenvalue() {
    let m = disk(0.04);
    let e = solve_eigen(&m, &euclid(), 2.0, &opts()).unwrap();
    assert!((e.lambda / 5.783185962946784 - 1.0).abs() < 0.01, "{}", e.lambda);
    assert!(e.field.values().iter().all(|&x| x >= 0.0));
    for w in e.quotient_history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{w:?}");
    }
}

#[test]
fn square_eigenvalue() {
    let m = triangulate(&Polygon::rectangle(0.0, 0.0, PI, PI).unwrap(), 0.08).unwrap();
    let e = solve_eigen(&m, &euclid(), 2.0, &opts()).unwrap();
    assert!((e.lambda / 2.0 - 1.0).abs() < 0.01, "{}", e.lambda);
}

#[test]
fn eigen_gauge_scaling() {
    let m = disk(0.1);
    let argmax = |u: &[f64]| u.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    for p in [2.0, 3.0] {
        let base = solve_eigen(&m, &euclid(), p, &opts()).unwrap();
        let a = 1.7;
        let scaled = solve_eigen(&m, &Gauge::ellipse(a, a).unwrap(), p, &opts()).unwrap();
        assert!((scaled.lambda / (a.powf(p) * base.lambda) - 1.0).abs() < 1e-6);
        assert_eq!(argmax(base.field.values()), argmax(scaled.field.values()));
        for w in base.quotient_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-10), "{w:?}");
        }
    }
}

#[test]
fn supercritical_growth_is_noncoercive_from_large_start() {
    let m = disk(0.15);
    let src = SourceSpec::power(1.0, 0.0, 4.0, 2.0);
    // zero is a strict local minimum
    let r = solve_dirichlet(&m, &euclid(), &src, &opts()).unwrap();
    assert!(r.field.values().iter().all(|&x| x == 0.0));
    let start = vec![50.0; m.n_vertices()];
    let err = solve_dirichlet_from(&m, &euclid(), &src, &opts(), Some(&start)).unwrap_err();
    assert!(matches!(err, Error::NonCoerciveSource { .. }), "{err:?}");
}

#[test]
fn iteration_cap_reports_best_iterate() {
    let m = disk(0.15);
    let o = SolverOptions { max_iters: 1, newton: false, ..opts() };
    match solve_torsion(&m, &euclid(), 3.0, &o) {
        Err(Error::NoConvergence { iterations, best, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(best.len(), m.n_vertices());
        }
        other => panic!("{other:?}"),
    }
}
