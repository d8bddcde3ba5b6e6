//! Numerical laboratory for anisotropic p-Laplacian problems on planar
//! polygons and for radial torsion problems on constant-curvature balls.
//!
//! The pieces are layered: [`gauge`] evaluates anisotropic norms and their
//! polars, [`mesh`] triangulates polygons, [`solver`] minimizes the P1 energies,
//! [`field`] integrates and level-sets the results, and [`identities`],
//! [`bounds`] and [`spaceform`] turn solutions into checked inequalities.

pub mod bounds;
pub mod error;
pub mod field;
pub mod gauge;
pub mod identities;
pub mod mesh;
pub mod solver;
pub mod spaceform;

pub use bounds::{BoundOptions, BoundReport};
pub use error::{Error, Result};
pub use field::{LevelProfile, ScalarField};
pub use gauge::{Gauge, GaugeFamily};
pub use mesh::{triangulate, Polygon, TriMesh};
pub use solver::{solve_dirichlet, solve_eigen, solve_torsion, SolverOptions, SourceSpec};
pub use spaceform::{solve_radial_torsion, SpaceformBall};
