use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("Hessian of F^p is undefined at the origin")]
    DegenerateAtZero,

    #[error("gauge is not twice differentiable at {0:?}")]
    NonSmoothGauge(Vec<f64>),

    #[error("operation requires dimension {expected}, gauge has dimension {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weight |x|^-{exponent} is not integrable in two dimensions")]
    WeightTooSingular { exponent: f64 },

    #[error("solver did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NoConvergence {
        iterations: usize,
        grad_norm: f64,
        /// Nodal values of the best iterate reached.
        best: Vec<f64>,
    },

    #[error("energy is unbounded below along the iterates (energy {energy:e} after {iterations} iterations)")]
    NonCoerciveSource { iterations: usize, energy: f64 },

    #[error("identity requires a different regime: {0}")]
    WrongRegime(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("geodesic radius {theta} is not admissible for curvature {kappa}")]
    InvalidRadius { theta: f64, kappa: f64 },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
