use thiserror::Error;

/// Errors raised by the evaluators and the verification harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Jacobi parameters (alpha = {alpha}, beta = {beta}): both must exceed -1")]
    InvalidParams { alpha: f64, beta: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("sample at theta = {theta} lies within {margin} of an endpoint of (0, pi)")]
    EndpointProximity { theta: f64, margin: f64 },

    #[error("spectral series did not converge by n = {n} (t = {t}); t is too small for the term budget")]
    NonConvergence { t: f64, n: usize },

    #[error("invalid derivative spec: {0}")]
    InvalidSpec(String),

    #[error("theta and phi coincide (|theta - phi| = {0:e}); the kernel norm diverges on the diagonal")]
    Coincidence(f64),

    #[error("interval endpoints out of order: a = {a} > b = {b}")]
    Ordering { a: f64, b: f64 },

    #[error("invalid Pi-measure index a = {0}; must be >= -1/2")]
    InvalidPiIndex(f64),

    #[error("gamma = {gamma} outside the admissible range: {reason}")]
    InvalidGamma { gamma: f64, reason: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
