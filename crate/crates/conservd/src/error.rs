//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Expression could not be parsed. `position` is a byte offset into the input.
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// Identifier is not a known variable or function.
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },

    /// Variable index outside `1..=dim`.
    #[error("variable `x{index}` exceeds dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },

    /// A field or integrand evaluated to NaN/inf where a finite value is required.
    #[error("non-finite value in {context} at point {point:?}")]
    NonFinite { context: String, point: Vec<f64> },

    /// A weight that must be positive was not.
    #[error("weight is non-positive ({value}) at point {point:?}")]
    NonPositiveWeight { value: f64, point: Vec<f64> },

    /// Rejection sampling accepted too few proposals; the bounding box is
    /// far too loose or the gauge is misconfigured.
    #[error("rejection acceptance rate {rate:.2e} below 1e-4 for gauge shell [{inner}, {outer})")]
    AcceptanceRate { rate: f64, inner: f64, outer: f64 },

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge on [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64 },

    /// Diffusion matrix is not positive semi-definite where a square root is needed.
    #[error("diffusion matrix not positive semi-definite at point {point:?} (eigenvalue {eigenvalue})")]
    NotPositiveDefinite { point: Vec<f64>, eigenvalue: f64 },

    /// Criterion constants outside their admissible range.
    #[error("invalid constants: {0}")]
    InvalidConstants(String),

    /// Bad run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
