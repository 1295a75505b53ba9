//! Error type shared by the corpus, smoothing, model and solver modules.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input vector has the wrong dimension.
    DimensionMismatch { expected: usize, found: usize },
    /// Domain or configuration parameters are out of range.
    InvalidConfig(String),
    /// The requested (objective, domain shape) pair has no closed-form
    /// smoothed reference.
    ClosedFormUnavailable { objective: String },
    /// Tensor quadrature grids are limited to low dimensions.
    QuadratureDimension { dim: usize, max: usize },
    /// Averaging radius too small for finite-difference Hessian estimation.
    DegenerateDomain { radius: f64 },
    /// The regularized Hessian could not be factorized even after jitter.
    IndefiniteHessian,
    /// No halving count satisfied the sufficient-decrease inequality.
    LineSearchExhausted { max_halvings: u32 },
    /// The superlinear method requires a convex objective.
    NotConvex { objective: String },
    /// An estimate contained NaN or infinite entries.
    NonFiniteEstimate,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::ClosedFormUnavailable { objective } => {
                write!(
                    f,
                    "no closed-form smoothing for `{objective}` on this domain"
                )
            }
            Error::QuadratureDimension { dim, max } => {
                write!(f, "quadrature unavailable in dimension {dim} (max {max})")
            }
            Error::DegenerateDomain { radius } => {
                write!(
                    f,
                    "averaging radius {radius:e} too small for finite differences"
                )
            }
            Error::IndefiniteHessian => write!(f, "regularized Hessian is numerically indefinite"),
            Error::LineSearchExhausted { max_halvings } => {
                write!(f, "line search exhausted after {max_halvings} halvings")
            }
            Error::NotConvex { objective } => {
                write!(f, "objective `{objective}` is not convex")
            }
            Error::NonFiniteEstimate => write!(f, "estimate contains non-finite entries"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
