use thiserror::Error;

use crate::report::Report;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("discriminant mismatch: sqrt({left}) vs sqrt({right})")]
    DiscriminantMismatch { left: String, right: String },

    #[error("division by zero")]
    DivisionByZero,

    #[error("{0} is not a perfect square in the working field")]
    NotAPerfectSquare(String),

    #[error("square root of negative value {0}")]
    NegativeRadicand(String),

    #[error("singular matrix: no usable pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("floating-point overflow in {0}")]
    Overflow(&'static str),

    #[error("support points {0} and {1} coincide")]
    DegenerateSupport(i64, i64),

    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: i64, value: f64 },

    #[error("built masses violate the moment system (row {row}, residual {residual:e})")]
    MomentSystemMismatch { row: usize, residual: f64 },

    #[error("composed kernel differs from direct build (max deviation {deviation:e} at index {index})")]
    CompositionMismatch { index: i64, deviation: f64 },

    #[error("state magnitude {value} exceeded bound {bound} at step {step}")]
    StateBoundExceeded { step: usize, value: f64, bound: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("verification failed: {}", .0.identity)]
    VerificationFailed(Box<Report>),

    #[error("parse error: {0}")]
    Parse(String),
}
