use thiserror::Error;

use crate::numerics::QuadError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point is {distance:.3e} a.u. from the source, inside the guard radius {guard:.3e}")]
    TooCloseToSource { distance: f64, guard: f64 },
    #[error("evaluation failed at (x, y) = ({x}, {y}): {source}")]
    AtPoint {
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("grid is not symmetric about the origin")]
    AsymmetricGrid,
    #[error("wave function nearly vanishes on the winding contour (min |psi| = {min_modulus:.3e})")]
    ZeroOnContour { min_modulus: f64 },
    #[error("phase unresolved on the winding contour after {samples} samples")]
    Unresolved { samples: usize },
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
