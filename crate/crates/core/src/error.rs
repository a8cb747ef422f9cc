use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix error: {0}")]
    Matrix(String),
    #[error("degenerate basis: every basis vector is numerically zero")]
    DegenerateBasis,
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid coefficients: {0}")]
    Coefficients(String),
    #[error("numerical breakdown at iteration {iteration}: {reason}")]
    Breakdown {
        iteration: usize,
        reason: String,
        last_iterate: Option<Box<crate::sphere::PairedVector>>,
    },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
