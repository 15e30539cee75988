use thiserror::Error;

/// Errors surfaced by the numerical toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("evaluation error at z = {z}: {msg}")]
    Evaluation { z: f64, msg: String },
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("under-resolved sublayer: need roughly N >= {required} nodes, have {have}")]
    UnderResolved { required: usize, have: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
