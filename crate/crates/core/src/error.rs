use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the fitting, offsetting and reconstruction stages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("constraint matrix has row rank {rank} < {rows}")]
    RankDeficientConstraints { rank: usize, rows: usize },
    #[error("KKT saddle system is numerically singular")]
    SingularKkt,
    #[error("GCV score undefined: tr(H)/m = {0} >= 1")]
    DegenerateGcv(f64),
    #[error("every GCV grid cell was degenerate")]
    AllDegenerate,
    #[error("offset distance must be nonzero")]
    ZeroRadius,
    #[error("offset curvature is singular at a cusp (|1 + tau k| = {0:e})")]
    CuspSingularity(f64),
    #[error("unknown test function `{0}`")]
    UnknownTestFunction(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// True for failures of the numerical kernels, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix(_)
                | Error::RankDeficientConstraints { .. }
                | Error::SingularKkt
                | Error::DegenerateGcv(_)
                | Error::AllDegenerate
                | Error::CuspSingularity(_)
                | Error::Domain(_)
        )
    }
}
