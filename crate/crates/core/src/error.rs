use std::path::PathBuf;

use crate::numerics::ConvergenceReport;

pub type Result<T> = std::result::Result<T, CasimirError>;

#[derive(Debug, thiserror::Error)]
pub enum CasimirError {
    /// An input violated a documented precondition.
    #[error("invalid input: {0}")]
    Domain(String),

    /// A configuration or material file failed validation.
    #[error("invalid {field}: {reason}")]
    Config { field: String, reason: String },

    /// A truncated series or quadrature did not reach its tolerance within
    /// the allotted budget. The best available estimate is carried along.
    #[error("no convergence in {what}: best estimate {estimate:.6e}, achieved relative error {:.2e}", report.achieved_rel_err)]
    NonConvergence {
        what: String,
        estimate: f64,
        report: ConvergenceReport,
    },

    /// `det(1 - M)` was not positive: the round-trip operator is not a
    /// contraction, which means overlapping or otherwise unphysical geometry.
    #[error("round-trip operator is not a contraction ({0}); bodies overlap or the geometry is unphysical")]
    NonContraction(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CasimirError {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CasimirError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 for invalid input, 3 for non-convergence, 4 for
    /// i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CasimirError::Domain(_)
            | CasimirError::Config { .. }
            | CasimirError::NonContraction(_) => 2,
            CasimirError::NonConvergence { .. } => 3,
            CasimirError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CasimirError::Io {
            path: path.into(),
            source,
        }
    }
}
