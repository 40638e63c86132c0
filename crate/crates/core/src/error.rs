//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-contract input.
    #[error("input error: {0}")]
    Input(String),

    /// A set function failed the submodularity check on the pair `(s, t)`.
    #[error("not submodular: F({s:?}) + F({t:?}) < F(union) + F(intersection) by {gap:.3e}")]
    NotSubmodular { s: Vec<usize>, t: Vec<usize>, gap: f64 },

    /// Requested operation exceeds a documented size limit.
    #[error("capability limit: {0}")]
    Capability(String),

    /// A polytope or linear program has no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An iterative method hit its iteration cap.
    #[error("did not converge after {iterations} iterations (best value {best_value:.6e})")]
    Convergence {
        iterations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    /// A guarantee that should hold by construction was violated.
    #[error("internal check failed: {0}")]
    Internal(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Process exit code: 2 for input and usage problems, 1 for computational failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::NotSubmodular { .. }
            | Error::Capability(_)
            | Error::Parse { .. }
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Infeasible(_) | Error::Convergence { .. } | Error::Internal(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
