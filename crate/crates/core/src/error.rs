use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum SpbkError {
    #[error("sizing error: {0}")]
    Sizing(String),

    #[error("value {value} outside the unit interval")]
    Domain { value: f64 },

    #[error("axis {axis} is degenerate: {reason}")]
    DegenerateAxis { axis: usize, reason: String },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("no observations within bandwidth {h} of x0 = {x0}")]
    EmptyWindow { x0: f64, h: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("efficiency undefined: SPBK error sum is zero")]
    DegenerateEfficiency,

    #[error("study failed: {failed} of {total} replications failed (first: {first})")]
    Study {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SpbkError {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            SpbkError::Config(_) | SpbkError::Parameter(_) => 2,
            SpbkError::Parse { .. } | SpbkError::Io { .. } => 3,
            SpbkError::Study { .. } => 5,
            _ => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SpbkError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SpbkError>;
