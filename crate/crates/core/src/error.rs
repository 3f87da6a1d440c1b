use thiserror::Error;

use crate::special::SpecialError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse {what} `{input}`: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("obj line {line}: {reason}")]
    Obj { line: usize, reason: String },

    #[error("vertex {vertex} projects from camera depth {depth} (singular projection)")]
    SingularProjection { vertex: usize, depth: f64 },

    #[error("distribution `{0}` is not differentiable; gradients need a continuous CDF")]
    NonDifferentiable(String),

    #[error("non-finite gradient at parameter index {index}")]
    NonFiniteGradient { index: usize },

    #[error(transparent)]
    Special(#[from] SpecialError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            what,
            input: input.to_string(),
            reason: reason.into(),
        }
    }

    /// Configuration errors (bad flags, bad specs, rejected renderers) as
    /// opposed to runtime and numeric failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Parse { .. } | Error::NonDifferentiable(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
