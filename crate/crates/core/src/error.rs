use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A single schema or consistency problem found while validating a run description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Dotted key path into the configuration, e.g. `material[0].E`.
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum GsphError {
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration ({} problem(s)):\n{}", .0.len(), join_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("setup error: {0}")]
    Setup(String),

    #[error(
        "degenerate metric at particle {particle} ({neighbors} neighbors): condition number {condition:.3e}"
    )]
    SingularMetric {
        particle: u64,
        neighbors: usize,
        condition: f64,
    },

    #[error("inverted configuration at particle {particle}, step {step}: det(F) = {det:e}")]
    Inversion { particle: u64, step: u64, det: f64 },

    #[error("non-finite {quantity} at particle {particle}, step {step}")]
    NonFinite {
        quantity: &'static str,
        particle: u64,
        step: u64,
    },

    #[error("non-finite input to {0}")]
    NonFiniteInput(&'static str),

    #[error("unknown particle index {0}")]
    UnknownParticle(usize),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GsphError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GsphError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            GsphError::Parse { .. }
            | GsphError::Validation(_)
            | GsphError::Setup(_)
            | GsphError::SingularMetric { .. } => 1,
            GsphError::Inversion { .. }
            | GsphError::NonFinite { .. }
            | GsphError::NonFiniteInput(_)
            | GsphError::UnknownParticle(_) => 2,
            GsphError::Io { .. } => 3,
        }
    }
}

pub type Result<T, E = GsphError> = std::result::Result<T, E>;
