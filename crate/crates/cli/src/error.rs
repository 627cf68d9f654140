use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}: {message}")]
    Parse { source_name: String, message: String },
    #[error("unknown task `{0}` (expected one of model-check, expand, aklt-verify, aklt-split, correlate)")]
    UnknownTask(String),
    #[error("missing key(s) for {task}: {}", keys.join(", "))]
    MissingKeys { task: String, keys: Vec<String> },
    #[error("invalid value for {key}: {message}")]
    InvalidValue { key: String, message: String },
    #[error("invalid operator spec `{spec}`: {message}")]
    InvalidOperator { spec: String, message: String },
    #[error("unknown plot kind `{0}`")]
    UnknownPlotKind(String),
    #[error("report of task {task} has no {kind} series")]
    MissingSeries { task: String, kind: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{task}: {source}")]
    Core {
        task: String,
        #[source]
        source: relbound_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const AUDIT_FAILURE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const INPUT_ERROR: i32 = 4;
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use relbound_core::Error as E;
        match self {
            CliError::Core { source, .. } => match source {
                E::DimensionOverflow { .. }
                | E::CapExceeded { .. }
                | E::NonConvergent(_)
                | E::DegenerateGroundState(_)
                | E::Convergence(_)
                | E::InSpectrum(_)
                | E::Numerical(_) => exit::INFEASIBLE,
                _ => exit::INPUT_ERROR,
            },
            _ => exit::INPUT_ERROR,
        }
    }
}
