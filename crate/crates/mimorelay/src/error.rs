use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulator library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The equivalent baseband channel is too ill-conditioned to invert.
    /// Callers resample the realization and count the event.
    #[error("singular equivalent channel (condition number {condition:.3e})")]
    SingularChannel { condition: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("simulation failure: {0}")]
    SimulationFailure(String),

    #[error("optimizer failure: {0}")]
    OptimizerFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown experiment `{0}` (run `mimorelay list` for the known set)")]
    UnknownExperiment(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
