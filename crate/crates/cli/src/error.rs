use std::path::PathBuf;

use semgrid::pipeline::{Stage, StageError};
use semgrid::Error;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
/// Anything that is neither bad input nor a doorless result.
pub const EXIT_FAILURE: u8 = 1;
/// Unreadable or inconsistent inputs and invalid flags.
pub const EXIT_INPUT: u8 = 2;
/// The run completed but no door hypothesis survived validation.
pub const EXIT_NO_DOORS: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("reading {path}: {source}")]
    Input {
        path: PathBuf,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("encoding {what}: {source}")]
    Encode {
        what: String,
        #[source]
        source: Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn input(path: impl Into<PathBuf>, source: Error) -> Self {
        CliError::Input {
            path: path.into(),
            source,
        }
    }

    pub fn encode(what: impl Into<String>, source: impl Into<Error>) -> Self {
        CliError::Encode {
            what: what.into(),
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => EXIT_INPUT,
            CliError::Stage(e) if caused_by_input(e) => EXIT_INPUT,
            _ => EXIT_FAILURE,
        }
    }
}

/// Stage errors that trace back to the map, the flags or a supplied
/// document rather than to the pipeline itself.
fn caused_by_input(e: &StageError) -> bool {
    match e.stage {
        Stage::Normalize | Stage::Binarize | Stage::Windows => true,
        _ => matches!(
            e.source,
            Error::Detections(_)
                | Error::Hypotheses(_)
                | Error::Mask(_)
                | Error::InvalidGrid(_)
                | Error::Thresholds { .. }
                | Error::GridTooSmall { .. }
        ),
    }
}
