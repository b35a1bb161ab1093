use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("image error on {path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("malformed map metadata: {0}")]
    Metadata(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid thresholds: free {free} must be < occupied {occupied}, both in [0, 1]")]
    Thresholds { free: f64, occupied: f64 },
    #[error("grid {width}x{height} is smaller than a {window}x{window} window")]
    GridTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },
    #[error("infeasible floorplan spec: {0}")]
    InfeasibleSpec(String),
    #[error("detections: {0}")]
    Detections(String),
    #[error("hypotheses: {0}")]
    Hypotheses(String),
    #[error("mask: {0}")]
    Mask(String),
    #[error("empty cell set")]
    EmptyCells,
    #[error("zero-area box")]
    ZeroAreaBox,
    #[error("unknown hypothesis id {0}")]
    UnknownHypothesis(usize),
    #[error("door {door} references missing segment {segment}")]
    MissingSegment { door: usize, segment: u32 },
    #[error("unsupported export format {0:?}")]
    UnsupportedFormat(String),
    #[error("image encoding: {0}")]
    Encode(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
