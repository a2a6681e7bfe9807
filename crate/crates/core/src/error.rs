use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported sample depth: maxval {0}")]
    UnsupportedDepth(u32),
    #[error("truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("frame {index} out of range ({available} frames available)")]
    OutOfRange { index: usize, available: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("block footprint out of bounds")]
    OutOfBounds,
    #[error("vector ({dx}, {dy}) does not fit in 4-bit two's complement")]
    VectorRange { dx: i32, dy: i32 },
    #[error("stream exhausted at bit {0}")]
    StreamExhausted(usize),
    #[error("flag bit 0: quadtree coding not in use")]
    QuadtreeNotUsed,
    #[error("non-zero padding or trailing data after bit {0}")]
    TrailingData(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad container: {0}")]
    Container(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
