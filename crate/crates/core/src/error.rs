use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("image {img_w}x{img_h} is smaller than the {win_w}x{win_h} window")]
    ImageSmallerThanWindow {
        img_w: usize,
        img_h: usize,
        win_w: usize,
        win_h: usize,
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid window spec: {0}")]
    InvalidSpec(String),

    #[error("window at ({x0}, {y0}) of size {win_w}x{win_h} exceeds {img_w}x{img_h} image")]
    OutOfBounds {
        x0: usize,
        y0: usize,
        win_w: usize,
        win_h: usize,
        img_w: usize,
        img_h: usize,
    },

    #[error("value {0} outside the domain [0, 1]")]
    Domain(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: cannot decode image: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("{path}: unsupported image format: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("manifest {path}: {}", format_row_errors(.errors))]
    Manifest {
        path: PathBuf,
        errors: Vec<RowError>,
    },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("fast and naive engines disagree: {0}")]
    Correctness(String),

    #[error("output: {0}")]
    Output(String),
}

/// A manifest problem tied to a 1-based file line (the header is row 1).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

fn format_row_errors(errors: &[RowError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
