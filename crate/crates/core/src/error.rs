use std::path::PathBuf;

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed raster header in {path}: {reason}")]
    Header { path: PathBuf, reason: String },
    #[error("sidecar error for {path}: {reason}")]
    Sidecar { path: PathBuf, reason: String },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("separator failed on chip {chip}: {reason}")]
    Separator { chip: String, reason: String },
    #[error("tile {tile} failed: {reason}")]
    Tile { tile: String, reason: String },
    #[error("config schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
