//! Crate-wide error type.

use thiserror::Error;

/// Unified error type for everything that can go wrong in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("degenerate normalizer: every CSI entry in the training split is zero")]
    DegenerateNormalizer,

    #[error("bad magic: expected \"CSID\", found {found:?}")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported container version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("truncated payload: {0}")]
    Truncated(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("non-finite value produced by `{op}`")]
    NonFinite { op: &'static str },

    #[error("training diverged: non-finite loss at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
