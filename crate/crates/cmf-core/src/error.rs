//! Error type shared by all cmf-core modules.

use thiserror::Error;

/// Errors produced by matrix operations, data ingestion and the solvers.
#[derive(Debug, Error)]
pub enum CmfError {
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("entry ({row},{col}) = {value} is outside [{min},{max}]")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("entry ({row},{col}) is zero; phase is undefined")]
    ZeroEntry { row: usize, col: usize },

    #[error("feature column {index} has zero norm")]
    ZeroVector { index: usize },

    #[error("neighbor count k={k} must satisfy 1 <= k < {vertices}")]
    NeighborCountOutOfRange { k: usize, vertices: usize },

    #[error("basis matrix is rank deficient: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("gallery is empty")]
    EmptyGallery,

    #[error("negative entry ({row},{col}) = {value} not allowed for NMF")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("method {method} requires a Laplacian but none was supplied")]
    MissingLaplacian { method: &'static str },

    #[error("objective became non-finite at outer iteration {iteration} (value {value})")]
    NonFiniteObjective { iteration: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("subject {subject} has {available} images but {required} are required")]
    SubjectTooSmall {
        subject: u32,
        available: usize,
        required: usize,
    },

    #[error("PGM error in {path}: {reason}")]
    Pgm { path: String, reason: String },

    #[error("cmfmat parse error: {0}")]
    MatFormat(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("model metadata error: {0}")]
    Meta(String),
}

pub type Result<T> = std::result::Result<T, CmfError>;
