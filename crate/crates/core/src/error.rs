use std::io;

use thiserror::Error;

use crate::grid::Dims;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid dimensions {width}x{height} must be non-zero powers of two")]
    InvalidDims { width: usize, height: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimsMismatch { expected: Dims, actual: Dims },

    #[error("{what}: {detail}")]
    InvalidInput { what: &'static str, detail: String },

    #[error("probe translated by ({row}, {col}) leaves the {dims} grid")]
    ProbeOutOfGrid { row: i32, col: i32, dims: Dims },

    #[error("scan step {step} places the probe at ({row}, {col}), outside the {dims} grid")]
    ScanOutOfGrid {
        step: usize,
        row: i32,
        col: i32,
        dims: Dims,
    },

    #[error("need at least {required} frames, got {actual}")]
    TooFewFrames { required: usize, actual: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("malformed PIID container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
