use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by graph construction and differentiation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("shape mismatch at node {node} ({op}): {detail}")]
    Shape {
        node: usize,
        op: &'static str,
        detail: String,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("gradient requested for non-scalar output of shape {rows}x{cols}")]
    NonScalarOutput { rows: usize, cols: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate facing direction: left and right hips coincide or are vertically aligned")]
    DegenerateFacing,

    #[error("unknown subject {0}")]
    UnknownSubject(u32),

    #[error("empty batch: {0}")]
    EmptyBatch(&'static str),

    #[error("length mismatch: {left} vs {right} frames")]
    LengthMismatch { left: usize, right: usize },

    #[error("training aborted at epoch {epoch}, batch {batch}: {msg}")]
    Diverged {
        epoch: usize,
        batch: usize,
        msg: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
