use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("director is degenerate: leading eigenvalue gap {gap:.3e} is below {tol:.3e}")]
    DegenerateDirector { gap: f64, tol: f64 },

    #[error("bulk potential has no nematic minimum: B^2 - 24AC = {discriminant:.6e} < 0")]
    NoNematicMinimum { discriminant: f64 },

    #[error("vector is not unit length (|n| = {norm})")]
    NotUnit { norm: f64 },

    #[error("invalid bulk parameters: {0}")]
    InvalidParams(String),

    #[error("grid is too coarse: {axis} axis has {nodes} nodes, at least 5 required")]
    TooCoarse { axis: char, nodes: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GeometryMismatch,

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("linear solve failed: {0}")]
    LinearSolveFailed(String),

    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),

    #[error("converged to index {found}, expected {expected}")]
    NotTargetIndex { expected: usize, found: usize },

    #[error("skeleton is inconsistent: {0}")]
    SkeletonInconsistent(String),

    #[error("no pathway found between {from} and {to}")]
    NoPathFound { from: String, to: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
