use std::io;

use thiserror::Error;

/// Errors raised by the norm, prox, solver and experiment routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("infeasible budget: c = {c} lies outside [{lower}, {upper}]")]
    InfeasibleBudget { c: f64, lower: f64, upper: f64 },

    #[error("dimension {dim} exceeds the reference-oracle limit of {max}")]
    TestScaleExceeded { dim: usize, max: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "solver diverged at iteration {iteration}: objective {objective:e} exceeds 1e3 x initial {initial:e}; try a smaller step size"
    )]
    Divergence {
        iteration: usize,
        objective: f64,
        initial: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("duplicate entry at (row {row}, col {col})")]
    DuplicateEntry { row: usize, col: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Coarse category used by the CLI to pick exit codes and error prefixes.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Divergence { .. } => ErrorKind::Divergence,
            Error::InvalidParams(_) | Error::InfeasibleBudget { .. } => ErrorKind::Usage,
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Divergence,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
