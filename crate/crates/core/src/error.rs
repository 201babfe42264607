use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the scheduling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown {kind} id {id}")]
    Lookup { kind: &'static str, id: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("cannot build formulation: {0}")]
    Build(String),

    #[error("cannot decode solution: {0}")]
    Decode(String),

    #[error("problem is infeasible: {0}")]
    Infeasible(String),

    #[error("problem is unbounded")]
    Unbounded,

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("rounding failed for source {source_id}: no ceil/floor/fallback fixing is feasible")]
    RoundingFailure { source_id: usize },

    #[error("invalid rounding state: {0}")]
    State(String),

    #[error("enumeration too large: {binaries} binaries exceeds the limit of {limit}")]
    Size { binaries: usize, limit: usize },

    #[error("unsupported formulation kind for this operation: {0}")]
    UnsupportedKind(String),

    #[error("parse error in {}: {message}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<input>".into()))]
    Parse { path: Option<PathBuf>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
