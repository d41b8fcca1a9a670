use thiserror::Error;

use crate::decomposition::Violation;
use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{0} is not connected")]
    Disconnected(&'static str),

    #[error("invalid path decomposition: {}", fmt_violations(.0))]
    InvalidDecomposition(Vec<Violation>),

    #[error("target vertex {vertex} is not within {radius} of the image")]
    Uncovered { vertex: VertexId, radius: u64 },

    #[error("hypothesis `{bullet}` does not hold: {witness}")]
    Hypothesis { bullet: &'static str, witness: String },

    #[error("internal assertion `{claim}` failed: {witness}")]
    Assertion { claim: &'static str, witness: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("constant {0} does not fit in a 64-bit edge weight")]
    ConstantOverflow(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn assertion(claim: &'static str, witness: impl Into<String>) -> Self {
        Error::Assertion {
            claim,
            witness: witness.into(),
        }
    }

    pub(crate) fn hypothesis(bullet: &'static str, witness: impl Into<String>) -> Self {
        Error::Hypothesis {
            bullet,
            witness: witness.into(),
        }
    }
}

fn fmt_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
