//! Instances with known structure, and an independent certifier.
//!
//! The generators build a target graph `H` together with a path
//! decomposition, then derive `G` from `H` by subdividing and contracting, so
//! the quasi-isometry `phi` is known by construction. [`certify`] rechecks a
//! synthesis report with its own all-pairs distances and shares no distance
//! code with `qirw-core`.

pub mod corpus;
pub mod generate;
pub mod instance;
pub mod oracle;
pub mod stages;

pub use generate::{gen_bounded_pw, gen_comb, gen_pathlike, subdivide_target, Generator};
pub use instance::{Instance, Provenance};
pub use oracle::{certify, Certificate};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] qirw_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("bad parameters: {0}")]
    Params(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
