//! Additive-error reweighting of quasi-isometries.
//!
//! Given a quasi-isometry `phi: V(G) -> V(H)` where `H` comes with a path
//! decomposition of bounded width, [`synthesize`] assigns non-negative integer
//! weights to the edges of `H` so that the *same* map `phi` distorts distances
//! by an additive constant only. Every stage of the construction is checked at
//! runtime against the inequalities it is supposed to guarantee, and the final
//! weighting is certified by exact all-pairs comparison.
//!
//! Module map:
//!
//! - [`graph`]: finite simple graphs, BFS/Dijkstra distances, geodesics,
//!   subdivision and contraction.
//! - [`decomposition`]: path decompositions, validation, restriction, exact
//!   path-width for tiny graphs.
//! - [`qi`]: quasi-isometry checking, parameter measurement, surjectivization
//!   by cluster contraction, weight pull-back and composition.
//! - [`anchor`]: anchor sequences along the image of a geodesic and the gap
//!   weighting that turns the anchor path into a weighted geodesic.
//! - [`extension`]: the constant ledger, the near/far scaffold, the recursive
//!   extension and the top-level [`synthesize`] driver.

pub mod anchor;
pub mod decomposition;
pub mod error;
pub mod extension;
pub mod graph;
pub mod io;
pub mod qi;

pub use decomposition::PathDecomposition;
pub use error::{Error, Result};
pub use extension::{synthesize, Profile, SynthesisReport};
pub use graph::{Dist, Edge, EdgeWeighting, Graph, Path, VertexId};
pub use qi::{QiParams, VertexMap};
