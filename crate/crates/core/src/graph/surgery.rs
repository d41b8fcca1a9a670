use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Edge, Graph, VertexId};
use crate::error::{Error, Result};

/// Where a vertex of a subdivided graph came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Original(VertexId),
    /// Interior vertex of the subdivided `edge`, `offset` steps from `edge.0`.
    Subdivision { edge: Edge, offset: u32, parts: u32 },
}

/// Replaces each listed edge by a path with `parts` edges. Fresh vertices get
/// ids above every existing id, allocated edge by edge in edge order.
pub fn subdivide_edges(
    g: &Graph,
    edges: &BTreeSet<Edge>,
    parts: u32,
) -> Result<(Graph, BTreeMap<VertexId, Provenance>)> {
    if parts == 0 {
        return Err(Error::Input("subdivision needs at least one part".into()));
    }
    for e in edges {
        if g.edge_index(e.0, e.1).is_none() {
            return Err(Error::Input(format!("{e} is not an edge")));
        }
    }
    let mut provenance: BTreeMap<VertexId, Provenance> =
        g.vertices().iter().map(|&v| (v, Provenance::Original(v))).collect();
    let mut next = g.max_id().map_or(0, |m| m + 1);
    let mut new_edges = Vec::with_capacity(g.edge_count());
    for &e in g.edges() {
        if parts == 1 || !edges.contains(&e) {
            new_edges.push((e.0, e.1));
            continue;
        }
        let mut prev = e.0;
        for offset in 1..parts {
            let x = next;
            next += 1;
            provenance.insert(x, Provenance::Subdivision { edge: e, offset, parts });
            new_edges.push((prev, x));
            prev = x;
        }
        new_edges.push((prev, e.1));
    }
    let h = Graph::new(provenance.keys().copied(), new_edges)?;
    Ok((h, provenance))
}

/// Contracts every edge of a matching. The merged vertex keeps the smaller
/// endpoint id; the quotient map sends each vertex of `g` to its image.
pub fn contract_edges(
    g: &Graph,
    matching: &BTreeSet<Edge>,
) -> Result<(Graph, BTreeMap<VertexId, VertexId>)> {
    let mut quotient: BTreeMap<VertexId, VertexId> =
        g.vertices().iter().map(|&v| (v, v)).collect();
    let mut used = BTreeSet::new();
    for &e in matching {
        if g.edge_index(e.0, e.1).is_none() {
            return Err(Error::Input(format!("{e} is not an edge")));
        }
        if !used.insert(e.0) || !used.insert(e.1) {
            return Err(Error::Input(format!("{e} shares an endpoint with another matching edge")));
        }
        quotient.insert(e.1, e.0);
    }
    let vertices: BTreeSet<VertexId> = quotient.values().copied().collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| (quotient[&e.0], quotient[&e.1]))
        .filter(|(a, b)| a != b);
    Ok((Graph::new(vertices, edges)?, quotient))
}
