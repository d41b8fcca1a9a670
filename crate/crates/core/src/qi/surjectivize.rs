use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::VertexMap;
use crate::decomposition::PathDecomposition;
use crate::error::{Error, Result};
use crate::graph::{dijkstra, multi_source_bfs, Dist, EdgeWeighting, Graph, VertexId};

/// Partition of the target into connected clusters, one per image vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub clusters: BTreeMap<VertexId, BTreeSet<VertexId>>,
    /// Representative of every target vertex.
    pub rep: BTreeMap<VertexId, VertexId>,
}

impl ClusterAssignment {
    pub fn rep_of(&self, v: VertexId) -> VertexId {
        self.rep[&v]
    }

    pub fn is_trivial(&self) -> bool {
        self.clusters.values().all(|c| c.len() == 1)
    }

    /// Checks the partition invariants: each cluster contains exactly one
    /// image vertex (its representative), the clusters cover `host`, and each
    /// is connected with every member within `radius` hops of the
    /// representative inside the cluster.
    pub fn validate(&self, host: &Graph, image: &BTreeSet<VertexId>, radius: u64) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (&z, members) in &self.clusters {
            let hits: Vec<_> = members.intersection(image).collect();
            if hits != [&z] {
                return Err(Error::assertion("cluster meets the image in its representative", format!("cluster of {z} meets {hits:?}")));
            }
            let sub = host.induced(members);
            let far = multi_source_bfs(&sub, &[sub.idx(z)?]);
            if let Some(i) = far.iter().position(|d| d.finite().is_none_or(|d| d > radius)) {
                return Err(Error::assertion(
                    "cluster is connected within the radius",
                    format!("{} is {} from {z}", sub.id(i), far[i]),
                ));
            }
            for &m in members {
                if !seen.insert(m) || self.rep.get(&m) != Some(&z) {
                    return Err(Error::assertion("clusters partition the target", format!("vertex {m}")));
                }
            }
        }
        if seen.len() != host.vertex_count() {
            return Err(Error::assertion("clusters partition the target", "some vertex is unassigned"));
        }
        Ok(())
    }
}

/// Result of contracting each cluster to its representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surjectivization {
    pub quotient: Graph,
    pub map: VertexMap,
    pub assignment: ClusterAssignment,
    pub decomposition: PathDecomposition,
}

/// Makes `phi` onto by contracting breadth-first clusters around the image.
///
/// Each non-image vertex joins the cluster of its smallest-id neighbour one
/// layer closer to the image. Image vertices keep their ids in the quotient,
/// so the returned map equals `phi`.
pub fn surjectivize(
    target: &Graph,
    decomposition: &PathDecomposition,
    phi: &VertexMap,
    radius: u64,
) -> Result<Surjectivization> {
    let image = phi.image_set();
    let sources = image
        .iter()
        .map(|&z| target.idx(z))
        .collect::<Result<Vec<_>>>()?;
    let layer = multi_source_bfs(target, &sources);
    if let Some(i) = layer.iter().position(|d| d.finite().is_none_or(|d| d > radius)) {
        return Err(Error::Uncovered {
            vertex: target.id(i),
            radius,
        });
    }

    let mut order: Vec<usize> = (0..target.vertex_count()).collect();
    order.sort_by_key(|&i| (layer[i], target.id(i)));
    let mut rep_idx = vec![usize::MAX; target.vertex_count()];
    for &x in &order {
        if layer[x] == Dist::ZERO {
            rep_idx[x] = x;
            continue;
        }
        let closer = Dist::Finite(layer[x].finite().unwrap() - 1);
        let &(parent, _) = target
            .adjacency(x)
            .iter()
            .find(|&&(y, _)| layer[y] == closer)
            .expect("BFS layer has a predecessor");
        rep_idx[x] = rep_idx[parent];
    }

    let rep: BTreeMap<VertexId, VertexId> = (0..target.vertex_count())
        .map(|i| (target.id(i), target.id(rep_idx[i])))
        .collect();
    let mut clusters: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for (&v, &z) in &rep {
        clusters.entry(z).or_default().insert(v);
    }
    let quotient = Graph::new(
        image.iter().copied(),
        target
            .edges()
            .iter()
            .map(|e| (rep[&e.0], rep[&e.1]))
            .filter(|(a, b)| a != b),
    )?;
    let decomposition = decomposition.map_vertices(|v| rep.get(&v).copied().unwrap_or(v));
    Ok(Surjectivization {
        quotient,
        map: phi.clone(),
        assignment: ClusterAssignment { clusters, rep },
        decomposition,
    })
}

/// Lifts a weighting of the quotient back to `target`: edges inside a cluster
/// weigh 0, edges between clusters inherit the weight of their image edge.
///
/// Distances between image vertices are then preserved exactly, which is
/// checked before returning.
pub fn pull_back_weights(
    target: &Graph,
    s: &Surjectivization,
    lifted: &EdgeWeighting,
) -> Result<EdgeWeighting> {
    if !lifted.fits(&s.quotient) {
        return Err(Error::Input("weighting does not match the quotient graph".into()));
    }
    let rep = &s.assignment.rep;
    let w = EdgeWeighting::from_fn(target, |e| {
        let (a, b) = (rep[&e.0], rep[&e.1]);
        if a == b {
            0
        } else {
            lifted.weight(&s.quotient, a, b).expect("quotient edge")
        }
    });

    let reps: Vec<VertexId> = s.quotient.vertices().to_vec();
    for &z in &reps {
        let down = dijkstra(target, &w, target.idx(z)?);
        let up = dijkstra(&s.quotient, lifted, s.quotient.idx(z)?);
        for &y in &reps {
            let (a, b) = (down[target.idx(y)?], up[s.quotient.idx(y)?]);
            if a != b {
                return Err(Error::assertion(
                    "pull-back preserves image distances",
                    format!("between {z} and {y}: {a} on the target, {b} on the quotient"),
                ));
            }
        }
    }
    Ok(w)
}
