//! Finite simple undirected graphs over integer vertex ids.
//!
//! Vertices are stored sorted by id and addressed internally by their rank,
//! so iteration order is always id order. Every algorithm that has to pick
//! between equivalent candidates breaks ties by the smaller id.

mod distance;
mod surgery;

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use distance::{
    bfs, dijkstra, dist, multi_source_bfs, shortest_path, wdist, weighted_shortest_path,
    DistanceMatrix,
};
pub use surgery::{contract_edges, subdivide_edges, Provenance};

pub type VertexId = u32;

/// Unordered vertex pair, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub VertexId, pub VertexId);

impl Edge {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.0 {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// A graph distance: a finite edge count / weight sum, or unreachable.
///
/// `Finite(_) < Infinite`, and addition saturates at `Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dist {
    Finite(u64),
    Infinite,
}

impl Dist {
    pub const ZERO: Dist = Dist::Finite(0);

    pub fn finite(self) -> Option<u64> {
        match self {
            Dist::Finite(d) => Some(d),
            Dist::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Dist::Finite(_))
    }

    pub fn plus(self, w: u64) -> Dist {
        match self {
            Dist::Finite(d) => d.checked_add(w).map_or(Dist::Infinite, Dist::Finite),
            Dist::Infinite => Dist::Infinite,
        }
    }
}

impl Add for Dist {
    type Output = Dist;

    fn add(self, rhs: Dist) -> Dist {
        match rhs {
            Dist::Finite(w) => self.plus(w),
            Dist::Infinite => Dist::Infinite,
        }
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Finite(d) => write!(f, "{d}"),
            Dist::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.finite().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map_or(Dist::Infinite, Dist::Finite))
    }
}

/// Finite simple undirected graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    // (neighbour index, edge index), sorted by neighbour index
    adj: Vec<Vec<(usize, usize)>>,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph; duplicate vertices and edges collapse, loops and
    /// edges with unknown endpoints are rejected.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let ids: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut edge_set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::Input(format!("loop at vertex {u}")));
            }
            for x in [u, v] {
                if !ids.contains(&x) {
                    return Err(Error::Input(format!(
                        "edge {u}-{v} has endpoint {x} outside the vertex set"
                    )));
                }
            }
            edge_set.insert(Edge::new(u, v));
        }
        Ok(Self::from_sorted(ids.into_iter().collect(), edge_set.into_iter().collect()))
    }

    fn from_sorted(ids: Vec<VertexId>, edges: Vec<Edge>) -> Self {
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (e, &Edge(u, v)) in edges.iter().enumerate() {
            let (iu, iv) = (index[&u], index[&v]);
            adj[iu].push((iv, e));
            adj[iv].push((iu, e));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph {
            ids,
            index,
            adj,
            edges,
        }
    }

    pub fn path(n: usize) -> Self {
        let n = n as VertexId;
        Self::new(0..n, (1..n).map(|i| (i - 1, i))).expect("path graph")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let n = n as VertexId;
        Self::new(0..n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle graph")
    }

    pub fn complete(n: usize) -> Self {
        let n = n as VertexId;
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(0..n, edges).expect("complete graph")
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Vertex ids in increasing order; position = internal index.
    pub fn vertices(&self) -> &[VertexId] {
        &self.ids
    }

    /// Edges in increasing order; position = edge index.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.index.contains_key(&v)
    }

    pub fn idx(&self, v: VertexId) -> Result<usize> {
        self.index.get(&v).copied().ok_or(Error::UnknownVertex(v))
    }

    pub fn id(&self, i: usize) -> VertexId {
        self.ids[i]
    }

    pub fn max_id(&self) -> Option<VertexId> {
        self.ids.last().copied()
    }

    /// `(neighbour index, edge index)` pairs of the vertex at index `i`.
    pub fn adjacency(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn neighbors(&self, v: VertexId) -> Result<impl Iterator<Item = VertexId> + '_> {
        let i = self.idx(v)?;
        Ok(self.adj[i].iter().map(move |&(j, _)| self.ids[j]))
    }

    pub fn degree(&self, v: VertexId) -> Result<usize> {
        Ok(self.adj[self.idx(v)?].len())
    }

    pub fn edge_index(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.edges.binary_search(&Edge::new(u, v)).ok()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_index(u, v).is_some()
    }

    /// Subgraph induced on the members of `keep` that are vertices of `self`.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Graph {
        let ids: Vec<VertexId> = self.ids.iter().copied().filter(|v| keep.contains(v)).collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .copied()
            .filter(|e| keep.contains(&e.0) && keep.contains(&e.1))
            .collect();
        Self::from_sorted(ids, edges)
    }

    /// Connected components as sorted id lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(x) = stack.pop() {
                comp.push(self.ids[x]);
                for &(y, _) in &self.adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Graphviz rendering; edge labels carry weights when given.
    pub fn to_dot(&self, weights: Option<&EdgeWeighting>) -> String {
        let mut s = String::from("graph G {\n");
        for v in &self.ids {
            let _ = writeln!(s, "  {v};");
        }
        for (e, Edge(u, v)) in self.edges.iter().enumerate() {
            match weights {
                Some(w) => {
                    let _ = writeln!(s, "  {u} -- {v} [label=\"{}\"];", w.get(e));
                }
                None => {
                    let _ = writeln!(s, "  {u} -- {v};");
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Total map from the edges of a host graph to non-negative integers,
/// stored by edge index of that host.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeWeighting {
    weights: Vec<u64>,
}

impl EdgeWeighting {
    pub fn from_fn(host: &Graph, mut f: impl FnMut(Edge) -> u64) -> Self {
        EdgeWeighting {
            weights: host.edges().iter().map(|&e| f(e)).collect(),
        }
    }

    pub fn constant(host: &Graph, w: u64) -> Self {
        EdgeWeighting {
            weights: vec![w; host.edge_count()],
        }
    }

    pub fn unit(host: &Graph) -> Self {
        Self::constant(host, 1)
    }

    pub fn zero(host: &Graph) -> Self {
        Self::constant(host, 0)
    }

    /// Builds a weighting from `(u, v, w)` triples; every edge of `host`
    /// must appear exactly once.
    pub fn from_triples(host: &Graph, triples: &[(VertexId, VertexId, u64)]) -> Result<Self> {
        let mut weights: Vec<Option<u64>> = vec![None; host.edge_count()];
        for &(u, v, w) in triples {
            let e = host
                .edge_index(u, v)
                .ok_or_else(|| Error::Input(format!("weight given for non-edge {u}-{v}")))?;
            if weights[e].replace(w).is_some() {
                return Err(Error::Input(format!("edge {u}-{v} weighted twice")));
            }
        }
        let weights = weights
            .into_iter()
            .enumerate()
            .map(|(e, w)| {
                w.ok_or_else(|| Error::Input(format!("edge {} has no weight", host.edges()[e])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EdgeWeighting { weights })
    }

    pub fn to_triples(&self, host: &Graph) -> Vec<(VertexId, VertexId, u64)> {
        host.edges()
            .iter()
            .zip(&self.weights)
            .map(|(&Edge(u, v), &w)| (u, v, w))
            .collect()
    }

    pub fn get(&self, edge_index: usize) -> u64 {
        self.weights[edge_index]
    }

    pub fn weight(&self, host: &Graph, u: VertexId, v: VertexId) -> Option<u64> {
        host.edge_index(u, v).map(|e| self.weights[e])
    }

    pub fn set(&mut self, edge_index: usize, w: u64) {
        self.weights[edge_index] = w;
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest edge weight; 0 for an edgeless host.
    pub fn size(&self) -> u64 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    pub fn fits(&self, host: &Graph) -> bool {
        self.weights.len() == host.edge_count()
    }

    /// Total weight of a path.
    pub fn path_weight(&self, host: &Graph, path: &Path) -> u64 {
        path.vertices()
            .windows(2)
            .map(|p| self.weight(host, p[0], p[1]).expect("path edge"))
            .sum()
    }
}

/// A path given by its vertex sequence: distinct vertices, consecutive ones
/// adjacent in the host.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    vertices: Vec<VertexId>,
}

impl Path {
    pub fn new(host: &Graph, vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Input("empty path".into()));
        }
        let mut seen = BTreeSet::new();
        for &v in &vertices {
            host.idx(v)?;
            if !seen.insert(v) {
                return Err(Error::Input(format!("path repeats vertex {v}")));
            }
        }
        if let Some(p) = vertices.windows(2).find(|p| !host.has_edge(p[0], p[1])) {
            return Err(Error::Input(format!("path step {}-{} is not an edge", p[0], p[1])));
        }
        Ok(Path { vertices })
    }

    pub(crate) fn new_unchecked(vertices: Vec<VertexId>) -> Self {
        Path { vertices }
    }

    pub fn single(v: VertexId) -> Self {
        Path { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn first(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn last(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }
}

/// True iff every subpath of `q` realises the weighted distance between its
/// ends. Runs one Dijkstra per vertex of `q`.
pub fn is_w_geodesic(host: &Graph, w: &EdgeWeighting, q: &Path) -> Result<bool> {
    Ok(w_geodesic_violation(host, w, q)?.is_none())
}

/// Unit-weight special case of [`is_w_geodesic`].
pub fn is_geodesic(host: &Graph, q: &Path) -> Result<bool> {
    is_w_geodesic(host, &EdgeWeighting::unit(host), q)
}

/// First pair `(x, y, wdist, weight along q)` where `q` fails to be a
/// `w`-geodesic, if any.
pub fn w_geodesic_violation(
    host: &Graph,
    w: &EdgeWeighting,
    q: &Path,
) -> Result<Option<(VertexId, VertexId, Dist, u64)>> {
    let verts = q.vertices();
    // prefix[i] = weight of q from its start to verts[i]
    let mut prefix = Vec::with_capacity(verts.len());
    let mut acc = 0u64;
    prefix.push(0);
    for p in verts.windows(2) {
        let e = host
            .edge_index(p[0], p[1])
            .ok_or_else(|| Error::Input(format!("path step {}-{} is not an edge", p[0], p[1])))?;
        acc = acc.saturating_add(w.get(e));
        prefix.push(acc);
    }
    for (i, &x) in verts.iter().enumerate() {
        let d = dijkstra(host, w, host.idx(x)?);
        for (j, &y) in verts.iter().enumerate().skip(i + 1) {
            let along = prefix[j] - prefix[i];
            let dd = d[host.idx(y)?];
            if dd != Dist::Finite(along) {
                return Ok(Some((x, y, dd, along)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_and_dangling_edges() {
        assert!(Graph::new([0, 1], [(0, 0)]).is_err());
        assert!(Graph::new([0, 1], [(0, 2)]).is_err());
        let g = Graph::new([0, 1], [(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn dist_saturates() {
        assert_eq!(Dist::Finite(3) + Dist::Finite(4), Dist::Finite(7));
        assert_eq!(Dist::Finite(3) + Dist::Infinite, Dist::Infinite);
        assert_eq!(Dist::Finite(u64::MAX).plus(1), Dist::Infinite);
        assert!(Dist::Finite(u64::MAX) < Dist::Infinite);
    }

    #[test]
    fn weighting_size() {
        let g = Graph::new([0, 1, 2], []).unwrap();
        assert_eq!(EdgeWeighting::zero(&g).size(), 0);
        let g = Graph::path(4);
        let w = EdgeWeighting::from_fn(&g, |e| e.0 as u64 * 2);
        assert_eq!(w.size(), 4);
    }

    #[test]
    fn weighting_triples_must_be_total() {
        let g = Graph::path(3);
        assert!(EdgeWeighting::from_triples(&g, &[(0, 1, 1)]).is_err());
        assert!(EdgeWeighting::from_triples(&g, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).is_err());
        let w = EdgeWeighting::from_triples(&g, &[(2, 1, 4), (0, 1, 1)]).unwrap();
        assert_eq!(w.weight(&g, 1, 2), Some(4));
    }

    #[test]
    fn path_validation() {
        let g = Graph::path(3);
        assert!(Path::new(&g, vec![0, 1, 2]).is_ok());
        assert!(Path::new(&g, vec![0, 2]).is_err());
        assert!(Path::new(&g, vec![0, 1, 0]).is_err());
    }

    #[test]
    fn geodesic_examples() {
        let g = Graph::path(5);
        assert!(is_geodesic(&g, &Path::single(3)).unwrap());
        let w = EdgeWeighting::from_fn(&g, |e| 7 * e.1 as u64);
        assert!(is_w_geodesic(&g, &w, &Path::new(&g, vec![0, 1, 2, 3, 4]).unwrap()).unwrap());

        // triangle a-b-c with unit weights: a-b-c is not a geodesic
        let t = Graph::complete(3);
        assert!(!is_geodesic(&t, &Path::new(&t, vec![0, 1, 2]).unwrap()).unwrap());
    }

    #[test]
    fn dot_export_labels_weights() {
        let g = Graph::path(2);
        let w = EdgeWeighting::constant(&g, 5);
        assert!(g.to_dot(Some(&w)).contains("0 -- 1 [label=\"5\"]"));
    }
}
