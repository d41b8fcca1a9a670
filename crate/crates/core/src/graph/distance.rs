use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use super::{Dist, EdgeWeighting, Graph, Path, VertexId};
use crate::error::Result;

/// Hop distances from the vertex at index `src`, indexed by vertex index.
pub fn bfs(g: &Graph, src: usize) -> Vec<Dist> {
    multi_source_bfs(g, &[src])
}

/// Hop distance from the nearest of `sources` (indices).
pub fn multi_source_bfs(g: &Graph, sources: &[usize]) -> Vec<Dist> {
    let mut d = vec![Dist::Infinite; g.vertex_count()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if d[s] != Dist::ZERO {
            d[s] = Dist::ZERO;
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let next = d[x].plus(1);
        for &(y, _) in g.adjacency(x) {
            if d[y] == Dist::Infinite {
                d[y] = next;
                queue.push_back(y);
            }
        }
    }
    d
}

/// Weighted distances from index `src`. Zero-weight edges are fine.
pub fn dijkstra(g: &Graph, w: &EdgeWeighting, src: usize) -> Vec<Dist> {
    dijkstra_hops(g, w, src)
        .into_iter()
        .map(|x| x.map_or(Dist::Infinite, |(d, _)| Dist::Finite(d)))
        .collect()
}

// Lexicographic (weight, hops) labels; hops break ties between equally light
// paths so that path extraction always makes progress across zero-weight edges.
fn dijkstra_hops(g: &Graph, w: &EdgeWeighting, src: usize) -> Vec<Option<(u64, u64)>> {
    let mut best: Vec<Option<(u64, u64)>> = vec![None; g.vertex_count()];
    let mut heap = BinaryHeap::new();
    best[src] = Some((0, 0));
    heap.push(Reverse((0u64, 0u64, src)));
    while let Some(Reverse((d, h, x))) = heap.pop() {
        if best[x] != Some((d, h)) {
            continue;
        }
        for &(y, e) in g.adjacency(x) {
            let cand = (d.saturating_add(w.get(e)), h + 1);
            if best[y].is_none_or(|b| cand < b) {
                best[y] = Some(cand);
                heap.push(Reverse((cand.0, cand.1, y)));
            }
        }
    }
    best
}

pub fn dist(g: &Graph, u: VertexId, v: VertexId) -> Result<Dist> {
    let (iu, iv) = (g.idx(u)?, g.idx(v)?);
    Ok(bfs(g, iu)[iv])
}

pub fn wdist(g: &Graph, w: &EdgeWeighting, u: VertexId, v: VertexId) -> Result<Dist> {
    let (iu, iv) = (g.idx(u)?, g.idx(v)?);
    Ok(dijkstra(g, w, iu)[iv])
}

/// Minimum-length `u`–`v` path; among those, the lexicographically smallest
/// vertex-id sequence. `None` iff disconnected.
pub fn shortest_path(g: &Graph, u: VertexId, v: VertexId) -> Result<Option<Path>> {
    let (iu, iv) = (g.idx(u)?, g.idx(v)?);
    let to_v = bfs(g, iv);
    if !to_v[iu].is_finite() {
        return Ok(None);
    }
    let mut seq = vec![u];
    let mut x = iu;
    while x != iv {
        let want = Dist::Finite(to_v[x].finite().unwrap() - 1);
        // adjacency is sorted by id, so the first hit is the smallest id
        let &(y, _) = g
            .adjacency(x)
            .iter()
            .find(|&&(y, _)| to_v[y] == want)
            .expect("BFS layer has a predecessor");
        seq.push(g.id(y));
        x = y;
    }
    Ok(Some(Path::new_unchecked(seq)))
}

/// Minimum-weight `u`–`v` path; ties broken by fewest edges, then by the
/// lexicographically smallest vertex-id sequence.
pub fn weighted_shortest_path(
    g: &Graph,
    w: &EdgeWeighting,
    u: VertexId,
    v: VertexId,
) -> Result<Option<Path>> {
    let (iu, iv) = (g.idx(u)?, g.idx(v)?);
    let to_v = dijkstra_hops(g, w, iv);
    let Some(mut label) = to_v[iu] else {
        return Ok(None);
    };
    let mut seq = vec![u];
    let mut x = iu;
    while x != iv {
        let &(y, _) = g
            .adjacency(x)
            .iter()
            .find(|&&(y, e)| {
                to_v[y].is_some_and(|(d, h)| d.checked_add(w.get(e)) == Some(label.0) && h + 1 == label.1)
            })
            .expect("Dijkstra label has a predecessor");
        label = to_v[y].unwrap();
        seq.push(g.id(y));
        x = y;
    }
    Ok(Some(Path::new_unchecked(seq)))
}

/// Dense all-pairs distance table over vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Dist>,
}

impl DistanceMatrix {
    /// One BFS per source, run in parallel; identical to the sequential result.
    pub fn unweighted(g: &Graph) -> Self {
        let n = g.vertex_count();
        let rows: Vec<Vec<Dist>> = (0..n).into_par_iter().map(|s| bfs(g, s)).collect();
        DistanceMatrix {
            n,
            data: rows.concat(),
        }
    }

    pub fn weighted(g: &Graph, w: &EdgeWeighting) -> Self {
        let n = g.vertex_count();
        let rows: Vec<Vec<Dist>> = (0..n).into_par_iter().map(|s| dijkstra(g, w, s)).collect();
        DistanceMatrix {
            n,
            data: rows.concat(),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Dist {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Dist] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Largest finite entry (0 when empty).
    pub fn finite_diameter(&self) -> u64 {
        self.data.iter().filter_map(|d| d.finite()).max().unwrap_or(0)
    }
}
