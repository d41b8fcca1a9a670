use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs, multi_source_bfs, Dist, Edge, Graph, VertexId};
use crate::qi::VertexMap;

/// The partition of `G` and `H` around a geodesic, and the shortcut graph
/// that stands in for `G` on the far side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionScaffold {
    /// Local scale of the extension.
    pub c: u64,
    /// Radius `2c(c+1)` of the near side.
    pub r: u64,
    /// Source vertices within `r` of the geodesic.
    pub near: BTreeSet<VertexId>,
    pub far: BTreeSet<VertexId>,
    /// Images of the far side.
    pub far_image: BTreeSet<VertexId>,
    /// Target vertices outside `far_image` at least as close to it as to the
    /// image of the geodesic.
    pub buffer: BTreeSet<VertexId>,
    /// The remaining target vertices.
    pub core: BTreeSet<VertexId>,
    /// Target edges between `far_image` plus `buffer` and `core`.
    pub boundary: BTreeSet<Edge>,
    /// Target subgraph induced on `far_image` plus `buffer`.
    pub inner: Graph,
    /// Far side of `G` plus one fresh path per close pair of far vertices.
    pub shortcut: Graph,
    pub shortcut_map: VertexMap,
    /// First id used for fresh shortcut vertices.
    pub fresh_base: VertexId,
    pub shortcut_paths: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaffoldSizes {
    pub near: usize,
    pub far: usize,
    pub far_image: usize,
    pub buffer: usize,
    pub core: usize,
    pub boundary: usize,
    pub shortcut_vertices: usize,
    pub shortcut_paths: usize,
    pub fresh_base: VertexId,
}

impl ExtensionScaffold {
    pub fn sizes(&self) -> ScaffoldSizes {
        ScaffoldSizes {
            near: self.near.len(),
            far: self.far.len(),
            far_image: self.far_image.len(),
            buffer: self.buffer.len(),
            core: self.core.len(),
            boundary: self.boundary.len(),
            shortcut_vertices: self.shortcut.vertex_count(),
            shortcut_paths: self.shortcut_paths,
            fresh_base: self.fresh_base,
        }
    }

    pub fn is_near_only(&self) -> bool {
        self.far.is_empty()
    }

    /// `(r+2)c`, saturating.
    pub fn reach(&self) -> u64 {
        self.r.saturating_add(2).saturating_mul(self.c)
    }

    /// `2(r+2)c + 1`, saturating.
    pub fn shortcut_threshold(&self) -> u64 {
        self.reach().saturating_mul(2).saturating_add(1)
    }

    pub fn inner_vertices(&self) -> BTreeSet<VertexId> {
        self.far_image.union(&self.buffer).copied().collect()
    }

    /// Checks the separation claims about the partition: the far image is at
    /// least `r/c - 1` from the geodesic image, every buffer vertex reaches
    /// the far image and every core vertex reaches the geodesic image within
    /// `(r+2)c` inside its own side, and the two sides sit more than
    /// `(r/c - 1)/2` from the opposite anchor set.
    pub fn check_partition(&self, h: &Graph, spine_image: &BTreeSet<VertexId>) -> Result<()> {
        let (c, r) = (self.c as u128, self.r as u128);
        let to_spine = dist_to(h, spine_image)?;
        let to_far = dist_to(h, &self.far_image)?;
        for &x in &self.far_image {
            let d = to_spine[h.idx(x)?];
            if d.finite().is_some_and(|d| c * d as u128 + c < r) {
                return Err(Error::assertion(
                    "c dist_H(X, phi(P)) >= r - c",
                    format!("far image vertex {x} is {d} from the geodesic image"),
                ));
            }
        }
        let inner = h.induced(&self.inner_vertices());
        let inner_reach = dist_to(&inner, &self.far_image)?;
        for &y in &self.buffer {
            let reach = inner_reach[inner.idx(y)?];
            if reach.finite().is_none_or(|d| d > self.reach()) {
                return Err(Error::assertion(
                    "buffer vertices reach the far image within (r+2)c",
                    format!("{y} is {reach} away inside the buffer"),
                ));
            }
            let d = to_spine[h.idx(y)?];
            if d.finite().is_some_and(|d| 2 * c * (d as u128) + c < r || d <= self.c) {
                return Err(Error::assertion(
                    "buffer vertices are far from the geodesic image",
                    format!("{y} is {d} from it"),
                ));
            }
        }
        let core = h.induced(&self.core);
        let core_spine: BTreeSet<_> = spine_image.intersection(&self.core).copied().collect();
        let core_reach = dist_to(&core, &core_spine)?;
        for &z in &self.core {
            let reach = core_reach[core.idx(z)?];
            if reach.finite().is_none_or(|d| d > self.reach()) {
                return Err(Error::assertion(
                    "core vertices reach the geodesic image within (r+2)c",
                    format!("{z} is {reach} away inside the core"),
                ));
            }
            let d = to_far[h.idx(z)?];
            if d.finite().is_some_and(|d| 2 * c * (d as u128) + c <= r) {
                return Err(Error::assertion(
                    "core vertices are far from the far image",
                    format!("{z} is {d} from it"),
                ));
            }
        }
        Ok(())
    }

    /// Every shortcut edge joins vertices whose images are within the
    /// shortcut threshold inside the inner graph.
    pub fn check_shortcut_edges(&self) -> Result<()> {
        let limit = self.shortcut_threshold();
        for e in self.shortcut.edges() {
            let (a, b) = (self.shortcut_map.get(e.0).unwrap(), self.shortcut_map.get(e.1).unwrap());
            let d = bfs(&self.inner, self.inner.idx(a)?)[self.inner.idx(b)?];
            if d.finite().is_none_or(|d| d > limit) {
                return Err(Error::assertion(
                    "shortcut edges stay short in the inner graph",
                    format!("edge {e} maps to {a}, {b} at distance {d}"),
                ));
            }
        }
        Ok(())
    }
}

fn dist_to(g: &Graph, set: &BTreeSet<VertexId>) -> Result<Vec<Dist>> {
    let sources = set.iter().map(|&v| g.idx(v)).collect::<Result<Vec<_>>>()?;
    Ok(multi_source_bfs(g, &sources))
}

/// Partitions `g` and `h` around `geodesic` at scale `c` and builds the
/// shortcut graph with its map into the inner target graph.
///
/// Fresh shortcut vertices get ids above every id of `g`, allocated pair by
/// pair in increasing order; an interior vertex maps to the image of the end
/// it is nearer to, the first end on ties.
pub fn build_scaffold(
    g: &Graph,
    h: &Graph,
    phi: &VertexMap,
    geodesic: &[VertexId],
    c: u64,
) -> Result<ExtensionScaffold> {
    if c < 2 {
        return Err(Error::Input(format!("extension scale must be at least 2, got {c}")));
    }
    let r = c.saturating_mul(c.saturating_add(1)).saturating_mul(2);
    let img = |v: VertexId| phi.get(v).ok_or(Error::UnknownVertex(v));

    let spine: BTreeSet<VertexId> = geodesic.iter().copied().collect();
    let to_geodesic = dist_to(g, &spine)?;
    let (near, far): (BTreeSet<VertexId>, BTreeSet<VertexId>) = g
        .vertices()
        .iter()
        .partition(|&&v| to_geodesic[g.idx(v).unwrap()].finite().is_some_and(|d| d <= r));

    let far_image: BTreeSet<VertexId> = far.iter().map(|&v| img(v)).collect::<Result<_>>()?;
    let spine_image: BTreeSet<VertexId> = geodesic.iter().map(|&v| img(v)).collect::<Result<_>>()?;
    let to_far = dist_to(h, &far_image)?;
    let to_spine = dist_to(h, &spine_image)?;
    let mut buffer = BTreeSet::new();
    let mut core = BTreeSet::new();
    for (i, &v) in h.vertices().iter().enumerate() {
        if far_image.contains(&v) {
            continue;
        }
        if to_far[i] <= to_spine[i] && to_far[i].is_finite() {
            buffer.insert(v);
        } else {
            core.insert(v);
        }
    }
    let inner_set: BTreeSet<VertexId> = far_image.union(&buffer).copied().collect();
    let boundary: BTreeSet<Edge> = h
        .edges()
        .iter()
        .filter(|e| inner_set.contains(&e.0) != inner_set.contains(&e.1))
        .copied()
        .collect();
    let inner = h.induced(&inner_set);

    let mut scaffold = ExtensionScaffold {
        c,
        r,
        near,
        far,
        far_image,
        buffer,
        core,
        boundary,
        inner,
        shortcut: Graph::default(),
        shortcut_map: VertexMap::default(),
        fresh_base: g.max_id().map_or(0, |m| m + 1),
        shortcut_paths: 0,
    };
    build_shortcut(g, phi, &mut scaffold)?;
    Ok(scaffold)
}

fn build_shortcut(g: &Graph, phi: &VertexMap, s: &mut ExtensionScaffold) -> Result<()> {
    let far: Vec<VertexId> = s.far.iter().copied().collect();
    let limit = s.shortcut_threshold();
    let mut vertices: Vec<VertexId> = far.clone();
    let mut edges: Vec<(VertexId, VertexId)> = g
        .edges()
        .iter()
        .filter(|e| s.far.contains(&e.0) && s.far.contains(&e.1))
        .map(|e| (e.0, e.1))
        .collect();
    let mut map: BTreeMap<VertexId, VertexId> =
        far.iter().map(|&b| (b, phi.get(b).unwrap())).collect();
    let mut next = s.fresh_base;
    let mut paths = 0;

    let image_rows: BTreeMap<VertexId, Vec<Dist>> = s
        .far_image
        .iter()
        .map(|&x| Ok((x, bfs(&s.inner, s.inner.idx(x)?))))
        .collect::<Result<_>>()?;
    for (a, &b) in far.iter().enumerate() {
        let gb = bfs(g, g.idx(b)?);
        let (xb, row) = (map[&b], &image_rows[&map[&b]]);
        for &b2 in &far[a + 1..] {
            let x2 = map[&b2];
            if row[s.inner.idx(x2)?].finite().is_none_or(|d| d > limit) {
                continue;
            }
            let len = gb[g.idx(b2)?].finite().ok_or_else(|| {
                Error::hypothesis("phi is a quasi-isometry", format!("{b} and {b2} are disconnected in G"))
            })?;
            paths += 1;
            if len < 2 {
                continue;
            }
            let mut prev = b;
            for offset in 1..len {
                let v = next;
                next = next
                    .checked_add(1)
                    .ok_or_else(|| Error::Resource("shortcut vertex ids exhausted".into()))?;
                vertices.push(v);
                map.insert(v, if 2 * offset <= len { xb } else { x2 });
                edges.push((prev, v));
                prev = v;
            }
            edges.push((prev, b2));
        }
    }
    s.shortcut = Graph::new(vertices, edges)?;
    s.shortcut_map = VertexMap::from_pairs(map);
    s.shortcut_paths = paths;
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    // Spine 0..=30 with a pendant path of 20 vertices hanging off vertex 15.
    pub(crate) fn pendant() -> Graph {
        let mut edges: Vec<(u32, u32)> = (0..30).map(|i| (i, i + 1)).collect();
        edges.push((15, 31));
        edges.extend((31..50).map(|i| (i, i + 1)));
        Graph::new(0..51, edges).unwrap()
    }

    #[test]
    fn near_only_case() {
        let g = Graph::path(10);
        let phi = VertexMap::identity(&g);
        let s = build_scaffold(&g, &g, &phi, &(0..10).collect::<Vec<_>>(), 2).unwrap();
        assert!(s.is_near_only());
        assert!(s.far_image.is_empty() && s.buffer.is_empty());
        assert_eq!(s.core.len(), 10);
        assert!(s.boundary.is_empty());
        assert_eq!(s.shortcut.vertex_count(), 0);
    }

    #[test]
    fn pendant_partition() {
        let g = pendant();
        let phi = VertexMap::identity(&g);
        let spine: Vec<u32> = (0..=30).collect();
        let s = build_scaffold(&g, &g, &phi, &spine, 2).unwrap();
        assert_eq!(s.r, 12);
        // pendant depth d is vertex 30 + d; the far side starts at depth 13
        let far: BTreeSet<u32> = (43..=50).collect();
        assert_eq!(s.far, far);
        assert_eq!(s.far_image, far);
        let buffer: BTreeSet<u32> = (37..=42).collect();
        assert_eq!(s.buffer, buffer);
        assert_eq!(s.boundary, [Edge(36, 37)].into());
        assert_eq!(s.inner.vertex_count(), 14);
        // all 28 far pairs are close; pairs at distance >= 2 add fresh paths
        assert_eq!(s.shortcut_paths, 28);
        let fresh: u32 = (1..8).map(|k| (8 - k) * (k - 1)).sum::<u32>();
        assert_eq!(s.shortcut.vertex_count() as u32, 8 + fresh);
        assert_eq!(s.fresh_base, 51);
        s.check_partition(&g, &spine.iter().copied().collect()).unwrap();
        s.check_shortcut_edges().unwrap();
        for &b in &s.far {
            for &b2 in &s.far {
                let dg = bfs(&g, g.idx(b).unwrap())[g.idx(b2).unwrap()];
                let df = bfs(&s.shortcut, s.shortcut.idx(b).unwrap())[s.shortcut.idx(b2).unwrap()];
                assert_eq!(dg, df);
            }
        }
    }

    #[test]
    fn fresh_vertices_map_to_nearer_end() {
        let g = pendant();
        let phi = VertexMap::identity(&g);
        let s = build_scaffold(&g, &g, &phi, &(0..=30).collect::<Vec<_>>(), 2).unwrap();
        // first pair with a fresh path is (43, 45): one interior vertex, a tie
        assert_eq!(s.shortcut_map.get(51), Some(43));
        // next is (43, 46): interior vertices at offsets 1 and 2 of 3
        assert_eq!(s.shortcut_map.get(52), Some(43));
        assert_eq!(s.shortcut_map.get(53), Some(46));
    }
}
