//! Anchor sequences along the image of a geodesic, and the gap weighting
//! that makes the anchor path a weighted geodesic.
//!
//! Given a geodesic `p_0, ..., p_n` of `G` and a `(C-1, C)`-quasi-isometry
//! `phi: G -> H`, [`build_anchor_system`] picks a sparse set of indices `J`
//! and a path `Q` of `H` through anchor vertices `r_j` near `phi(p_j)`.
//! [`gap_weights`] then weights `H` so that `Q` is a weighted geodesic on
//! which consecutive anchors sit exactly `j - i` apart. [`fixgeo`] runs both.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::Profile;
use crate::graph::{
    bfs, dijkstra, multi_source_bfs, shortest_path, w_geodesic_violation, Dist, EdgeWeighting,
    Graph, Path, VertexId,
};
use crate::qi::{QiFrame, QiParams, VertexMap};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorSystem {
    /// The geodesic of `G`, indexed from 0.
    pub geodesic: Vec<VertexId>,
    /// Anchor indices into `geodesic`, increasing.
    pub indices: Vec<u64>,
    /// Anchor vertices of `H`, one per index, in order along `path`.
    pub anchors: Vec<VertexId>,
    pub path: Path,
    /// Geodesics of `H` between images of consecutive greedy indices.
    pub connectors: Vec<Path>,
}

impl AnchorSystem {
    pub fn anchor_of(&self, index: u64) -> Option<VertexId> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|k| self.anchors[k])
    }
}

fn image(phi: &VertexMap, v: VertexId) -> Result<VertexId> {
    phi.get(v).ok_or(Error::UnknownVertex(v))
}

fn bfs_from(h: &Graph, v: VertexId) -> Result<Vec<Dist>> {
    Ok(bfs(h, h.idx(v)?))
}

/// `4C^2 - 1`, the spacing constant handed to [`gap_weights`].
pub fn spacing_constant(c: u64) -> Result<u64> {
    c.checked_mul(c)
        .and_then(|x| x.checked_mul(4))
        .map(|x| x - 1)
        .ok_or_else(|| Error::ConstantOverflow(format!("4*{c}^2 - 1")))
}

/// `L(2L+1)`, the weight of every edge off the anchor path.
pub fn off_path_weight(l: u64) -> Result<u64> {
    l.checked_mul(2)
        .and_then(|x| x.checked_add(1))
        .and_then(|x| x.checked_mul(l))
        .ok_or_else(|| Error::ConstantOverflow(format!("{l}*(2*{l}+1)")))
}

/// Builds the anchor system for `p` under `phi`, which must be a
/// `(C-1, C)`-quasi-isometry with `C >= 2`.
pub fn build_anchor_system(
    g: &Graph,
    h: &Graph,
    phi: &VertexMap,
    p: &Path,
    c: u64,
    profile: Profile,
) -> Result<AnchorSystem> {
    if c < 2 {
        return Err(Error::Input(format!("anchor construction needs C >= 2, got {c}")));
    }
    let ends = bfs_from(g, p.first())?;
    if ends[g.idx(p.last())?] != Dist::Finite(p.len() as u64) {
        return Err(Error::hypothesis("P is a geodesic", format!("{} is not shortest", p.len())));
    }
    if profile == Profile::Checked {
        if let Err(v) = QiFrame::new(g, h, None, phi)?.check(QiParams::normalized(c)) {
            return Err(Error::hypothesis("phi is a (C-1, C)-quasi-isometry", v.to_string()));
        }
    }

    let pts = p.vertices();
    let img: Vec<VertexId> = pts.iter().map(|&v| image(phi, v)).collect::<Result<_>>()?;
    let last = pts.len() - 1;
    let reach = 2 * c;

    // greedy indices and their connectors
    let mut greedy = vec![0usize];
    let mut connectors = Vec::new();
    while *greedy.last().unwrap() < last {
        let i = *greedy.last().unwrap();
        let from = bfs_from(h, img[i])?;
        let next = (0..=last)
            .rev()
            .find(|&t| from[h.idx(img[t]).unwrap()].finite().is_some_and(|d| d <= reach))
            .unwrap();
        if next <= i {
            return Err(Error::hypothesis(
                "phi is a (C-1, C)-quasi-isometry",
                format!("phi(p_{}) is farther than {reach} from phi(p_{i})", i + 1),
            ));
        }
        connectors.push(shortest_path(h, img[i], img[next])?.expect("within reach"));
        greedy.push(next);
    }

    for (a, ta) in connectors.iter().enumerate() {
        let sa: BTreeSet<_> = ta.vertices().iter().collect();
        for (b, tb) in connectors.iter().enumerate().skip(a + 2) {
            if let Some(v) = tb.vertices().iter().find(|v| sa.contains(v)) {
                return Err(Error::assertion(
                    "non-consecutive connectors are disjoint",
                    format!("connectors {a} and {b} share {v}"),
                ));
            }
        }
    }

    let (seq, junctions) = stitch(&img[0], &connectors);
    let path = Path::new(h, seq)?;
    let mut indices: Vec<u64> = greedy.iter().map(|&i| i as u64).collect();
    let mut anchors = vec![img[0]];
    anchors.extend(junctions);
    anchors.push(img[last]);
    if connectors.is_empty() {
        anchors.truncate(1);
    } else if anchors.len() == 2 && anchors[0] == anchors[1] {
        // both ends share an image: the path is a single vertex
        indices.truncate(1);
        anchors.truncate(1);
    }

    let system = AnchorSystem {
        geodesic: pts.to_vec(),
        indices,
        anchors,
        path,
        connectors,
    };
    if profile == Profile::Checked {
        check_anchor_system(h, &img, &system, c)?;
    }
    Ok(system)
}

// Walks each connector forward from its entry vertex up to the first vertex
// lying on the next connector, then finishes along the last one. Returns the
// stitched sequence and the interior junction vertices.
fn stitch(start: &VertexId, connectors: &[Path]) -> (Vec<VertexId>, Vec<VertexId>) {
    let mut seq = vec![*start];
    let mut junctions = Vec::new();
    for (k, t) in connectors.iter().enumerate() {
        let entry = *seq.last().unwrap();
        let from = t.position(entry).expect("entry lies on the connector");
        let walk = &t.vertices()[from + 1..];
        match connectors.get(k + 1) {
            Some(next) => {
                if next.contains(entry) {
                    junctions.push(entry);
                    continue;
                }
                let stop = walk.iter().position(|&v| next.contains(v)).expect("consecutive connectors meet");
                seq.extend_from_slice(&walk[..=stop]);
                junctions.push(walk[stop]);
            }
            None => seq.extend_from_slice(walk),
        }
    }
    (seq, junctions)
}

fn check_anchor_system(h: &Graph, img: &[VertexId], s: &AnchorSystem, c: u64) -> Result<()> {
    let q = &s.path;
    let pos: Vec<usize> = s
        .anchors
        .iter()
        .map(|&r| q.position(r).ok_or_else(|| Error::assertion("anchors lie on Q", format!("{r}"))))
        .collect::<Result<_>>()?;
    if pos.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::assertion("anchors are distinct and in order", format!("{:?}", s.anchors)));
    }
    if pos.first() != Some(&0) || pos.last() != Some(&q.len()) {
        return Err(Error::assertion("Q is the union of anchor subpaths", format!("{pos:?}")));
    }
    let gap = 2 * c * c;
    if let Some(w) = s.indices.windows(2).find(|w| w[1] - w[0] > gap) {
        return Err(Error::assertion("index gaps are at most 2C^2", format!("{w:?}")));
    }
    let l = spacing_constant(c)?;
    for (a, &r) in s.anchors.iter().enumerate() {
        let from = bfs_from(h, r)?;
        let j = s.indices[a];
        let own = from[h.idx(img[j as usize])?];
        if own.finite().is_none_or(|d| d > 2 * c) {
            return Err(Error::assertion(
                "anchors lie within 2C of their images",
                format!("r_{j}={r} is {own} from phi(p_{j})"),
            ));
        }
        for b in a + 1..s.anchors.len() {
            let span = s.indices[b] - j;
            let dh = from[h.idx(s.anchors[b])?];
            if dh.finite().is_none_or(|d| (l as u128 * d as u128) < span as u128) {
                return Err(Error::assertion(
                    "anchors spread out: (4C^2-1) dist_H(r_i, r_j) >= j - i",
                    format!("indices {j}, {}: dist {dh}", s.indices[b]),
                ));
            }
            if (pos[b] - pos[a]) as u128 > 2 * c as u128 * span as u128 {
                return Err(Error::assertion(
                    "dist_Q(r_i, r_j) <= 2C (j - i)",
                    format!("indices {j}, {}", s.indices[b]),
                ));
            }
        }
    }
    let sources = s
        .indices
        .iter()
        .map(|&j| h.idx(img[j as usize]))
        .collect::<Result<Vec<_>>>()?;
    let near = multi_source_bfs(h, &sources);
    for &v in q.vertices() {
        let d = near[h.idx(v)?];
        if d.finite().is_none_or(|d| d > c) {
            return Err(Error::assertion(
                "every Q vertex is within C of an anchored image",
                format!("{v} is {d} away"),
            ));
        }
    }
    Ok(())
}

/// Weights `h` so that `q` is a weighted geodesic and the anchors
/// `anchors[k]` (at integer positions `indices[k]`) are exactly
/// `indices[b] - indices[a]` apart. Edges off `q` weigh `L(2L+1)`.
pub fn gap_weights(
    h: &Graph,
    q: &Path,
    indices: &[u64],
    anchors: &[VertexId],
    l: u64,
    profile: Profile,
) -> Result<EdgeWeighting> {
    if indices.len() != anchors.len() || indices.is_empty() {
        return Err(Error::Input("need one anchor vertex per index".into()));
    }
    if l == 0 {
        return Err(Error::Input("L must be positive".into()));
    }
    let pos: Vec<usize> = anchors
        .iter()
        .map(|&r| q.position(r).ok_or_else(|| Error::hypothesis("anchors lie on Q", format!("{r}"))))
        .collect::<Result<_>>()?;
    if pos.windows(2).any(|w| w[0] >= w[1]) || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::hypothesis("anchors are distinct and in order", format!("{anchors:?}")));
    }
    if pos[0] != 0 || *pos.last().unwrap() != q.len() {
        return Err(Error::hypothesis("Q is the union of anchor subpaths", format!("{pos:?}")));
    }
    if let Some(w) = indices.windows(2).find(|w| w[1] - w[0] > l) {
        return Err(Error::hypothesis("consecutive index gaps are at most L", format!("{w:?}")));
    }
    for a in 0..anchors.len() {
        let from = bfs_from(h, anchors[a])?;
        for b in a + 1..anchors.len() {
            let span = (indices[b] - indices[a]) as u128;
            let dh = from[h.idx(anchors[b])?];
            if dh.finite().is_none_or(|d| (l as u128 * d as u128) < span) {
                return Err(Error::hypothesis(
                    "dist_H(r_i, r_j) >= (j - i) / L",
                    format!("indices {}, {}", indices[a], indices[b]),
                ));
            }
            if (pos[b] - pos[a]) as u128 > l as u128 * span {
                return Err(Error::hypothesis(
                    "dist_Q(r_i, r_j) <= L (j - i)",
                    format!("indices {}, {}", indices[a], indices[b]),
                ));
            }
        }
    }

    let mut w = EdgeWeighting::constant(h, off_path_weight(l)?);
    let seq = q.vertices();
    for (k, &at) in pos.iter().enumerate().skip(1) {
        let start = pos[k - 1];
        for s in start..at {
            let e = h.edge_index(seq[s], seq[s + 1]).expect("path edge");
            w.set(e, if s == start { indices[k] - indices[k - 1] } else { 0 });
        }
    }

    match profile {
        Profile::Checked => {
            if let Some((x, y, d, along)) = w_geodesic_violation(h, &w, q)? {
                return Err(Error::assertion(
                    "Q is a w-geodesic",
                    format!("between {x} and {y}: {d} < {along} along Q"),
                ));
            }
            check_anchor_distances(h, &w, indices, anchors, anchors.len())?;
        }
        Profile::Fast => check_anchor_distances(h, &w, indices, anchors, 2)?,
    }
    Ok(w)
}

// Exact weighted distances from each anchor to the next `reach - 1` anchors.
fn check_anchor_distances(
    h: &Graph,
    w: &EdgeWeighting,
    indices: &[u64],
    anchors: &[VertexId],
    reach: usize,
) -> Result<()> {
    for a in 0..anchors.len() {
        let from = dijkstra(h, w, h.idx(anchors[a])?);
        for b in a + 1..anchors.len().min(a + reach) {
            let d = from[h.idx(anchors[b])?];
            if d != Dist::Finite(indices[b] - indices[a]) {
                return Err(Error::assertion(
                    "wdist(r_i, r_j) = j - i",
                    format!("indices {}, {}: weighted distance {d}", indices[a], indices[b]),
                ));
            }
        }
    }
    Ok(())
}

/// Weighting and anchors produced by [`fixgeo`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixgeo {
    pub weights: EdgeWeighting,
    pub system: AnchorSystem,
    /// The constant actually used; differs from the requested one after a retry.
    pub c: u64,
    pub retried: bool,
}

/// Anchor system plus gap weighting with `L = 4C^2 - 1`, so the weighting has
/// size at most `32 C^4`.
pub fn fixgeo(
    g: &Graph,
    h: &Graph,
    phi: &VertexMap,
    p: &Path,
    c: u64,
    profile: Profile,
) -> Result<(EdgeWeighting, AnchorSystem)> {
    let system = build_anchor_system(g, h, phi, p, c, profile)?;
    let l = spacing_constant(c)?;
    let w = gap_weights(h, &system.path, &system.indices, &system.anchors, l, profile)?;
    if profile == Profile::Checked {
        check_fixgeo(h, phi, &system, &w, c)?;
    }
    Ok((w, system))
}

/// [`fixgeo`], retried once with `C = 4` when an assertion fails at `C < 4`.
pub fn fixgeo_retrying(
    g: &Graph,
    h: &Graph,
    phi: &VertexMap,
    p: &Path,
    c: u64,
    profile: Profile,
) -> Result<Fixgeo> {
    match fixgeo(g, h, phi, p, c, profile) {
        Ok((weights, system)) => Ok(Fixgeo { weights, system, c, retried: false }),
        Err(Error::Assertion { .. }) if c < 4 => {
            let (weights, system) = fixgeo(g, h, phi, p, 4, profile)?;
            Ok(Fixgeo { weights, system, c: 4, retried: true })
        }
        Err(e) => Err(e),
    }
}

/// The a-priori size bound `32 C^4`.
pub fn fixgeo_size_bound(c: u64) -> u128 {
    32 * (c as u128).pow(4)
}

fn check_fixgeo(h: &Graph, phi: &VertexMap, s: &AnchorSystem, w: &EdgeWeighting, c: u64) -> Result<()> {
    if w.size() as u128 > fixgeo_size_bound(c) {
        return Err(Error::assertion("size at most 32C^4", format!("size {}", w.size())));
    }
    let near = c * c;
    let far = c as u128 * c as u128 * c as u128;
    let rows: Vec<Vec<Dist>> = s.anchors.iter().map(|&r| bfs_from(h, r)).collect::<Result<_>>()?;
    for (i, &v) in s.geodesic.iter().enumerate() {
        let y = h.idx(image(phi, v)?)?;
        let i = i as u64;
        let ok = s.indices.iter().zip(&rows).any(|(&j, row)| {
            j.abs_diff(i) <= near && row[y].finite().is_some_and(|d| (d as u128) < far)
        });
        if !ok {
            return Err(Error::assertion(
                "every index has an anchor within C^2 steps and C^3 distance",
                format!("index {i}"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{is_w_geodesic, wdist};

    fn halving(n: u32) -> (Graph, Graph, VertexMap) {
        let g = Graph::path(2 * n as usize);
        let h = Graph::path(n as usize);
        let phi = VertexMap::from_pairs((0..2 * n).map(|v| (v, v / 2)));
        (g, h, phi)
    }

    #[test]
    fn identity_on_p6() {
        let g = Graph::path(6);
        let phi = VertexMap::identity(&g);
        let p = Path::new(&g, (0..6).collect()).unwrap();
        let s = build_anchor_system(&g, &g, &phi, &p, 2, Profile::Checked).unwrap();
        assert_eq!(s.indices, [0, 4, 5]);
        assert_eq!(s.anchors, [0, 4, 5]);
        assert_eq!(s.path.vertices(), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(s.connectors.len(), 2);
    }

    #[test]
    fn single_vertex_geodesic() {
        let g = Graph::path(3);
        let phi = VertexMap::identity(&g);
        let p = Path::single(1);
        let (w, s) = fixgeo(&g, &g, &phi, &p, 2, Profile::Checked).unwrap();
        assert_eq!(s.indices, [0]);
        assert_eq!(s.anchors, [1]);
        assert!(s.connectors.is_empty());
        assert_eq!(s.path.vertices(), &[1]);
        // every edge is off the trivial path: L = 15, L(2L+1) = 465
        assert!(g.edges().iter().all(|e| w.weight(&g, e.0, e.1) == Some(15 * 31)));
    }

    #[test]
    fn halving_map() {
        let (g, h, phi) = halving(10);
        let p = Path::new(&g, (0..20).collect()).unwrap();
        let c = QiFrame::new(&g, &h, None, &phi).unwrap().measure().unwrap().max(2);
        let (w, s) = fixgeo(&g, &h, &phi, &p, c, Profile::Checked).unwrap();
        let l = spacing_constant(c).unwrap();
        assert!(s.indices.windows(2).all(|x| x[1] - x[0] <= l));
        assert!(is_w_geodesic(&h, &w, &s.path).unwrap());
        for a in 0..s.anchors.len() {
            for b in a..s.anchors.len() {
                assert_eq!(
                    wdist(&h, &w, s.anchors[a], s.anchors[b]).unwrap(),
                    Dist::Finite(s.indices[b] - s.indices[a])
                );
            }
        }
        assert!(w.size() as u128 <= fixgeo_size_bound(c));
    }

    #[test]
    fn gap_weights_single_edge() {
        let h = Graph::path(2);
        let q = Path::new(&h, vec![0, 1]).unwrap();
        let w = gap_weights(&h, &q, &[0, 1], &[0, 1], 1, Profile::Checked).unwrap();
        assert_eq!(w.weight(&h, 0, 1), Some(1));
    }

    #[test]
    fn gap_weights_with_chord() {
        // r0 = 0, x = 1, r2 = 2, plus the chord 0-2
        let h = Graph::complete(3);
        let q = Path::new(&h, vec![0, 1, 2]).unwrap();
        let w = gap_weights(&h, &q, &[0, 2], &[0, 2], 2, Profile::Checked).unwrap();
        assert_eq!(w.weight(&h, 0, 1), Some(2));
        assert_eq!(w.weight(&h, 1, 2), Some(0));
        assert_eq!(w.weight(&h, 0, 2), Some(10));
        assert_eq!(wdist(&h, &w, 0, 2).unwrap(), Dist::Finite(2));
        assert_eq!(w.size(), 10);
    }

    #[test]
    fn gap_weights_rejects_bad_hypotheses() {
        let h = Graph::path(4);
        let q = Path::new(&h, vec![0, 1, 2, 3]).unwrap();
        // index gap 5 > L = 2
        assert!(matches!(
            gap_weights(&h, &q, &[0, 5], &[0, 3], 2, Profile::Checked),
            Err(Error::Hypothesis { .. })
        ));
        // anchors do not span Q
        assert!(matches!(
            gap_weights(&h, &q, &[0, 1], &[0, 2], 2, Profile::Checked),
            Err(Error::Hypothesis { .. })
        ));
        // Q length 3 > L (j - i) = 1
        assert!(matches!(
            gap_weights(&h, &q, &[0, 1], &[0, 3], 1, Profile::Checked),
            Err(Error::Hypothesis { .. })
        ));
    }

    #[test]
    fn size_bound_at_two() {
        assert_eq!(fixgeo_size_bound(2), 512);
        let l = spacing_constant(2).unwrap();
        assert_eq!(l, 15);
        assert_eq!(off_path_weight(l).unwrap(), 465);
        for c in 2..50u64 {
            let l = spacing_constant(c).unwrap();
            assert!(off_path_weight(l).unwrap() as u128 <= fixgeo_size_bound(c));
        }
    }

    #[test]
    fn identity_paths_stay_small() {
        for n in 2..30 {
            let g = Graph::path(n);
            let phi = VertexMap::identity(&g);
            let p = Path::new(&g, (0..n as u32).collect()).unwrap();
            let (w, _) = fixgeo(&g, &g, &phi, &p, 2, Profile::Checked).unwrap();
            assert!(w.size() <= 8, "n={n}: size {}", w.size());
        }
    }

    #[test]
    fn non_geodesic_is_rejected() {
        let g = Graph::cycle(5);
        let phi = VertexMap::identity(&g);
        let p = Path::new(&g, vec![0, 1, 2, 3]).unwrap();
        assert!(matches!(
            build_anchor_system(&g, &g, &phi, &p, 2, Profile::Checked),
            Err(Error::Hypothesis { .. })
        ));
    }
}
