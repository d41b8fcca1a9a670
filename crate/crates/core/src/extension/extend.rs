use std::borrow::Cow;
use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;

use super::ledger::{constants, ConstantLedger};
use super::scaffold::ExtensionScaffold;
use super::{LevelRecord, Profile};
use crate::anchor::AnchorSystem;
use crate::decomposition::PathDecomposition;
use crate::error::{Error, Result};
use crate::graph::{
    bfs, w_geodesic_violation, Dist, DistanceMatrix, EdgeWeighting, Graph, VertexId,
};
use crate::qi::{QiFrame, QiParams, VertexMap};

/// A weighting of the target with the constants it is claimed to meet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounded {
    pub weights: EdgeWeighting,
    /// The map is claimed to be a `(1, additive)`-quasi-isometry onto the
    /// weighted target.
    pub additive: BigUint,
    /// Claimed upper bound on the weighting's size.
    pub size: BigUint,
    pub levels: Vec<LevelRecord>,
}

/// Produces additive-error weightings for targets of smaller width.
pub trait AdditiveBounder {
    fn bound(
        &self,
        source: &Graph,
        target: &Graph,
        decomposition: &PathDecomposition,
        phi: &VertexMap,
        depth: usize,
    ) -> Result<Bounded>;
}

/// Everything the extension needs from the local step.
#[derive(Clone, Copy, Debug)]
pub struct LocalWeighting<'a> {
    pub source: &'a Graph,
    pub target: &'a Graph,
    pub phi: &'a VertexMap,
    pub system: &'a AnchorSystem,
    pub weights: &'a EdgeWeighting,
    pub c: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub weights: EdgeWeighting,
    pub ledger: ConstantLedger,
    pub inner: Option<Bounded>,
    /// Measured `C` of the shortcut map, when there is a far side.
    pub shortcut_measured: Option<u64>,
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

// a <= b + slack, with slack in arbitrary precision
fn within(a: u64, b: u64, slack: &BigUint) -> bool {
    a <= b || big(a - b) <= *slack
}

/// Checks that the local step meets the hypotheses of the extension at scale
/// `c`: `phi` is a `(c-1, c)`-quasi-isometry, the anchors lie in order on a
/// path they span, each geodesic vertex is near an anchor, the path stays
/// near the anchored images, and the local weighting is small and makes the
/// path a weighted geodesic with exact anchor spacing.
pub fn check_local_weighting(local: &LocalWeighting) -> Result<()> {
    let LocalWeighting { source: g, target: h, phi, system: s, weights: w1, c } = *local;
    if let Err(v) = QiFrame::new(g, h, None, phi)?.check(QiParams::normalized(c)) {
        return Err(Error::hypothesis("phi is a (c-1, c)-quasi-isometry", v.to_string()));
    }
    let q = &s.path;
    let pos: Vec<usize> = s
        .anchors
        .iter()
        .map(|&r| q.position(r).ok_or_else(|| Error::hypothesis("anchors lie on Q", format!("{r}"))))
        .collect::<Result<_>>()?;
    if pos.windows(2).any(|p| p[0] >= p[1]) || pos[0] != 0 || *pos.last().unwrap() != q.len() {
        return Err(Error::hypothesis("anchors are in order and span Q", format!("{pos:?}")));
    }
    let img = |v: VertexId| phi.get(v).ok_or(Error::UnknownVertex(v));
    let rows: Vec<Vec<Dist>> = s.anchors.iter().map(|&r| Ok(bfs(h, h.idx(r)?))).collect::<Result<_>>()?;
    for (k, &j) in s.indices.iter().enumerate() {
        let d = rows[k][h.idx(img(s.geodesic[j as usize])?)?];
        if d.finite().is_none_or(|d| d > c) {
            return Err(Error::hypothesis("dist_H(phi(p_j), r_j) <= c", format!("index {j}: {d}")));
        }
    }
    for (i, &p) in s.geodesic.iter().enumerate() {
        let y = h.idx(img(p)?)?;
        let ok = s.indices.iter().zip(&rows).any(|(&j, row)| {
            j.abs_diff(i as u64) <= c && row[y].finite().is_some_and(|d| d < c)
        });
        if !ok {
            return Err(Error::hypothesis("every index has a close anchor", format!("index {i}")));
        }
    }
    let anchored: Vec<usize> = s
        .indices
        .iter()
        .map(|&j| h.idx(img(s.geodesic[j as usize])?))
        .collect::<Result<_>>()?;
    let near = crate::graph::multi_source_bfs(h, &anchored);
    for &v in q.vertices() {
        if near[h.idx(v)?].finite().is_none_or(|d| d > c) {
            return Err(Error::hypothesis("Q stays within c of the anchored images", format!("{v}")));
        }
    }
    if w1.size() > c {
        return Err(Error::hypothesis("local weighting has size at most c", format!("size {}", w1.size())));
    }
    if let Some((x, y, d, along)) = w_geodesic_violation(h, w1, q)? {
        return Err(Error::hypothesis("Q is a w1-geodesic", format!("{x}-{y}: {d} < {along}")));
    }
    for a in 0..s.anchors.len() {
        let from = crate::graph::dijkstra(h, w1, h.idx(s.anchors[a])?);
        for b in a + 1..s.anchors.len() {
            let d = from[h.idx(s.anchors[b])?];
            if d != Dist::Finite(s.indices[b] - s.indices[a]) {
                return Err(Error::hypothesis(
                    "wdist(r_i, r_j) = j - i",
                    format!("indices {}, {}: {d}", s.indices[a], s.indices[b]),
                ));
            }
        }
    }
    Ok(())
}

/// Reweights the far side with the bounder's weighting of the inner graph,
/// keeps the local weighting on the core, and puts `c3` on the boundary.
///
/// `inner_decomposition` must decompose `scaffold.inner`. With a checked
/// profile the hypotheses and every intermediate inequality of the
/// construction are verified, ending with `phi` being a
/// `(1, c0)`-quasi-isometry onto the result.
pub fn extend_weights(
    local: &LocalWeighting,
    scaffold: &ExtensionScaffold,
    inner_decomposition: &PathDecomposition,
    bounder: &dyn AdditiveBounder,
    depth: usize,
    profile: Profile,
) -> Result<Extension> {
    let LocalWeighting { source: _, target: h, phi, system, weights: w1, c } = *local;
    if scaffold.c != c {
        return Err(Error::Input(format!("scaffold scale {} differs from {c}", scaffold.c)));
    }
    let spine_image: BTreeSet<VertexId> = system
        .geodesic
        .iter()
        .map(|&v| phi.get(v).ok_or(Error::UnknownVertex(v)))
        .collect::<Result<_>>()?;
    let checked = profile == Profile::Checked;
    if checked {
        check_local_weighting(local)?;
        scaffold.check_partition(h, &spine_image)?;
        scaffold.check_shortcut_edges()?;
    }

    let (inner, shortcut_measured) = if scaffold.is_near_only() {
        (None, None)
    } else {
        let psi = &scaffold.shortcut_map;
        let frame = QiFrame::new(&scaffold.shortcut, &scaffold.inner, None, psi)?;
        let measured = frame.measure().ok_or_else(|| {
            Error::assertion("the shortcut map is a quasi-isometry", "no finite parameters")
        })?;
        if checked {
            let probe = constants(&big(c), &BigUint::one());
            let (l, add) = probe.shortcut_params();
            if big(measured) > (l + 1u32).max(add) {
                return Err(Error::assertion(
                    "shortcut map within its worst-case parameters",
                    format!("measured {measured}"),
                ));
            }
        }
        let bounded = bounder.bound(&scaffold.shortcut, &scaffold.inner, inner_decomposition, psi, depth + 1)?;
        if checked {
            let wf = QiFrame::new(&scaffold.shortcut, &scaffold.inner, Some(&bounded.weights), psi)?;
            let achieved = wf.minimal_additive();
            if achieved.is_none_or(|a| big(a) > bounded.additive) || big(bounded.weights.size()) > bounded.size {
                return Err(Error::assertion(
                    "the inner weighting meets its claimed constants",
                    format!("additive {achieved:?} vs {}, size {} vs {}", bounded.additive, bounded.weights.size(), bounded.size),
                ));
            }
        }
        (Some(bounded), Some(measured))
    };

    let c_rec = inner
        .as_ref()
        .map(|b| b.additive.clone().max(b.size.clone()).max(BigUint::one()))
        .unwrap_or_else(BigUint::one);
    let ledger = constants(&big(c), &c_rec);
    let boundary_weight = if scaffold.boundary.is_empty() { 0 } else { ledger.c3_weight()? };
    let inner_set = scaffold.inner_vertices();
    let weights = EdgeWeighting::from_fn(h, |e| match (inner_set.contains(&e.0), inner_set.contains(&e.1)) {
        (true, true) => {
            let b = inner.as_ref().expect("inner edges need an inner weighting");
            b.weights.weight(&scaffold.inner, e.0, e.1).expect("inner edge")
        }
        (false, false) => w1.get(h.edge_index(e.0, e.1).unwrap()),
        _ => boundary_weight,
    });

    if checked {
        check_claims(local, scaffold, &weights, &ledger)?;
    }
    Ok(Extension { weights, ledger, inner, shortcut_measured })
}

fn check_claims(
    local: &LocalWeighting,
    scaffold: &ExtensionScaffold,
    w: &EdgeWeighting,
    ledger: &ConstantLedger,
) -> Result<()> {
    let LocalWeighting { source: g, target: h, phi, system, weights: w1, c } = *local;
    if big(w.size()) > ledger.c3 {
        return Err(Error::assertion("size at most c3", format!("size {}", w.size())));
    }
    let gd = DistanceMatrix::unweighted(g);
    let hw = DistanceMatrix::weighted(h, w);
    let img: Vec<usize> = g
        .vertices()
        .iter()
        .map(|&v| h.idx(phi.get(v).unwrap()))
        .collect::<Result<_>>()?;
    let n = g.vertex_count();

    // along the geodesic: wdist(phi p_i, phi p_j) <= (j - i) + 2c^2
    let spine: Vec<usize> = system.geodesic.iter().map(|&v| g.idx(v)).collect::<Result<_>>()?;
    let slack5 = 2 * c as u128 * c as u128;
    for (i, &a) in spine.iter().enumerate() {
        for (j, &b) in spine.iter().enumerate().skip(i) {
            let d = hw.get(img[a], img[b]);
            if d.finite().is_none_or(|d| d as u128 > (j - i) as u128 + slack5) {
                return Err(Error::assertion(
                    "wdist(phi p_i, phi p_j) <= (j - i) + 2c^2",
                    format!("indices {i}, {j}: {d}"),
                ));
            }
        }
    }

    // H[Z] with the local weighting
    let core = h.induced(&scaffold.core);
    let core_w = EdgeWeighting::from_fn(&core, |e| w1.get(h.edge_index(e.0, e.1).unwrap()));
    let core_d = DistanceMatrix::weighted(&core, &core_w);
    let core_idx: Vec<Option<usize>> = img.iter().map(|&y| core.idx(h.id(y)).ok()).collect();

    let upper = ledger.upper_slack();
    let slack7 = 4u32 * (&ledger.r + 3u32) * &ledger.c * &ledger.c;
    for u in 0..n {
        for v in u + 1..n {
            let dg = gd.get(u, v);
            let dh = hw.get(img[u], img[v]);
            if let Dist::Finite(a) = dg {
                if dh.finite().is_none_or(|b| !within(b, a, &upper)) {
                    return Err(Error::assertion(
                        "wdist <= dist_G + 4cc' + 2c^2 + 2r + 2crc3",
                        format!("({}, {}): {dh} vs {dg}", g.id(u), g.id(v)),
                    ));
                }
            }
            if let Dist::Finite(b) = dh {
                if dg.finite().is_none_or(|a| !within(a, b, &ledger.c2)) {
                    return Err(Error::assertion(
                        "dist_G <= wdist + c2",
                        format!("({}, {}): {dg} vs {dh}", g.id(u), g.id(v)),
                    ));
                }
            }
            if let (Some(x), Some(y)) = (core_idx[u], core_idx[v]) {
                if let Dist::Finite(b) = core_d.get(x, y) {
                    if dg.finite().is_none_or(|a| !within(a, b, &slack7)) {
                        return Err(Error::assertion(
                            "dist_G <= w(T) + 4(r+3)c^2 inside the core",
                            format!("({}, {})", g.id(u), g.id(v)),
                        ));
                    }
                }
            }
        }
    }

    let frame = QiFrame::with_tables(g, h, Cow::Borrowed(&gd), Cow::Borrowed(&hw), phi)?;
    let cover_bound = ledger.reach() * (&ledger.c).max(&ledger.c_rec);
    for (y, d) in frame.coverage().into_iter().enumerate() {
        if d.finite().is_none_or(|d| big(d) > cover_bound) {
            return Err(Error::assertion(
                "every target vertex within (r+2)c max(c, c') of the image",
                format!("{} is {d} away", h.id(y)),
            ));
        }
    }
    match frame.minimal_additive() {
        Some(a) if big(a) <= ledger.c0 => Ok(()),
        other => Err(Error::assertion(
            "phi is a (1, c0)-quasi-isometry onto the weighted target",
            format!("minimal additive {other:?}, c0 = {}", ledger.c0),
        )),
    }
}
