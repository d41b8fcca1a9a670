//! Path decompositions: an ordered list of bags over a host graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{multi_source_bfs, Dist, Edge, Graph, VertexId};

pub type Bag = BTreeSet<VertexId>;

/// Default vertex cap for [`exact_pathwidth`].
pub const EXACT_PATHWIDTH_CAP: usize = 16;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDecomposition {
    pub bags: Vec<Bag>,
}

/// A failed decomposition axiom with its witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    UnknownVertex { vertex: VertexId, bag: usize },
    VertexUncovered(VertexId),
    EdgeUncovered(Edge),
    /// `vertex` lies in bags `first` and `last` but not in `gap` between them.
    IntervalBroken { vertex: VertexId, first: usize, gap: usize, last: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVertex { vertex, bag } => {
                write!(f, "bag {bag} holds {vertex}, which is not a host vertex")
            }
            Violation::VertexUncovered(v) => write!(f, "vertex {v} is in no bag"),
            Violation::EdgeUncovered(e) => write!(f, "edge {e} is in no bag"),
            Violation::IntervalBroken { vertex, first, gap, last } => write!(
                f,
                "vertex {vertex} is in bags {first} and {last} but not in bag {gap}"
            ),
        }
    }
}

impl PathDecomposition {
    pub fn new(bags: Vec<Bag>) -> Self {
        PathDecomposition { bags }
    }

    pub fn from_lists(bags: &[&[VertexId]]) -> Self {
        Self::new(bags.iter().map(|b| b.iter().copied().collect()).collect())
    }

    /// One bag `{i, i+1}` per edge of the path `0 - 1 - ... - (n-1)`.
    pub fn for_path(n: usize) -> Self {
        let n = n as VertexId;
        if n <= 1 {
            return Self::new((0..n).map(|v| [v].into()).collect());
        }
        Self::new((1..n).map(|i| [i - 1, i].into()).collect())
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }

    /// `max |B_t| - 1`, taken as 0 when there are no nonempty bags.
    pub fn width(&self) -> usize {
        self.max_bag_size().saturating_sub(1)
    }

    /// Checks the three axioms; every violation is reported.
    pub fn validate(&self, host: &Graph) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        let mut seen: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for (t, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if host.contains(v) {
                    seen.entry(v).or_default().push(t);
                } else {
                    out.push(Violation::UnknownVertex { vertex: v, bag: t });
                }
            }
        }
        for &v in host.vertices() {
            if !seen.contains_key(&v) {
                out.push(Violation::VertexUncovered(v));
            }
        }
        for &e in host.edges() {
            if !self.bags.iter().any(|b| b.contains(&e.0) && b.contains(&e.1)) {
                out.push(Violation::EdgeUncovered(e));
            }
        }
        for (&v, ts) in &seen {
            if let Some(w) = ts.windows(2).find(|w| w[1] != w[0] + 1) {
                out.push(Violation::IntervalBroken {
                    vertex: v,
                    first: w[0],
                    gap: w[0] + 1,
                    last: w[1],
                });
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    pub fn validated(&self, host: &Graph) -> Result<()> {
        self.validate(host).map_err(Error::InvalidDecomposition)
    }

    /// Drops empty bags, keeping the order of the rest.
    pub fn normalize_nowhere_null(&self) -> PathDecomposition {
        PathDecomposition::new(self.bags.iter().filter(|b| !b.is_empty()).cloned().collect())
    }

    /// Bags intersected with `keep`: a decomposition of the induced subgraph.
    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> PathDecomposition {
        PathDecomposition::new(
            self.bags
                .iter()
                .map(|b| b.intersection(keep).copied().collect())
                .collect(),
        )
    }

    /// Bags mapped through `f`; a valid decomposition when every fibre of `f`
    /// induces a connected subgraph.
    pub fn map_vertices(&self, f: impl Fn(VertexId) -> VertexId) -> PathDecomposition {
        PathDecomposition::new(self.bags.iter().map(|b| b.iter().map(|&v| f(v)).collect()).collect())
    }

    /// True iff every nonempty bag meets `hit`. Then deleting `hit` shrinks
    /// every bag, so the restriction to the rest has strictly smaller width.
    pub fn width_drop_check(&self, hit: &BTreeSet<VertexId>) -> bool {
        self.bags
            .iter()
            .all(|b| b.is_empty() || b.iter().any(|v| hit.contains(v)))
    }

    /// True iff every path of `host` from `B_lo` to `B_hi` meets `B_mid`.
    pub fn separator_bag_check(
        &self,
        host: &Graph,
        lo: usize,
        mid: usize,
        hi: usize,
    ) -> Result<bool> {
        let n = self.bags.len();
        if lo >= n || mid >= n || hi >= n {
            return Err(Error::Input(format!("bag index out of range ({lo}, {mid}, {hi}) with {n} bags")));
        }
        if !(lo <= mid && mid <= hi) {
            return Err(Error::Input(format!("expected {lo} <= {mid} <= {hi}")));
        }
        let sep = &self.bags[mid];
        let keep: BTreeSet<VertexId> = host
            .vertices()
            .iter()
            .copied()
            .filter(|v| !sep.contains(v))
            .collect();
        let rest = host.induced(&keep);
        let sources: Vec<usize> = self.bags[lo]
            .iter()
            .filter_map(|v| rest.idx(*v).ok())
            .collect();
        let reach = multi_source_bfs(&rest, &sources);
        Ok(self.bags[hi]
            .iter()
            .filter_map(|v| rest.idx(*v).ok())
            .all(|i| reach[i] == Dist::Infinite))
    }
}

/// Minimum-width decomposition of `g` if its path-width is at most `k_max`.
///
/// Dynamic programme over vertex subsets computing the vertex separation
/// number of the best ordering; refuses graphs above `cap` vertices.
pub fn exact_pathwidth(
    g: &Graph,
    k_max: usize,
    cap: usize,
) -> Result<Option<(usize, PathDecomposition)>> {
    let n = g.vertex_count();
    if n > cap {
        return Err(Error::Resource(format!(
            "exact path-width search is capped at {cap} vertices (graph has {n}); supply a decomposition"
        )));
    }
    if n == 0 {
        return Ok(Some((0, PathDecomposition::default())));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|i| g.adjacency(i).iter().fold(0u32, |m, &(j, _)| m | (1 << j)))
        .collect();
    let full = (1u32 << n) - 1;
    let boundary = |s: u32| -> u32 {
        (0..n)
            .filter(|&i| s & (1 << i) != 0 && nbr[i] & !s != 0)
            .count() as u32
    };
    // best[s]: min over orderings of s (placed first) of the max boundary
    // size over their prefixes; choice[s]: the vertex placed last.
    let size = 1usize << n;
    let mut best = vec![u32::MAX; size];
    let mut choice = vec![0u8; size];
    best[0] = 0;
    for s in 1..=full {
        let b = boundary(s);
        let mut m = u32::MAX;
        let mut arg = 0;
        for i in 0..n {
            if s & (1 << i) != 0 {
                let v = best[(s & !(1 << i)) as usize];
                if v < m {
                    m = v;
                    arg = i;
                }
            }
        }
        best[s as usize] = m.max(b);
        choice[s as usize] = arg as u8;
    }
    let width = best[full as usize] as usize;
    if width > k_max {
        return Ok(None);
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let i = choice[s as usize] as usize;
        order.push(i);
        s &= !(1 << i);
    }
    order.reverse();
    Ok(Some((width, decomposition_from_order(g, &order))))
}

/// Bag `i` = the `i`-th vertex plus every earlier vertex with a neighbour
/// at position `i` or later.
pub(crate) fn decomposition_from_order(g: &Graph, order: &[usize]) -> PathDecomposition {
    let mut pos = vec![0usize; order.len()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let last: Vec<usize> = (0..order.len())
        .map(|v| {
            g.adjacency(v)
                .iter()
                .map(|&(u, _)| pos[u])
                .fold(pos[v], usize::max)
        })
        .collect();
    let bags = (0..order.len())
        .map(|i| {
            order[..=i]
                .iter()
                .filter(|&&v| pos[v] == i || last[v] >= i)
                .map(|&v| g.id(v))
                .collect()
        })
        .collect();
    PathDecomposition::new(bags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        let p3 = Graph::path(3);
        let ok = PathDecomposition::from_lists(&[&[0, 1], &[1, 2]]);
        assert_eq!(ok.validate(&p3), Ok(()));
        assert_eq!(ok.width(), 1);

        let bad = PathDecomposition::from_lists(&[&[0, 1], &[2]]);
        assert_eq!(bad.validate(&p3), Err(vec![Violation::EdgeUncovered(Edge(1, 2))]));

        let tri = Graph::complete(3);
        let bad = PathDecomposition::from_lists(&[&[0], &[1], &[0, 2]]);
        let v = bad.validate(&tri).unwrap_err();
        assert!(v.contains(&Violation::EdgeUncovered(Edge(0, 1))));
        assert!(v.contains(&Violation::EdgeUncovered(Edge(1, 2))));
        assert!(v.contains(&Violation::IntervalBroken { vertex: 0, first: 0, gap: 1, last: 2 }));
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn normalize_examples() {
        let d = PathDecomposition::from_lists(&[&[0], &[], &[0, 1]]);
        assert_eq!(d.normalize_nowhere_null(), PathDecomposition::from_lists(&[&[0], &[0, 1]]));
        let d = PathDecomposition::for_path(4);
        assert_eq!(d.normalize_nowhere_null(), d);
        let d = PathDecomposition::from_lists(&[&[], &[]]);
        assert!(d.normalize_nowhere_null().is_empty());
        assert_eq!(d.normalize_nowhere_null().validate(&Graph::default()), Ok(()));
    }

    #[test]
    fn exact_pathwidth_examples() {
        let (k, d) = exact_pathwidth(&Graph::path(5), 4, EXACT_PATHWIDTH_CAP).unwrap().unwrap();
        assert_eq!(k, 1);
        assert_eq!(d.validate(&Graph::path(5)), Ok(()));
        assert_eq!(d.width(), 1);

        let k4 = Graph::complete(4);
        assert_eq!(exact_pathwidth(&k4, 3, 16).unwrap().unwrap().0, 3);
        assert!(exact_pathwidth(&k4, 2, 16).unwrap().is_none());

        let empty = Graph::new(0..5, []).unwrap();
        assert_eq!(exact_pathwidth(&empty, 0, 16).unwrap().unwrap().0, 0);

        let big = Graph::path(17);
        assert!(matches!(exact_pathwidth(&big, 3, 16), Err(Error::Resource(_))));
    }

    #[test]
    fn separator_examples() {
        let p3 = Graph::path(3);
        let d = PathDecomposition::from_lists(&[&[0, 1], &[1, 2]]);
        assert!(d.separator_bag_check(&p3, 0, 0, 1).unwrap());
        assert!(d.separator_bag_check(&p3, 1, 1, 1).unwrap());
        assert!(d.separator_bag_check(&p3, 0, 1, 3).is_err());
    }

    #[test]
    fn restrict_examples() {
        let p4 = Graph::path(4);
        let d = PathDecomposition::for_path(4);
        let all: BTreeSet<VertexId> = p4.vertices().iter().copied().collect();
        assert_eq!(d.restrict(&all), d);
        assert!(d.restrict(&BTreeSet::new()).normalize_nowhere_null().is_empty());

        let r = d.restrict(&[0, 1, 3].into());
        assert_eq!(r, PathDecomposition::from_lists(&[&[0, 1], &[1], &[3]]));
        assert_eq!(r.width(), 1);
        assert_eq!(r.validate(&p4.induced(&[0, 1, 3].into())), Ok(()));
    }

    #[test]
    fn width_drop_examples() {
        let p4 = Graph::path(4);
        let d = PathDecomposition::for_path(4);
        let all: BTreeSet<VertexId> = p4.vertices().iter().copied().collect();
        assert!(d.width_drop_check(&all));
        assert!(!d.width_drop_check(&BTreeSet::new()));
        assert!(d.width_drop_check(&[1, 2].into()));
        assert_eq!(d.restrict(&[0, 3].into()).width(), 0);
    }

    // Independent oracle: try every vertex ordering, each vertex occupying
    // the bags from its own position to its last neighbour's.
    fn brute_pathwidth(g: &Graph) -> usize {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for i in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = g.vertex_count();
        if n == 0 {
            return 0;
        }
        perms(n)
            .into_iter()
            .map(|order| {
                let mut pos = vec![0; n];
                for (p, &v) in order.iter().enumerate() {
                    pos[v] = p;
                }
                (0..n)
                    .map(|t| {
                        (0..n)
                            .filter(|&v| {
                                let end = g.adjacency(v).iter().map(|&(u, _)| pos[u]).max().unwrap_or(0);
                                pos[v] <= t && (t == pos[v] || end >= t)
                            })
                            .count()
                    })
                    .max()
                    .unwrap()
                    - 1
            })
            .min()
            .unwrap()
    }

    fn arb_small_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1usize..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(u32, u32)> = (0..n as u32)
                .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
                .collect();
            proptest::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
                let edges = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e);
                Graph::new(0..n as u32, edges).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn exact_matches_brute_force(g in arb_small_graph(7)) {
            let (k, d) = exact_pathwidth(&g, 7, 16).unwrap().unwrap();
            prop_assert_eq!(k, brute_pathwidth(&g));
            prop_assert_eq!(d.validate(&g), Ok(()));
            prop_assert!(d.width() <= k);
        }

        #[test]
        fn restriction_stays_valid(g in arb_small_graph(9), mask in any::<u16>()) {
            let (_, d) = exact_pathwidth(&g, 9, 16).unwrap().unwrap();
            let keep: BTreeSet<VertexId> = g.vertices().iter().copied().filter(|&v| mask & (1 << v) != 0).collect();
            let r = d.restrict(&keep);
            prop_assert_eq!(r.validate(&g.induced(&keep)), Ok(()));
            prop_assert!(r.width() <= d.width());
        }

        #[test]
        fn every_bag_separates(g in arb_small_graph(9)) {
            let (_, d) = exact_pathwidth(&g, 9, 16).unwrap().unwrap();
            for lo in 0..d.len() {
                for mid in lo..d.len() {
                    for hi in mid..d.len() {
                        prop_assert!(d.separator_bag_check(&g, lo, mid, hi).unwrap());
                    }
                }
            }
        }
    }
}
