//! Quasi-isometries between finite graphs.
//!
//! A map `phi: V(G) -> V(H)` is an `(L, C)`-quasi-isometry when
//!
//! 1. `dist_G(u,v)` finite implies `dist_H(phi u, phi v) <= L dist_G(u,v) + C`;
//! 2. `dist_H(phi u, phi v)` finite implies `dist_G(u,v) <= L dist_H(phi u, phi v) + C`;
//! 3. every vertex of `H` is within `C` of the image.
//!
//! `H` may carry an [`EdgeWeighting`], in which case its distances are
//! weighted. The checks here evaluate these bullets literally over all pairs,
//! including the finiteness guards.

mod compose;
mod surjectivize;

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dist, DistanceMatrix, EdgeWeighting, Graph, VertexId};

pub use compose::compose_qi;
pub use surjectivize::{pull_back_weights, surjectivize, ClusterAssignment, Surjectivization};

/// Total map from source vertex ids to target vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMap {
    image: BTreeMap<VertexId, VertexId>,
}

impl VertexMap {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Self {
        VertexMap {
            image: pairs.into_iter().collect(),
        }
    }

    pub fn identity(g: &Graph) -> Self {
        Self::from_pairs(g.vertices().iter().map(|&v| (v, v)))
    }

    pub fn get(&self, v: VertexId) -> Option<VertexId> {
        self.image.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.image.iter().map(|(&a, &b)| (a, b))
    }

    pub fn image_set(&self) -> BTreeSet<VertexId> {
        self.image.values().copied().collect()
    }

    /// The smallest-id preimage of `y`, if any.
    pub fn min_preimage(&self, y: VertexId) -> Option<VertexId> {
        self.image.iter().find(|(_, &t)| t == y).map(|(&s, _)| s)
    }

    /// Checks that the map is defined exactly on `V(source)` and lands in `V(target)`.
    pub fn check_total(&self, source: &Graph, target: &Graph) -> Result<()> {
        for &v in source.vertices() {
            match self.get(v) {
                None => return Err(Error::Input(format!("map undefined on source vertex {v}"))),
                Some(y) if !target.contains(y) => {
                    return Err(Error::Input(format!("map sends {v} to {y}, not a target vertex")))
                }
                _ => {}
            }
        }
        if let Some((v, _)) = self.iter().find(|(v, _)| !source.contains(*v)) {
            return Err(Error::Input(format!("map defined on {v}, not a source vertex")));
        }
        Ok(())
    }

    pub fn is_surjective_onto(&self, target: &Graph) -> bool {
        self.image_set().len() == target.vertex_count()
    }

    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> VertexMap {
        Self::from_pairs(self.iter().filter(|(v, _)| keep.contains(v)))
    }

    pub fn then(&self, outer: &VertexMap) -> Option<VertexMap> {
        self.iter()
            .map(|(v, y)| outer.get(y).map(|z| (v, z)))
            .collect::<Option<Vec<_>>>()
            .map(Self::from_pairs)
    }
}

/// Multiplicative constant `l` and additive constant `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QiParams {
    pub l: u64,
    pub c: u64,
}

impl QiParams {
    pub fn new(l: u64, c: u64) -> Self {
        QiParams { l, c }
    }

    /// The `(C-1, C)` normalisation.
    pub fn normalized(c: u64) -> Self {
        QiParams { l: c.saturating_sub(1), c }
    }
}

impl fmt::Display for QiParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.l, self.c)
    }
}

/// The first bullet of the definition that fails, with witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "bullet", rename_all = "snake_case")]
pub enum QiViolation {
    /// `dist_H(phi u, phi v) > L dist_G(u,v) + C` with `dist_G` finite.
    Upper { u: VertexId, v: VertexId, dist_g: Dist, dist_h: Dist },
    /// `dist_G(u,v) > L dist_H(phi u, phi v) + C` with `dist_H` finite.
    Lower { u: VertexId, v: VertexId, dist_g: Dist, dist_h: Dist },
    /// Target vertex `y` is farther than `C` from every image vertex.
    Coverage { y: VertexId, nearest: Dist },
}

impl fmt::Display for QiViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QiViolation::Upper { u, v, dist_g, dist_h } => {
                write!(f, "upper bound fails at ({u}, {v}): dist_G={dist_g}, dist_H={dist_h}")
            }
            QiViolation::Lower { u, v, dist_g, dist_h } => {
                write!(f, "lower bound fails at ({u}, {v}): dist_G={dist_g}, dist_H={dist_h}")
            }
            QiViolation::Coverage { y, nearest } => {
                write!(f, "target {y} is {nearest} from the image")
            }
        }
    }
}

/// Source and target distance tables plus the map in index form; all
/// quasi-isometry queries run against this.
#[derive(Clone, Debug)]
pub struct QiFrame<'a> {
    source: &'a Graph,
    target: &'a Graph,
    gd: Cow<'a, DistanceMatrix>,
    hd: Cow<'a, DistanceMatrix>,
    phi: Vec<usize>,
}

impl<'a> QiFrame<'a> {
    /// `weights = None` means unit weights on the target.
    pub fn new(
        source: &'a Graph,
        target: &'a Graph,
        weights: Option<&EdgeWeighting>,
        phi: &VertexMap,
    ) -> Result<Self> {
        phi.check_total(source, target)?;
        let hd = match weights {
            Some(w) => DistanceMatrix::weighted(target, w),
            None => DistanceMatrix::unweighted(target),
        };
        Self::with_tables(
            source,
            target,
            Cow::Owned(DistanceMatrix::unweighted(source)),
            Cow::Owned(hd),
            phi,
        )
    }

    pub fn with_tables(
        source: &'a Graph,
        target: &'a Graph,
        gd: Cow<'a, DistanceMatrix>,
        hd: Cow<'a, DistanceMatrix>,
        phi: &VertexMap,
    ) -> Result<Self> {
        phi.check_total(source, target)?;
        let phi = source
            .vertices()
            .iter()
            .map(|&v| target.idx(phi.get(v).unwrap()))
            .collect::<Result<Vec<_>>>()?;
        Ok(QiFrame {
            source,
            target,
            gd,
            hd,
            phi,
        })
    }

    pub fn source_distances(&self) -> &DistanceMatrix {
        &self.gd
    }

    pub fn target_distances(&self) -> &DistanceMatrix {
        &self.hd
    }

    fn pair(&self, i: usize, j: usize) -> (Dist, Dist) {
        (self.gd.get(i, j), self.hd.get(self.phi[i], self.phi[j]))
    }

    /// Distance from each target vertex to the image, by target index.
    pub fn coverage(&self) -> Vec<Dist> {
        let mut img = vec![false; self.target.vertex_count()];
        for &y in &self.phi {
            img[y] = true;
        }
        (0..self.target.vertex_count())
            .into_par_iter()
            .map(|y| {
                (0..self.target.vertex_count())
                    .filter(|&x| img[x])
                    .map(|x| self.hd.get(x, y))
                    .min()
                    .unwrap_or(Dist::Infinite)
            })
            .collect()
    }

    pub fn check(&self, p: QiParams) -> std::result::Result<(), QiViolation> {
        let n = self.source.vertex_count();
        let bound = |d: u64| p.l as u128 * d as u128 + p.c as u128;
        let bad = (0..n).into_par_iter().find_map_first(|i| {
            (i + 1..n).find_map(|j| {
                let (dg, dh) = self.pair(i, j);
                let (u, v) = (self.source.id(i), self.source.id(j));
                if let Dist::Finite(a) = dg {
                    if dh.finite().is_none_or(|b| b as u128 > bound(a)) {
                        return Some(QiViolation::Upper { u, v, dist_g: dg, dist_h: dh });
                    }
                }
                if let Dist::Finite(b) = dh {
                    if dg.finite().is_none_or(|a| a as u128 > bound(b)) {
                        return Some(QiViolation::Lower { u, v, dist_g: dg, dist_h: dh });
                    }
                }
                None
            })
        });
        if let Some(v) = bad {
            return Err(v);
        }
        let cov = self.coverage();
        if let Some((y, &nearest)) = cov
            .iter()
            .enumerate()
            .find(|(_, d)| d.finite().is_none_or(|d| d > p.c))
        {
            return Err(QiViolation::Coverage {
                y: self.target.id(y),
                nearest,
            });
        }
        Ok(())
    }

    /// Smallest `C'` such that the map is a `(1, C')`-quasi-isometry; `None`
    /// when no additive constant works (a finite distance on one side meets
    /// an infinite one on the other, or a target vertex is unreachable).
    pub fn minimal_additive(&self) -> Option<u64> {
        let n = self.source.vertex_count();
        let pairs = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut worst = 0u64;
                for j in i + 1..n {
                    match self.pair(i, j) {
                        (Dist::Finite(a), Dist::Finite(b)) => worst = worst.max(a.abs_diff(b)),
                        (Dist::Infinite, Dist::Infinite) => {}
                        _ => return None,
                    }
                }
                Some(worst)
            })
            .collect::<Option<Vec<u64>>>()?;
        let cover = self
            .coverage()
            .into_iter()
            .map(Dist::finite)
            .collect::<Option<Vec<u64>>>()?;
        Some(pairs.into_iter().chain(cover).max().unwrap_or(0))
    }

    /// Smallest `C >= 1` such that the map is a `(C-1, C)`-quasi-isometry.
    ///
    /// For a pair at distances `a` (source) and `b` (target) the upper bullet
    /// needs `b <= (C-1)a + C`, i.e. `C >= (a+b)/(a+1)`; the lower bullet is
    /// symmetric. The result is monotone: every larger `C` also passes.
    pub fn measure(&self) -> Option<u64> {
        let n = self.source.vertex_count();
        let need = |a: u64, b: u64| (a as u128 + b as u128).div_ceil(a as u128 + 1);
        let pairs = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut worst = 1u128;
                for j in i + 1..n {
                    match self.pair(i, j) {
                        (Dist::Finite(a), Dist::Finite(b)) => {
                            worst = worst.max(need(a, b)).max(need(b, a));
                        }
                        (Dist::Infinite, Dist::Infinite) => {}
                        _ => return None,
                    }
                }
                Some(worst)
            })
            .collect::<Option<Vec<u128>>>()?;
        let cover = self
            .coverage()
            .into_iter()
            .map(|d| d.finite().map(u128::from))
            .collect::<Option<Vec<u128>>>()?;
        let c = pairs.into_iter().chain(cover).max().unwrap_or(1).max(1);
        u64::try_from(c).ok()
    }
}

pub fn check_qi(
    source: &Graph,
    target: &Graph,
    weights: Option<&EdgeWeighting>,
    phi: &VertexMap,
    p: QiParams,
) -> Result<std::result::Result<(), QiViolation>> {
    Ok(QiFrame::new(source, target, weights, phi)?.check(p))
}

pub fn minimal_additive(
    source: &Graph,
    target: &Graph,
    weights: Option<&EdgeWeighting>,
    phi: &VertexMap,
) -> Result<Option<u64>> {
    Ok(QiFrame::new(source, target, weights, phi)?.minimal_additive())
}

pub fn measure_params(
    source: &Graph,
    target: &Graph,
    weights: Option<&EdgeWeighting>,
    phi: &VertexMap,
) -> Result<Option<u64>> {
    Ok(QiFrame::new(source, target, weights, phi)?.measure())
}
