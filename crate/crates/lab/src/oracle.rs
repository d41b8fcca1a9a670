//! Independent certification.
//!
//! Distances here come from a plain Floyd-Warshall over an adjacency matrix;
//! nothing in this module calls into the distance code of `qirw-core`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use qirw_core::extension::{ConstantLedger, SynthesisReport, Verdict};
use qirw_core::{Graph, VertexId};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::Instance;

/// All-pairs shortest distances of `g` under `weight`, `None` when
/// unreachable. Row and column order follow `g.vertices()`.
pub fn all_pairs(g: &Graph, weight: impl Fn(VertexId, VertexId) -> u64) -> Vec<Vec<Option<u64>>> {
    let n = g.vertex_count();
    let pos: BTreeMap<VertexId, usize> = g.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for e in g.edges() {
        let (a, b) = (pos[&e.0], pos[&e.1]);
        let w = weight(e.0, e.1);
        for (x, y) in [(a, b), (b, a)] {
            d[x][y] = Some(d[x][y].map_or(w, |o: u64| o.min(w)));
        }
    }
    for k in 0..n {
        let through = d[k].clone();
        d.par_iter_mut().for_each(|row| {
            if let Some(a) = row[k] {
                for (cell, b) in row.iter_mut().zip(&through) {
                    if let Some(b) = b {
                        let s = a + b;
                        if cell.is_none_or(|c| s < c) {
                            *cell = Some(s);
                        }
                    }
                }
            }
        });
    }
    d
}

/// Unit-weight all-pairs distances.
pub fn hop_distances(g: &Graph) -> Vec<Vec<Option<u64>>> {
    all_pairs(g, |_, _| 1)
}

/// Smallest `C'` making `phi` a `(1, C')`-quasi-isometry onto `h` weighted
/// by `weights`, from scratch. `None` if finiteness differs on some pair or
/// some target vertex cannot reach the image.
pub fn oracle_additive(inst: &Instance, weights: &BTreeMap<(VertexId, VertexId), u64>) -> Option<u64> {
    let dg = hop_distances(&inst.g);
    let dh = all_pairs(&inst.h, |u, v| weights[&(u.min(v), u.max(v))]);
    additive_from_tables(inst, &dg, &dh)
}

pub fn additive_from_tables(inst: &Instance, dg: &[Vec<Option<u64>>], dh: &[Vec<Option<u64>>]) -> Option<u64> {
    let hpos: BTreeMap<VertexId, usize> = inst.h.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let img: Vec<usize> = inst.g.vertices().iter().map(|&v| inst.phi.get(v).and_then(|y| hpos.get(&y).copied())).collect::<Option<_>>()?;
    let pairs = (0..img.len())
        .into_par_iter()
        .map(|i| {
            let mut worst = 0u64;
            for j in 0..img.len() {
                match (dg[i][j], dh[img[i]][img[j]]) {
                    (Some(a), Some(b)) => worst = worst.max(a.abs_diff(b)),
                    (None, None) => {}
                    _ => return None,
                }
            }
            Some(worst)
        })
        .collect::<Option<Vec<u64>>>()?;
    let cover = (0..dh.len())
        .into_par_iter()
        .map(|y| img.iter().filter_map(|&x| dh[x][y]).min())
        .collect::<Option<Vec<u64>>>()?;
    pairs.into_iter().chain(cover).max()
}

/// Literal `(l, c)`-quasi-isometry test over unit-weight distances.
pub fn is_quasi_isometry(g: &Graph, h: &Graph, phi: &qirw_core::VertexMap, l: u64, c: u64) -> bool {
    let dg = hop_distances(g);
    let dh = hop_distances(h);
    let hpos: BTreeMap<VertexId, usize> = h.vertices().iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let Some(img) = g
        .vertices()
        .iter()
        .map(|&v| phi.get(v).and_then(|y| hpos.get(&y).copied()))
        .collect::<Option<Vec<usize>>>()
    else {
        return false;
    };
    let pairs_ok = (0..img.len()).into_par_iter().all(|i| {
        (0..img.len()).all(|j| {
            let (a, b) = (dg[i][j], dh[img[i]][img[j]]);
            a.is_none_or(|a| b.is_some_and(|b| b <= l * a + c))
                && b.is_none_or(|b| a.is_some_and(|a| a <= l * b + c))
        })
    });
    pairs_ok && (0..dh.len()).all(|y| img.iter().any(|&x| dh[x][y].is_some_and(|d| d <= c)))
}

/// The extension constants, evaluated term by term.
pub fn ledger_reference(c: &BigUint, k: &BigUint) -> [BigUint; 4] {
    let one = BigUint::from(1u32);
    let two = BigUint::from(2u32);
    let r = &two * c * (c + &one);
    let c2 = std::cmp::max(&two * c + k, BigUint::from(4u32) * (&r + 3u32) * c * c);
    let c3 = &c2 + c * (&two * (&r + &two) * c + &two) + (&r + &two) * c * k + (&r + &two) * c * c;
    let c0 = [
        (&r + &two) * c * c,
        (&r + &two) * c * k,
        c2.clone(),
        BigUint::from(4u32) * c * k + &two * c * c + &two * &r + &two * c * &r * &c3,
    ]
    .into_iter()
    .max()
    .unwrap();
    [r, c2, c3, c0]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub oracle_additive: Option<u64>,
    pub claimed_additive: String,
    pub size: Option<u64>,
    pub claimed_size: String,
    /// Everything that disagreed, one line each.
    pub diffs: Vec<String>,
}

fn check_ledger(depth: usize, l: &ConstantLedger, diffs: &mut Vec<String>) {
    let [r, c2, c3, c0] = ledger_reference(&l.c, &l.c_rec);
    for (name, want, got) in [("r", r, &l.r), ("c2", c2, &l.c2), ("c3", c3, &l.c3), ("c0", c0, &l.c0)] {
        if &want != got {
            diffs.push(format!("level {depth}: ledger {name} is {got}, recomputed {want}"));
        }
    }
}

/// Rechecks `report` against `inst` from scratch.
///
/// Passes when the weighting covers every edge of `H` exactly once, the
/// recomputed additive constant is at most the claimed one, the size is at
/// most the claimed bound, and every ledger and certified value recorded in
/// the report matches its recomputation.
pub fn certify(inst: &Instance, report: &SynthesisReport) -> Certificate {
    let mut diffs = Vec::new();
    let mut weights = BTreeMap::new();
    for &(u, v, w) in &report.weights.weights {
        let key = (u.min(v), u.max(v));
        if !inst.h.has_edge(u, v) {
            diffs.push(format!("weight on {u}-{v}, which is not an edge"));
        } else if weights.insert(key, w).is_some() {
            diffs.push(format!("edge {u}-{v} weighted twice"));
        }
    }
    for e in inst.h.edges() {
        if !weights.contains_key(&(e.0, e.1)) {
            diffs.push(format!("edge {e} has no weight"));
        }
    }
    let claimed_additive = report.claimed_additive.to_string();
    let claimed_size = report.claimed_size.to_string();
    if !diffs.is_empty() {
        return Certificate {
            verdict: Verdict::Fail,
            oracle_additive: None,
            claimed_additive,
            size: None,
            claimed_size,
            diffs,
        };
    }

    let oracle = oracle_additive(inst, &weights);
    let size = weights.values().copied().max().unwrap_or(0);
    match oracle {
        None => diffs.push("phi is not a quasi-isometry onto the weighted target".into()),
        Some(a) if BigUint::from(a) > report.claimed_additive => {
            diffs.push(format!("additive constant {a} exceeds the claimed {claimed_additive}"))
        }
        Some(_) => {}
    }
    if oracle != report.certified_additive {
        diffs.push(format!(
            "report certifies {:?}, oracle finds {oracle:?}",
            report.certified_additive
        ));
    }
    if BigUint::from(size) > report.claimed_size {
        diffs.push(format!("size {size} exceeds the claimed {claimed_size}"));
    }
    if size != report.achieved_size {
        diffs.push(format!("report size {} differs from {size}", report.achieved_size));
    }
    let mut top = BigUint::default();
    for rec in &report.levels {
        if let Some(l) = &rec.ledger {
            check_ledger(rec.depth, l, &mut diffs);
            if l.c0 != rec.claimed_additive {
                diffs.push(format!("level {}: claims {} but its ledger gives {}", rec.depth, rec.claimed_additive, l.c0));
            }
        }
        if rec.depth == 0 {
            top = top.max(rec.claimed_additive.clone());
        }
    }
    if top != report.claimed_additive {
        diffs.push(format!("levels claim {top}, report claims {claimed_additive}"));
    }
    Certificate {
        verdict: if diffs.is_empty() { Verdict::Pass } else { Verdict::Fail },
        oracle_additive: oracle,
        claimed_additive,
        size: Some(size),
        claimed_size,
        diffs,
    }
}
