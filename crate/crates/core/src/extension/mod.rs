//! The extension step and the top-level driver.
//!
//! One level of [`synthesize`] takes a connected target with a path
//! decomposition and a quasi-isometry onto it, and:
//!
//! 1. measures the map and contracts the target onto the image;
//! 2. picks a geodesic of the source that passes near every bag;
//! 3. weights a path along its image with exact anchor spacing;
//! 4. splits off the far side of the target, which has smaller width, and
//!    weights it recursively through a shortcut graph;
//! 5. glues the two weightings with a heavy boundary and lifts the result
//!    back through the contraction.
//!
//! Every level is certified against the constants it claims.

mod extend;
pub mod ledger;
mod scaffold;
mod spanning;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::anchor::{fixgeo_retrying, AnchorSystem};
use crate::decomposition::PathDecomposition;
use crate::error::{Error, Result};
use crate::graph::{EdgeWeighting, Graph, VertexId};
use crate::io::WeightingDoc;
use crate::qi::{pull_back_weights, surjectivize, QiFrame, QiParams, VertexMap};

pub use extend::{check_local_weighting, extend_weights, AdditiveBounder, Bounded, Extension, LocalWeighting};
pub use ledger::{constants, ConstantLedger};
pub use scaffold::{build_scaffold, ExtensionScaffold, ScaffoldSizes};
pub use spanning::{find_spanning_geodesic, shortjump_check};

/// How much runtime checking to do.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Verify every intermediate claim as well as the final result.
    #[default]
    Checked,
    /// Verify only the final result.
    Fast,
}

/// Which constants a recursive call reports upwards.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// The ledger's a-priori constants.
    #[default]
    Theoretical,
    /// The exact additive constant and size of the weighting produced.
    Certified,
}

/// Two readings of the parameters after contraction onto the image, each
/// checked against the contracted map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientReadings {
    pub statement: QiParams,
    pub statement_holds: bool,
    pub proof: QiParams,
    pub proof_holds: bool,
}

/// What happened on one component at one recursion depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub depth: usize,
    /// Smallest target vertex of the component.
    pub component: VertexId,
    pub source_vertices: usize,
    pub target_vertices: usize,
    /// Measured `C` of the input map.
    pub measured: u64,
    pub quotient_vertices: usize,
    /// Measured `C` after contraction onto the image.
    pub quotient_measured: u64,
    pub readings: QuotientReadings,
    pub width: usize,
    pub base_case: bool,
    /// `C` used for the local step; 4 after a retry.
    pub c_used: Option<u64>,
    pub retried: bool,
    /// Local scale of the extension.
    pub scale: Option<u64>,
    pub anchors: Option<AnchorSystem>,
    pub scaffold: Option<ScaffoldSizes>,
    pub shortcut_measured: Option<u64>,
    pub ledger: Option<ConstantLedger>,
    #[serde(with = "ledger::decimal")]
    pub claimed_additive: BigUint,
    #[serde(with = "ledger::decimal")]
    pub claimed_size: BigUint,
    pub achieved_size: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub profile: Profile,
    pub weights: WeightingDoc,
    /// Claimed `C'`: the map is a `(1, C')`-quasi-isometry onto the weighted target.
    #[serde(with = "ledger::decimal")]
    pub claimed_additive: BigUint,
    /// Claimed bound `W` on the size of the weighting.
    #[serde(with = "ledger::decimal")]
    pub claimed_size: BigUint,
    pub achieved_size: u64,
    /// Exact smallest additive constant of the produced weighting.
    pub certified_additive: Option<u64>,
    pub verdict: Verdict,
    pub levels: Vec<LevelRecord>,
}

impl SynthesisReport {
    pub fn weighting(&self, h: &Graph) -> Result<EdgeWeighting> {
        self.weights.to_weighting(h)
    }
}

/// Recursion into the synthesis itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct RecursiveBounder {
    pub profile: Profile,
    pub mode: BoundMode,
}

impl AdditiveBounder for RecursiveBounder {
    fn bound(
        &self,
        source: &Graph,
        target: &Graph,
        decomposition: &PathDecomposition,
        phi: &VertexMap,
        depth: usize,
    ) -> Result<Bounded> {
        let mut b = synthesize_level(source, target, decomposition, phi, depth, self)?;
        if self.mode == BoundMode::Certified {
            let exact = QiFrame::new(source, target, Some(&b.weights), phi)?
                .minimal_additive()
                .ok_or_else(|| Error::assertion("recursive weighting is certified", "infeasible"))?;
            b.additive = BigUint::from(exact);
            b.size = BigUint::from(b.weights.size());
        }
        Ok(b)
    }
}

/// Weights `h` so that `phi` becomes a `(1, C')`-quasi-isometry onto it.
///
/// Both graphs must be connected, `d` must decompose `h`, and `phi` must be a
/// quasi-isometry. The report carries the weighting, the claimed constants,
/// per-level records and an exact certification of the result.
pub fn synthesize(
    g: &Graph,
    h: &Graph,
    d: &PathDecomposition,
    phi: &VertexMap,
    profile: Profile,
) -> Result<SynthesisReport> {
    synthesize_with(g, h, d, phi, RecursiveBounder { profile, mode: BoundMode::Theoretical })
}

pub fn synthesize_with(
    g: &Graph,
    h: &Graph,
    d: &PathDecomposition,
    phi: &VertexMap,
    bounder: RecursiveBounder,
) -> Result<SynthesisReport> {
    d.validated(h)?;
    phi.check_total(g, h)?;
    if g.is_empty() || h.is_empty() {
        return Err(Error::Input("graphs must be nonempty".into()));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected("source graph"));
    }
    if !h.is_connected() {
        return Err(Error::Disconnected("target graph"));
    }
    let b = bounder.bound(g, h, d, phi, 0)?;
    let certified = QiFrame::new(g, h, Some(&b.weights), phi)?.minimal_additive();
    let size = b.weights.size();
    let pass = certified.is_some_and(|a| BigUint::from(a) <= b.additive) && BigUint::from(size) <= b.size;
    Ok(SynthesisReport {
        profile: bounder.profile,
        weights: WeightingDoc::from_weighting(h, &b.weights),
        claimed_additive: b.additive,
        claimed_size: b.size,
        achieved_size: size,
        certified_additive: certified,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        levels: b.levels,
    })
}

/// One recursion level over every component of `h`.
fn synthesize_level(
    g: &Graph,
    h: &Graph,
    d: &PathDecomposition,
    phi: &VertexMap,
    depth: usize,
    bounder: &RecursiveBounder,
) -> Result<Bounded> {
    let mut weights = EdgeWeighting::zero(h);
    let mut additive = BigUint::zero();
    let mut size = BigUint::zero();
    let mut levels = Vec::new();
    for comp in h.components() {
        let hv: BTreeSet<VertexId> = comp.into_iter().collect();
        let gv: BTreeSet<VertexId> = phi.iter().filter(|(_, y)| hv.contains(y)).map(|(v, _)| v).collect();
        if gv.is_empty() {
            return Err(Error::hypothesis(
                "every target vertex is near the image",
                format!("component of {} has no preimage", hv.first().unwrap()),
            ));
        }
        let hc = h.induced(&hv);
        let gc = g.induced(&gv);
        let dc = d.restrict(&hv).normalize_nowhere_null();
        let phic = phi.restrict(&gv);
        let b = synthesize_component(&gc, &hc, &dc, &phic, depth, bounder)?;
        for e in hc.edges() {
            let w = b.weights.weight(&hc, e.0, e.1).unwrap();
            weights.set(h.edge_index(e.0, e.1).unwrap(), w);
        }
        additive = additive.max(b.additive);
        size = size.max(b.size);
        levels.extend(b.levels);
    }
    Ok(Bounded { weights, additive, size, levels })
}

fn synthesize_component(
    g: &Graph,
    h: &Graph,
    d: &PathDecomposition,
    phi: &VertexMap,
    depth: usize,
    bounder: &RecursiveBounder,
) -> Result<Bounded> {
    let profile = bounder.profile;
    let measured = QiFrame::new(g, h, None, phi)?
        .measure()
        .ok_or_else(|| Error::hypothesis("phi is a quasi-isometry", "no finite parameters"))?;
    let s = surjectivize(h, d, phi, measured)?;
    let h1 = &s.quotient;
    let d1 = s.decomposition.normalize_nowhere_null();
    let frame1 = QiFrame::new(g, h1, None, &s.map)?;
    let quotient_measured = frame1
        .measure()
        .ok_or_else(|| Error::assertion("contracted map is a quasi-isometry", "no finite parameters"))?;
    let proof = QiParams::normalized(measured);
    let statement = QiParams::new(proof.l / (2 * measured + 1), measured);
    let readings = QuotientReadings {
        statement,
        statement_holds: frame1.check(statement).is_ok(),
        proof,
        proof_holds: frame1.check(proof).is_ok(),
    };
    if profile == Profile::Checked {
        s.assignment.validate(h, &phi.image_set(), measured)?;
        d1.validated(h1)?;
        if d1.width() > d.width() {
            return Err(Error::assertion("contraction does not increase width", format!("{} > {}", d1.width(), d.width())));
        }
    }

    let mut record = LevelRecord {
        depth,
        component: h.vertices()[0],
        source_vertices: g.vertex_count(),
        target_vertices: h.vertex_count(),
        measured,
        quotient_vertices: h1.vertex_count(),
        quotient_measured,
        readings,
        width: d1.width(),
        base_case: false,
        c_used: None,
        retried: false,
        scale: None,
        anchors: None,
        scaffold: None,
        shortcut_measured: None,
        ledger: None,
        claimed_additive: BigUint::zero(),
        claimed_size: BigUint::zero(),
        achieved_size: 0,
    };

    if h1.vertex_count() == 1 {
        // every source vertex lands on one point: the additive error is the diameter
        let diameter = frame1.source_distances().finite_diameter();
        let w = pull_back_weights(h, &s, &EdgeWeighting::zero(h1))?;
        record.base_case = true;
        record.claimed_additive = BigUint::from(diameter);
        return Ok(Bounded {
            weights: w,
            additive: BigUint::from(diameter),
            size: BigUint::zero(),
            levels: vec![record],
        });
    }

    let c = quotient_measured.max(2);
    let p = find_spanning_geodesic(g, h1, &d1, &s.map, c)?;
    let fix = fixgeo_retrying(g, h1, &s.map, &p, c, profile)?;
    let scale = ledger::local_scale(&BigUint::from(fix.c));
    let scale = ledger::narrow(&scale, "local scale")?;

    // bags all come within C^3 + C of the geodesic image, so the far side
    // of the target has smaller width
    let spine_image: Vec<usize> = p
        .vertices()
        .iter()
        .map(|&v| h1.idx(s.map.get(v).unwrap()))
        .collect::<Result<_>>()?;
    let to_spine = crate::graph::multi_source_bfs(h1, &spine_image);
    let band = fix.c * c * c + fix.c;
    let near_band: BTreeSet<VertexId> = h1
        .vertices()
        .iter()
        .enumerate()
        .filter(|(i, _)| to_spine[*i].finite().is_some_and(|x| x <= band))
        .map(|(_, &v)| v)
        .collect();
    if !d1.width_drop_check(&near_band) {
        return Err(Error::assertion("every bag meets the band around the geodesic image", format!("band {band}")));
    }

    let scaffold = build_scaffold(g, h1, &s.map, p.vertices(), scale)?;
    let inner_d = d1.restrict(&scaffold.inner_vertices()).normalize_nowhere_null();
    if !scaffold.is_near_only() && inner_d.width() >= d1.width() {
        return Err(Error::assertion("recursion lowers the width", format!("{} >= {}", inner_d.width(), d1.width())));
    }
    let local = LocalWeighting {
        source: g,
        target: h1,
        phi: &s.map,
        system: &fix.system,
        weights: &fix.weights,
        c: scale,
    };
    let ext = extend_weights(&local, &scaffold, &inner_d, bounder, depth, profile)?;
    let w = pull_back_weights(h, &s, &ext.weights)?;

    let mut levels = vec![];
    record.c_used = Some(fix.c);
    record.retried = fix.retried;
    record.scale = Some(scale);
    record.anchors = Some(fix.system.clone());
    record.scaffold = Some(scaffold.sizes());
    record.shortcut_measured = ext.shortcut_measured;
    record.claimed_additive = ext.ledger.c0.clone();
    record.claimed_size = ext.ledger.c3.clone();
    record.achieved_size = w.size();
    record.ledger = Some(ext.ledger.clone());
    levels.push(record);
    if let Some(inner) = ext.inner {
        levels.extend(inner.levels);
    }
    Ok(Bounded {
        weights: w,
        additive: ext.ledger.c0,
        size: ext.ledger.c3,
        levels,
    })
}
