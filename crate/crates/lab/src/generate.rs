//! Seeded instance generators.
//!
//! Every random draw comes from a ChaCha stream keyed by the instance seed
//! and a per-draw counter, so an instance is a pure function of its
//! provenance.

use std::collections::{BTreeMap, BTreeSet};

use qirw_core::graph::{contract_edges, subdivide_edges, Provenance as Origin};
use qirw_core::{Edge, Graph, PathDecomposition, VertexId, VertexMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::instance::{Instance, Provenance};
use crate::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Pathlike,
    BoundedPw,
    Comb,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::Pathlike, Generator::BoundedPw, Generator::Comb];

    pub fn name(self) -> &'static str {
        match self {
            Generator::Pathlike => "pathlike",
            Generator::BoundedPw => "bounded_pw",
            Generator::Comb => "comb",
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| LabError::UnknownGenerator(s.into()))
    }
}

fn stream(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw);
    rng
}

fn provenance(generator: &str, seed: u64, params: Value) -> Provenance {
    let params: Map<String, Value> = match params {
        Value::Object(m) => m,
        _ => unreachable!("params are an object"),
    };
    Provenance { generator: generator.into(), seed, params }
}

/// Subdivides every edge of `host` into `parts` edges, then contracts a
/// matching in which each edge is taken with probability `density`.
///
/// Returns the perturbed graph and the map back onto `host`: subdivision
/// vertices go to the nearer end of their edge (the first end on a tie) and
/// merged vertices follow the surviving one.
pub fn perturb(host: &Graph, parts: u32, density: f64, rng: &mut impl Rng) -> Result<(Graph, VertexMap)> {
    if parts == 0 {
        return Err(LabError::Params("subdivision needs p >= 1".into()));
    }
    let all: BTreeSet<Edge> = host.edges().iter().copied().collect();
    let (sub, origin) = subdivide_edges(host, &all, parts)?;
    let back: BTreeMap<VertexId, VertexId> = origin
        .iter()
        .map(|(&v, o)| match *o {
            Origin::Original(x) => (v, x),
            Origin::Subdivision { edge, offset, parts } => (v, if 2 * offset <= parts { edge.0 } else { edge.1 }),
        })
        .collect();

    let mut used = BTreeSet::new();
    let mut matching = BTreeSet::new();
    for &e in sub.edges() {
        let take = rng.gen_bool(density.clamp(0.0, 1.0));
        if take && !used.contains(&e.0) && !used.contains(&e.1) {
            used.insert(e.0);
            used.insert(e.1);
            matching.insert(e);
        }
    }
    let (g, _) = contract_edges(&sub, &matching)?;
    let phi = VertexMap::from_pairs(g.vertices().iter().map(|&v| (v, back[&v])));
    Ok((g, phi))
}

/// `H` is the path on `n` vertices; `G` is `H` perturbed by [`perturb`].
pub fn gen_pathlike(seed: u64, n: usize, p: u32, q: f64) -> Result<Instance> {
    if n == 0 || p == 0 {
        return Err(LabError::Params("pathlike needs n >= 1 and p >= 1".into()));
    }
    let h = Graph::path(n);
    let (g, phi) = perturb(&h, p, q, &mut stream(seed, 0))?;
    Ok(Instance {
        g,
        h,
        d: PathDecomposition::for_path(n),
        phi,
        provenance: provenance("pathlike", seed, json!({"n": n, "p": p, "q": q})),
    })
}

/// `H` grows one vertex at a time inside a sliding bag of at most `k + 1`
/// vertices: each new vertex joins a random nonempty subset of the current
/// bag, and a random old vertex leaves once the bag is full. The bags are a
/// path decomposition of width at most `k` by construction. `G` is a light
/// perturbation of `H`.
pub fn gen_bounded_pw(seed: u64, n: usize, k: usize) -> Result<Instance> {
    if n == 0 || k == 0 {
        return Err(LabError::Params("bounded_pw needs n >= 1 and k >= 1".into()));
    }
    let mut rng = stream(seed, 0);
    let mut bag: Vec<VertexId> = Vec::new();
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for v in 0..n as VertexId {
        if bag.len() == k + 1 {
            bag.remove(rng.gen_range(0..bag.len()));
        }
        if !bag.is_empty() {
            let first = rng.gen_range(0..bag.len());
            for (i, &u) in bag.iter().enumerate() {
                if i == first || rng.gen_bool(0.4) {
                    edges.push((u, v));
                }
            }
        }
        bag.push(v);
        bags.push(bag.iter().copied().collect());
    }
    let h = Graph::new(0..n as VertexId, edges)?;
    let mut rng = stream(seed, 1);
    let p = rng.gen_range(1..=2);
    let (g, phi) = perturb(&h, p, 0.25, &mut rng)?;
    Ok(Instance {
        g,
        h,
        d: PathDecomposition::new(bags),
        phi,
        provenance: provenance("bounded_pw", seed, json!({"n": n, "k": k, "p": p, "q": 0.25})),
    })
}

/// Finite comb of depth `m`.
///
/// Spine vertices `v_i` for `|i| <= m` form `H`, a path with bags
/// `{v_i, v_(i+1)}`. Tooth `j` (for `1 <= j <= m`) is a path
/// `q_j^(-j) - ... - q_j^j`; `v_i` is joined to `q_j^i` on every tooth that
/// reaches position `i` and `q_j^i` maps to `v_i`. At finite depth every
/// geodesic is finite anyway, so the truncation loses the comb's point but
/// keeps its metric shape.
///
/// Ids: `v_i` is `i + m`, and tooth vertices follow in order of `(j, i)`.
pub fn gen_comb(m: usize) -> Result<Instance> {
    if m == 0 {
        return Err(LabError::Params("comb needs m >= 1".into()));
    }
    let m = m as i64;
    let spine = |i: i64| (i + m) as VertexId;
    let mut next = spine(m) + 1;
    let mut edges = Vec::new();
    let mut pairs: Vec<(VertexId, VertexId)> = (-m..=m).map(|i| (spine(i), spine(i))).collect();
    for j in 1..=m {
        let mut prev = None;
        for i in -j..=j {
            let q = next;
            next += 1;
            if let Some(p) = prev {
                edges.push((p, q));
            }
            prev = Some(q);
            edges.push((spine(i), q));
            pairs.push((q, spine(i)));
        }
    }
    let h = Graph::new((-m..=m).map(spine), (-m..m).map(|i| (spine(i), spine(i + 1))))?;
    let g = Graph::new(0..next, edges)?;
    let bags = (-m..m).map(|i| [spine(i), spine(i + 1)].into()).collect();
    Ok(Instance {
        g,
        h,
        d: PathDecomposition::new(bags),
        phi: VertexMap::from_pairs(pairs),
        provenance: provenance("comb", 0, json!({"m": m})),
    })
}

/// Subdivides a random subset of the edges of `H` into `parts` edges each,
/// leaving `phi` alone, so the map is no longer onto. Each new path
/// `u - s_1 - ... - v` is covered by bags `B + {s_i, s_(i+1)}` inserted after
/// a bag `B` holding both ends.
pub fn subdivide_target(inst: &Instance, seed: u64, parts: u32, density: f64) -> Result<Instance> {
    let mut rng = stream(seed, 2);
    let chosen: BTreeSet<Edge> = inst
        .h
        .edges()
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(density.clamp(0.0, 1.0)))
        .collect();
    let (h, origin) = subdivide_edges(&inst.h, &chosen, parts)?;
    let mut chains: BTreeMap<Edge, Vec<VertexId>> = BTreeMap::new();
    for (&v, o) in &origin {
        if let Origin::Subdivision { edge, offset, .. } = *o {
            let chain = chains.entry(edge).or_default();
            chain.push(v);
            debug_assert_eq!(chain.len() as u32, offset);
        }
    }
    let mut inserts: BTreeMap<usize, Vec<BTreeSet<VertexId>>> = BTreeMap::new();
    for (e, chain) in &chains {
        let at = inst
            .d
            .bags
            .iter()
            .position(|b| b.contains(&e.0) && b.contains(&e.1))
            .ok_or_else(|| LabError::Params(format!("no bag covers {e}")))?;
        let base = &inst.d.bags[at];
        let list = inserts.entry(at).or_default();
        if chain.len() == 1 {
            list.push(base.iter().copied().chain([chain[0]]).collect());
        }
        for pair in chain.windows(2) {
            list.push(base.iter().copied().chain(pair.iter().copied()).collect());
        }
    }
    let mut bags = Vec::new();
    for (t, b) in inst.d.bags.iter().enumerate() {
        bags.push(b.clone());
        bags.extend(inserts.remove(&t).unwrap_or_default());
    }
    let mut prov = inst.provenance.clone();
    prov.params.insert(
        "subdivide_target".into(),
        json!({"seed": seed, "parts": parts, "density": density}),
    );
    Ok(Instance {
        g: inst.g.clone(),
        h,
        d: PathDecomposition::new(bags),
        phi: inst.phi.clone(),
        provenance: prov,
    })
}

/// Rebuilds an instance from its provenance.
pub fn regenerate(p: &Provenance) -> Result<Instance> {
    let get = |k: &str| {
        p.params
            .get(k)
            .ok_or_else(|| LabError::Params(format!("provenance lacks {k}")))
    };
    let uint = |k: &str| -> Result<u64> { get(k)?.as_u64().ok_or_else(|| LabError::Params(format!("{k} is not an integer"))) };
    let base = match p.generator.parse::<Generator>()? {
        Generator::Pathlike => gen_pathlike(
            p.seed,
            uint("n")? as usize,
            uint("p")? as u32,
            get("q")?.as_f64().ok_or_else(|| LabError::Params("q is not a number".into()))?,
        )?,
        Generator::BoundedPw => gen_bounded_pw(p.seed, uint("n")? as usize, uint("k")? as usize)?,
        Generator::Comb => gen_comb(uint("m")? as usize)?,
    };
    match p.params.get("subdivide_target") {
        None => Ok(base),
        Some(s) => {
            let num = |k: &str| s.get(k).and_then(Value::as_f64).ok_or_else(|| LabError::Params(format!("subdivide_target lacks {k}")));
            subdivide_target(&base, num("seed")? as u64, num("parts")? as u32, num("density")?)
        }
    }
}
