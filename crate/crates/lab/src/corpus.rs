//! The standard instance corpus.
//!
//! On disk: `instances/<generator>/<seed>.json`, each next to a sidecar
//! `<seed>.expected.json` holding the expected verdict.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::generate::{gen_bounded_pw, gen_comb, gen_pathlike, subdivide_target};
use crate::instance::Instance;
use crate::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub verdict: qirw_core::extension::Verdict,
}

/// 200 instances: 90 pathlike, 90 bounded path-width (`k` cycling through
/// 1..=3) and combs of depth 1..=5, topped up with more pathlike ones.
/// Every source graph stays under 300 vertices.
pub fn standard() -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(200);
    for seed in 0..90u64 {
        let n = 2 + (seed as usize * 7) % 40;
        let p = 1 + (seed % 3) as u32;
        let q = [0.0, 0.2, 0.5][(seed / 3 % 3) as usize];
        out.push(gen_pathlike(seed, n, p, q)?);
    }
    for seed in 0..90u64 {
        let k = 1 + (seed % 3) as usize;
        let n = 4 + (seed as usize * 5) % 36;
        out.push(gen_bounded_pw(seed, n, k)?);
    }
    for m in 1..=5 {
        out.push(gen_comb(m)?);
    }
    for seed in 90..105u64 {
        out.push(gen_pathlike(seed, 10 + seed as usize % 30, 2, 0.3)?);
    }
    Ok(out)
}

/// 50 instances whose map is not onto the target.
pub fn non_surjective() -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(50);
    for seed in 0u64.. {
        let base = if seed % 2 == 0 {
            gen_pathlike(seed, 3 + seed as usize % 15, 1 + (seed % 2) as u32, 0.2)?
        } else {
            gen_bounded_pw(seed, 5 + seed as usize % 15, 1 + (seed % 3) as usize)?
        };
        let inst = subdivide_target(&base, seed, 2 + (seed % 3) as u32, 0.5)?;
        if inst.phi.image_set().len() < inst.h.vertex_count() {
            out.push(inst);
        }
        if out.len() == 50 {
            break;
        }
    }
    Ok(out)
}

pub fn instance_path(root: &Path, inst: &Instance) -> PathBuf {
    let p = &inst.provenance;
    let name = match p.generator.as_str() {
        "comb" => format!("m{}", p.params["m"]),
        _ => p.seed.to_string(),
    };
    root.join("instances").join(&p.generator).join(format!("{name}.json"))
}

/// Writes `instances` under `root` with expected-verdict sidecars.
pub fn write(root: &Path, instances: &[Instance], expected: &Expected) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for inst in instances {
        let path = instance_path(root, inst);
        inst.save(&path)?;
        let side = path.with_extension("expected.json");
        fs::write(&side, serde_json::to_string(expected)? + "\n")
            .map_err(|source| LabError::Io { path: side.clone(), source })?;
        paths.push(path);
    }
    Ok(paths)
}
