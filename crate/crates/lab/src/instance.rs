use std::fs;
use std::path::Path;

use qirw_core::io::{DecompositionDoc, GraphDoc, VertexMapDoc};
use qirw_core::{Graph, PathDecomposition, VertexMap};
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Where an instance came from; enough to rebuild it exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub params: serde_json::Map<String, serde_json::Value>,
}

impl Provenance {
    /// For instances assembled from outside files rather than generated.
    pub fn external(label: &str) -> Self {
        Provenance { generator: label.into(), seed: 0, params: Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub g: Graph,
    pub h: Graph,
    pub d: PathDecomposition,
    pub phi: VertexMap,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    g: GraphDoc,
    h: GraphDoc,
    bags: DecompositionDoc,
    phi: VertexMapDoc,
    provenance: Provenance,
}

impl Instance {
    /// Checks the decomposition and that `phi` is total into `h`.
    pub fn validate(&self) -> Result<()> {
        self.d.validated(&self.h)?;
        self.phi.check_total(&self.g, &self.h)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = InstanceDoc {
            g: GraphDoc::from_graph(&self.g),
            h: GraphDoc::from_graph(&self.h),
            bags: DecompositionDoc::from_decomposition(&self.d),
            phi: VertexMapDoc::from_map(&self.phi),
            provenance: self.provenance.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)?;
        Ok(Instance {
            g: doc.g.to_graph()?,
            h: doc.h.to_graph()?,
            d: doc.bags.to_decomposition(),
            phi: doc.phi.to_map(),
            provenance: doc.provenance,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| LabError::Io { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|source| LabError::Io { path: dir.into(), source })?;
        }
        fs::write(path, self.to_json()? + "\n").map_err(|source| LabError::Io { path: path.into(), source })
    }
}
