//! JSON documents for graphs, weightings, decompositions and vertex maps.
//!
//! ```text
//! graph          {"vertices":[0,1,2], "edges":[[0,1],[1,2]]}
//! weighting      {"weights":[[0,1,5],[1,2,0]]}
//! decomposition  {"bags":[[0,1],[1,2]]}
//! vertex map     {"map":[[g_vertex, h_vertex], ...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::decomposition::PathDecomposition;
use crate::error::Result;
use crate::graph::{EdgeWeighting, Graph, VertexId};
use crate::qi::VertexMap;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
}

impl GraphDoc {
    pub fn from_graph(g: &Graph) -> Self {
        GraphDoc {
            vertices: g.vertices().to_vec(),
            edges: g.edges().iter().map(|e| [e.0, e.1]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.vertices.iter().copied(), self.edges.iter().map(|e| (e[0], e[1])))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightingDoc {
    pub weights: Vec<(VertexId, VertexId, u64)>,
}

impl WeightingDoc {
    pub fn from_weighting(host: &Graph, w: &EdgeWeighting) -> Self {
        WeightingDoc {
            weights: w.to_triples(host),
        }
    }

    pub fn to_weighting(&self, host: &Graph) -> Result<EdgeWeighting> {
        EdgeWeighting::from_triples(host, &self.weights)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub bags: Vec<Vec<VertexId>>,
}

impl DecompositionDoc {
    pub fn from_decomposition(d: &PathDecomposition) -> Self {
        DecompositionDoc {
            bags: d.bags.iter().map(|b| b.iter().copied().collect()).collect(),
        }
    }

    pub fn to_decomposition(&self) -> PathDecomposition {
        PathDecomposition::new(self.bags.iter().map(|b| b.iter().copied().collect()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMapDoc {
    pub map: Vec<(VertexId, VertexId)>,
}

impl VertexMapDoc {
    pub fn from_map(phi: &VertexMap) -> Self {
        VertexMapDoc {
            map: phi.iter().collect(),
        }
    }

    pub fn to_map(&self) -> VertexMap {
        VertexMap::from_pairs(self.map.iter().copied())
    }
}
