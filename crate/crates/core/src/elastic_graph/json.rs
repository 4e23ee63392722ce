use serde::{Deserialize, Serialize};

use super::{Edge, ElasticGraph, Embedding, Star};
use crate::error::Result;

/// Graph plus embedding in the exchange format
/// `{"vertices":K,"edges":[[u,v,λ]...],"stars":[{"center":c,"leaves":[...],"mu":μ}...],"positions":[[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub stars: Vec<StarDocument>,
    pub positions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarDocument {
    pub center: usize,
    pub leaves: Vec<usize>,
    pub mu: f64,
}

impl GraphDocument {
    pub fn from_parts(graph: &ElasticGraph, emb: &Embedding) -> Self {
        GraphDocument {
            vertices: graph.vertex_count(),
            edges: graph.edges().iter().map(|e| (e.u, e.v, e.lambda)).collect(),
            stars: graph
                .stars()
                .iter()
                .map(|s| StarDocument {
                    center: s.center,
                    leaves: s.leaves.clone(),
                    mu: s.mu,
                })
                .collect(),
            positions: emb.positions.clone(),
        }
    }

    /// Rebuilds the graph; it is flagged primitive when its stars coincide
    /// with the topology-derived ones.
    pub fn into_parts(self) -> Result<(ElasticGraph, Embedding)> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|&(u, v, lambda)| Edge { u, v, lambda })
            .collect();
        let stars: Vec<Star> = self
            .stars
            .into_iter()
            .map(|s| Star {
                center: s.center,
                leaves: s.leaves,
                mu: s.mu,
            })
            .collect();
        let graph = ElasticGraph::new(self.vertices, edges.clone(), stars.clone(), false)?;
        let graph = match ElasticGraph::new(self.vertices, edges, stars, true) {
            Ok(p) => p,
            Err(_) => graph,
        };
        let emb = Embedding::new(self.positions)?;
        emb.check_against(&graph)?;
        Ok((graph, emb))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
