use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::elastic_graph::{ElasticGraph, Embedding};
use crate::error::{Error, Result};
use crate::linalg::sq_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentProjection {
    pub point: Vec<f64>,
    pub sq_dist: f64,
    /// Index of the edge carrying the projection.
    pub edge: usize,
    /// Position along the edge, 0 at `u`, 1 at `v`.
    pub t: f64,
}

/// Closest point on segment a-b to x, as (parameter, point, squared distance).
pub fn project_on_segment(x: &[f64], a: &[f64], b: &[f64]) -> (f64, Vec<f64>, f64) {
    let ab: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        let ax: f64 = x.iter().zip(a).zip(&ab).map(|((xi, ai), d)| (xi - ai) * d).sum();
        (ax / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let p: Vec<f64> = a.iter().zip(&ab).map(|(ai, d)| ai + t * d).collect();
    let d = sq_dist(x, &p);
    (t, p, d)
}

pub fn project_point_piecewise_linear(x: &[f64], graph: &ElasticGraph, emb: &Embedding) -> SegmentProjection {
    let mut best: Option<SegmentProjection> = None;
    for (i, e) in graph.edges().iter().enumerate() {
        let (t, p, d) = project_on_segment(x, emb.position(e.u), emb.position(e.v));
        if best.as_ref().is_none_or(|b| d < b.sq_dist) {
            best = Some(SegmentProjection {
                point: p,
                sq_dist: d,
                edge: i,
                t,
            });
        }
    }
    best.expect("graph has at least one edge")
}

/// Exact nearest point on the union of edge segments for every data point.
pub fn project_piecewise_linear(data: &Dataset, graph: &ElasticGraph, emb: &Embedding) -> Result<Vec<SegmentProjection>> {
    if graph.edges().is_empty() {
        return Err(Error::InvalidInput("piecewise-linear projection needs an edge".into()));
    }
    emb.check_against(graph)?;
    Ok(data
        .points()
        .iter()
        .map(|x| project_point_piecewise_linear(x, graph, emb))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic_graph::Moduli;

    #[test]
    fn midpoint_and_offset() {
        let g = ElasticGraph::chain(2, &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let d = Dataset::new(vec![vec![1.0, 0.0], vec![1.5, 3.0], vec![-1.0, 1.0]]).unwrap();
        let pr = project_piecewise_linear(&d, &g, &emb).unwrap();
        assert_eq!(pr[0].sq_dist, 0.0);
        assert!((pr[1].sq_dist - 9.0).abs() < 1e-15);
        assert!((pr[1].t - 0.75).abs() < 1e-15);
        // beyond the end: distance to the endpoint
        assert!((pr[2].sq_dist - 2.0).abs() < 1e-15);
        assert_eq!(pr[2].t, 0.0);
    }

    #[test]
    fn needs_an_edge() {
        let g = ElasticGraph::chain(1, &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0]]).unwrap();
        let d = Dataset::new(vec![vec![1.0]]).unwrap();
        assert!(project_piecewise_linear(&d, &g, &emb).is_err());
    }
}
