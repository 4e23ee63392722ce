use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::elastic_graph::Embedding;
use crate::linalg::sq_dist;

/// Nearest-vertex assignment of data points with per-cell aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub owner: Vec<usize>,
    pub cell_weight: Vec<f64>,
    pub cell_weighted_sum: Vec<Vec<f64>>,
}

impl Partition {
    pub fn vertex_count(&self) -> usize {
        self.cell_weight.len()
    }

    /// Number of points (not weight) owned by each vertex.
    pub fn cell_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.vertex_count()];
        for &o in &self.owner {
            c[o] += 1;
        }
        c
    }

    /// Weighted mean of the points in cell `v`, if it has any weight.
    pub fn cell_mean(&self, v: usize) -> Option<Vec<f64>> {
        let w = self.cell_weight[v];
        (w > 0.0).then(|| self.cell_weighted_sum[v].iter().map(|s| s / w).collect())
    }
}

/// Index of the vertex closest to `x`; equidistant vertices resolve to the
/// lowest index.
pub fn nearest_vertex(x: &[f64], emb: &Embedding) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, y) in emb.positions.iter().enumerate() {
        let d = sq_dist(x, y);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    (best, best_d)
}

pub fn partition(data: &Dataset, emb: &Embedding) -> Partition {
    let k = emb.len();
    let m = data.dim();
    let mut owner = Vec::with_capacity(data.len());
    let mut cell_weight = vec![0.0; k];
    let mut cell_weighted_sum = vec![vec![0.0; m]; k];
    for (x, &w) in data.points().iter().zip(data.weights()) {
        let (j, _) = nearest_vertex(x, emb);
        owner.push(j);
        cell_weight[j] += w;
        crate::linalg::add_scaled(&mut cell_weighted_sum[j], x, w);
    }
    Partition {
        owner,
        cell_weight,
        cell_weighted_sum,
    }
}

/// Weighted mean squared distance of each point to its owning vertex.
pub fn msd(data: &Dataset, emb: &Embedding, part: &Partition) -> f64 {
    let total: f64 = data
        .points()
        .iter()
        .zip(data.weights())
        .zip(&part.owner)
        .map(|((x, w), &o)| w * sq_dist(x, emb.position(o)))
        .sum();
    total / data.total_weight()
}
