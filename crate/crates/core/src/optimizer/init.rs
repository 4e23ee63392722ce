use crate::dataset::{pca, Dataset};
use crate::elastic_graph::{ElasticGraph, Embedding, Grid};
use crate::error::{Error, Result};

/// Places the two vertices at the extreme first-principal-component
/// coordinates of the data so that every projection falls on the segment.
pub fn init_on_pc_segment(data: &Dataset, graph: &ElasticGraph) -> Result<Embedding> {
    if graph.vertex_count() != 2 || graph.edges().len() != 1 {
        return Err(Error::InvalidInput(
            "segment initialisation needs a single-edge graph".into(),
        ));
    }
    let model = pca(data, 1)?;
    let c = &model.components[0];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in data.points() {
        let t = model.project_point(p, 1)[0];
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let at = |t: f64| -> Vec<f64> { model.mean.iter().zip(c).map(|(m, ci)| m + t * ci).collect() };
    Embedding::new(vec![at(lo), at(hi)])
}

/// Spreads a path evenly over the first principal segment, from the
/// extreme low projection at the leaf with the lower index.
pub fn init_chain_on_pc_segment(data: &Dataset, graph: &ElasticGraph) -> Result<Embedding> {
    let n = graph.vertex_count();
    let is_path = n >= 2 && graph.is_tree() && (0..n).all(|v| graph.degree(v) <= 2);
    if !is_path {
        return Err(Error::InvalidInput("chain initialisation needs a path graph".into()));
    }
    let start = (0..n).find(|&v| graph.degree(v) == 1).expect("a path has leaves");
    let hops = graph.hop_distances(start);
    let model = pca(data, 1)?;
    let c = &model.components[0];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in data.points() {
        let t = model.project_point(p, 1)[0];
        lo = lo.min(t);
        hi = hi.max(t);
    }
    let positions = hops
        .iter()
        .map(|&h| {
            let t = lo + (hi - lo) * h as f64 / (n - 1) as f64;
            model.mean.iter().zip(c).map(|(m, ci)| m + t * ci).collect()
        })
        .collect();
    Embedding::new(positions)
}

/// Spreads the lattice over the bounding rectangle of the data projected
/// on the first two principal components; columns follow PC1, rows PC2.
pub fn init_grid_on_plane(data: &Dataset, grid: &Grid) -> Result<Embedding> {
    if data.dim() < 2 {
        return Err(Error::RankDeficient("need at least two features".into()));
    }
    let model = pca(data, 2)?;
    if model.eigenvalues[1] <= 1e-12 * model.total_variance {
        return Err(Error::RankDeficient("data spans less than a plane".into()));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in data.points() {
        let t = model.project_point(p, 2);
        for a in 0..2 {
            lo[a] = lo[a].min(t[a]);
            hi[a] = hi[a].max(t[a]);
        }
    }
    let lerp = |a: usize, i: usize, n: usize| lo[a] + (hi[a] - lo[a]) * i as f64 / (n - 1) as f64;
    let positions = (0..grid.rows * grid.cols)
        .map(|v| {
            let (r, c) = grid.cell(v);
            model.reconstruct_point(&[lerp(0, c, grid.cols), lerp(1, r, grid.rows)])
        })
        .collect();
    Embedding::new(positions)
}
