use super::{integrate, OdeSystem};
use crate::dataset::Dataset;
use crate::elastic_graph::{build_grid, Embedding, Grid, Moduli};
use crate::error::Result;
use crate::metrics::mse_fraction;
use crate::optimizer::{fit, init_grid_on_plane, project_piecewise_linear, project_point_piecewise_linear, FitConfig, Partition, TraceRow};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldFit {
    pub grid: Grid,
    pub embedding: Embedding,
    pub partition: Partition,
    pub history: Vec<TraceRow>,
    /// Nearest-vertex MSE fraction on the samples.
    pub mse_fraction: f64,
    /// MSE fraction with distances to the edge segments.
    pub mse_fraction_piecewise: f64,
}

/// Elastic map of `rows`×`cols` nodes started on the principal plane.
pub fn fit_invariant_manifold(samples: &Dataset, rows: usize, cols: usize, moduli: &Moduli, cfg: &FitConfig) -> Result<ManifoldFit> {
    let grid = build_grid(rows, cols, moduli)?;
    let emb0 = init_grid_on_plane(samples, &grid)?;
    let r = fit(samples, &grid.graph, &emb0, cfg)?;
    let vertex: Vec<f64> = samples
        .points()
        .iter()
        .zip(&r.partition.owner)
        .map(|(x, &v)| crate::linalg::sq_dist(x, r.embedding.position(v)))
        .collect();
    let pl: Vec<f64> = project_piecewise_linear(samples, &grid.graph, &r.embedding)?
        .into_iter()
        .map(|p| p.sq_dist)
        .collect();
    Ok(ManifoldFit {
        mse_fraction: mse_fraction(samples, &vertex)?,
        mse_fraction_piecewise: mse_fraction(samples, &pl)?,
        grid,
        embedding: r.embedding,
        partition: r.partition,
        history: r.history,
    })
}

/// Distance from each recorded state to the fitted net's edge segments.
pub fn trajectory_distance_profile(
    sys: &dyn OdeSystem,
    manifold: &ManifoldFit,
    x0: &[f64],
    t_span: (f64, f64),
    dt: f64,
    dt_record: Option<f64>,
) -> Result<Vec<(f64, f64)>> {
    let tr = integrate(sys, x0, t_span, dt, dt_record)?;
    Ok(tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(&t, s)| (t, project_point_piecewise_linear(s, &manifold.grid.graph, &manifold.embedding).sq_dist.sqrt()))
        .collect())
}
