use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::elastic_graph::{energy, ElasticGraph, Embedding};
use crate::error::{Error, Result};
use crate::optimizer::solver::{solve_embedding_with, LinearSolver};
use crate::optimizer::{msd, partition, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Stop once the relative decrease of the functional falls below this.
    pub rel_tolerance: f64,
    #[serde(default)]
    pub solver: LinearSolver,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 100,
            rel_tolerance: 1e-5,
            solver: LinearSolver::Auto,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidInput("rel_tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// One evaluation of the fitting functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub msd: f64,
    pub u_edges: f64,
    pub u_stars: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub embedding: Embedding,
    pub partition: Partition,
    /// Functional values; entry 0 is the initial embedding.
    pub history: Vec<TraceRow>,
    pub converged: bool,
}

impl FitResult {
    pub fn final_value(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.total)
    }

    pub fn final_msd(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |r| r.msd)
    }

    /// Writes the trace as `iteration,msd,u_edges,u_stars,total` rows.
    pub fn write_trace<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,msd,u_edges,u_stars,total")?;
        for r in &self.history {
            writeln!(out, "{},{},{},{},{}", r.iteration, r.msd, r.u_edges, r.u_stars, r.total)?;
        }
        Ok(())
    }
}

/// MSD to the vertex set plus elastic energy.
pub fn functional(data: &Dataset, graph: &ElasticGraph, emb: &Embedding, part: &Partition, iteration: usize) -> Result<TraceRow> {
    let m = msd(data, emb, part);
    let e = energy(graph, emb)?;
    let total = m + e.u_total;
    if !total.is_finite() {
        return Err(Error::NonFinite(format!("functional at iteration {iteration}")));
    }
    Ok(TraceRow {
        iteration,
        msd: m,
        u_edges: e.u_edges,
        u_stars: e.u_stars,
        total,
    })
}

/// Alternates nearest-vertex partitioning and the exact quadratic solve
/// until the functional stops decreasing.
pub fn fit(data: &Dataset, graph: &ElasticGraph, emb0: &Embedding, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    emb0.check_against(graph)?;
    if emb0.dim() != data.dim() {
        return Err(Error::DimensionMismatch(format!(
            "embedding in R^{}, data in R^{}",
            emb0.dim(),
            data.dim()
        )));
    }
    if emb0.positions.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial embedding".into()));
    }
    let mut emb = emb0.clone();
    let mut part = partition(data, &emb);
    let mut prev = functional(data, graph, &emb, &part, 0)?;
    let mut history = vec![prev];
    let mut converged = false;
    for it in 1..=cfg.max_iterations {
        emb = solve_embedding_with(data, graph, &part, cfg.solver, Some(&emb))?;
        part = partition(data, &emb);
        let row = functional(data, graph, &emb, &part, it)?;
        history.push(row);
        let decrease = prev.total - row.total;
        if decrease <= cfg.rel_tolerance * prev.total.abs() {
            converged = true;
            break;
        }
        prev = row;
    }
    debug!(
        "fit: {} iterations, functional {:.6e}",
        history.len() - 1,
        history.last().map_or(f64::NAN, |r| r.total)
    );
    Ok(FitResult {
        embedding: emb,
        partition: part,
        history,
        converged,
    })
}
