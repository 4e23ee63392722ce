use std::io::Write;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::ops::{apply_embedded, applicable_ops, Grammar, GrammarOp};
use crate::dataset::Dataset;
use crate::elastic_graph::{energy, ComplexityBudget, ElasticGraph, Embedding, Moduli};
use crate::error::{Error, Result};
use crate::optimizer::{fit, init_on_pc_segment, FitConfig, Partition};

/// Grammar phases, cycled until the construction stops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarSequence {
    phases: Vec<Grammar>,
}

impl GrammarSequence {
    pub fn new(phases: Vec<Grammar>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidInput("grammar sequence is empty".into()));
        }
        Ok(GrammarSequence { phases })
    }

    pub fn phases(&self) -> &[Grammar] {
        &self.phases
    }

    pub fn phase(&self, step: usize) -> Grammar {
        self.phases[step % self.phases.len()]
    }
}

impl Default for GrammarSequence {
    fn default() -> Self {
        GrammarSequence {
            phases: vec![Grammar::Grow, Grammar::Grow, Grammar::Shrink],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub phase: usize,
    pub grammar: Grammar,
    pub op: GrammarOp,
    /// Functional value after the full fit of the selected graph.
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstructionLog {
    pub entries: Vec<LogEntry>,
}

impl ConstructionLog {
    /// Number of grammar applications performed.
    pub fn cc(&self) -> usize {
        self.entries.len()
    }

    /// Writes `phase,op,site,value` rows.
    pub fn write_dsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "phase,op,site,value")?;
        for e in &self.entries {
            writeln!(out, "{},{},{},{}", e.phase, e.op.kind().name(), e.op.site(), e.value)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub fit: FitConfig,
    /// EM iteration cap while comparing candidates.
    pub candidate_iterations: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            fit: FitConfig::default(),
            candidate_iterations: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeFit {
    pub graph: ElasticGraph,
    pub embedding: Embedding,
    pub partition: Partition,
    pub value: f64,
    pub log: ConstructionLog,
}

/// Elastic energy of the embedded graph.
pub fn geometric_complexity(graph: &ElasticGraph, emb: &Embedding) -> Result<f64> {
    Ok(energy(graph, emb)?.u_total)
}

/// Greedy principal tree: start from a fitted segment, then at every phase
/// try each permissible grammar application and keep the one with the
/// lowest functional.
pub fn grow_tree(data: &Dataset, budget: &ComplexityBudget, seq: &GrammarSequence, moduli: &Moduli, cfg: &TreeConfig) -> Result<TreeFit> {
    cfg.fit.validate()?;
    if cfg.candidate_iterations == 0 {
        return Err(Error::InvalidInput("candidate_iterations must be positive".into()));
    }
    let mut graph = ElasticGraph::chain(2, moduli)?;
    if !budget.permits(&graph) {
        return Err(Error::InvalidInput("the initial segment exceeds the complexity budget".into()));
    }
    let emb0 = init_on_pc_segment(data, &graph)?;
    let first = fit(data, &graph, &emb0, &cfg.fit)?;
    let mut emb = first.embedding;
    let mut part = first.partition;
    let mut value = first.history.last().map_or(f64::NAN, |r| r.total);
    let mut log = ConstructionLog::default();
    let cand_cfg = FitConfig {
        max_iterations: cfg.candidate_iterations,
        ..cfg.fit
    };

    let mut step = 0usize;
    while log.cc() < budget.cc_max {
        let grammar = seq.phase(step);
        let mut best: Option<(GrammarOp, ElasticGraph, Embedding, f64)> = None;
        for op in applicable_ops(&graph, grammar) {
            let (child, start) = apply_embedded(&graph, &emb, op, moduli, Some(&part))?;
            if !budget.permits(&child) {
                continue;
            }
            match fit(data, &child, &start, &cand_cfg) {
                Ok(r) => {
                    let v = r.final_value();
                    if best.as_ref().is_none_or(|b| v < b.3) {
                        best = Some((op, child, r.embedding, v));
                    }
                }
                Err(e) => warn!("candidate {op:?} skipped: {e}"),
            }
        }
        let Some((op, child, start, _)) = best else {
            debug!("phase {step}: no permissible candidate");
            break;
        };
        let full = fit(data, &child, &start, &cfg.fit)?;
        if !(child.is_connected() && child.is_tree()) {
            return Err(Error::Degenerate(format!("phase {step} produced a non-tree graph")));
        }
        graph = child;
        emb = full.embedding;
        part = full.partition;
        value = full.history.last().map_or(f64::NAN, |r| r.total);
        debug!("phase {step}: {op:?} -> {} vertices, functional {value:.6e}", graph.vertex_count());
        log.entries.push(LogEntry {
            phase: step,
            grammar,
            op,
            value,
        });
        step += 1;
    }
    Ok(TreeFit {
        graph,
        embedding: emb,
        partition: part,
        value,
        log,
    })
}
