use serde::{Deserialize, Serialize};

use crate::elastic_graph::{Edge, ElasticGraph, Embedding, Moduli};
use crate::error::{Error, Result};
use crate::linalg::{mean_of, sq_dist};
use crate::optimizer::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    AddNode,
    BisectEdge,
    RemoveLeaf,
    RemoveEdge,
}

impl OpKind {
    pub fn name(&self) -> &'static str {
        match self {
            OpKind::AddNode => "add_node",
            OpKind::BisectEdge => "bisect_edge",
            OpKind::RemoveLeaf => "remove_leaf",
            OpKind::RemoveEdge => "remove_edge",
        }
    }
}

/// One elementary transformation; the payload is a vertex index for
/// `AddNode`/`RemoveLeaf` and an edge index otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GrammarOp {
    AddNode(usize),
    BisectEdge(usize),
    RemoveLeaf(usize),
    RemoveEdge(usize),
}

impl GrammarOp {
    pub fn kind(&self) -> OpKind {
        match self {
            GrammarOp::AddNode(_) => OpKind::AddNode,
            GrammarOp::BisectEdge(_) => OpKind::BisectEdge,
            GrammarOp::RemoveLeaf(_) => OpKind::RemoveLeaf,
            GrammarOp::RemoveEdge(_) => OpKind::RemoveEdge,
        }
    }

    pub fn site(&self) -> usize {
        match *self {
            GrammarOp::AddNode(s)
            | GrammarOp::BisectEdge(s)
            | GrammarOp::RemoveLeaf(s)
            | GrammarOp::RemoveEdge(s) => s,
        }
    }
}

/// "Add a node, bisect an edge" or "remove a leaf, remove an edge".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grammar {
    Grow,
    Shrink,
}

impl Grammar {
    pub fn kinds(&self) -> [OpKind; 2] {
        match self {
            Grammar::Grow => [OpKind::AddNode, OpKind::BisectEdge],
            Grammar::Shrink => [OpKind::RemoveLeaf, OpKind::RemoveEdge],
        }
    }
}

/// Every applicable operation of the grammar, ordered by kind then site.
pub(crate) fn applicable_ops(graph: &ElasticGraph, grammar: Grammar) -> Vec<GrammarOp> {
    let mut ops = Vec::new();
    for kind in grammar.kinds() {
        match kind {
            OpKind::AddNode => ops.extend((0..graph.vertex_count()).map(GrammarOp::AddNode)),
            OpKind::BisectEdge => ops.extend((0..graph.edges().len()).map(GrammarOp::BisectEdge)),
            OpKind::RemoveLeaf => ops.extend(
                (0..graph.vertex_count())
                    .filter(|&v| graph.degree(v) == 1)
                    .map(GrammarOp::RemoveLeaf),
            ),
            OpKind::RemoveEdge => ops.extend((0..graph.edges().len()).map(GrammarOp::RemoveEdge)),
        }
    }
    ops
}

/// All applications of `grammar` to `graph` with the resulting topologies.
pub fn enumerate_candidates(graph: &ElasticGraph, grammar: Grammar, moduli: &Moduli) -> Result<Vec<(GrammarOp, ElasticGraph)>> {
    require_primitive(graph)?;
    applicable_ops(graph, grammar)
        .into_iter()
        .map(|op| apply(graph, op, moduli).map(|g| (op, g)))
        .collect()
}

fn require_primitive(graph: &ElasticGraph) -> Result<()> {
    if graph.is_primitive() {
        Ok(())
    } else {
        Err(Error::InvalidInput("grammars act on primitive graphs only".into()))
    }
}

/// Topology after deleting `victim`; edges touching it are dropped and
/// higher indices shift down by one.
fn delete_vertex(n: usize, edges: &[Edge], victim: usize) -> (usize, Vec<Edge>) {
    let shift = |x: usize| if x > victim { x - 1 } else { x };
    let edges = edges
        .iter()
        .filter(|e| !e.touches(victim))
        .map(|e| Edge {
            u: shift(e.u),
            v: shift(e.v),
            lambda: e.lambda,
        })
        .collect();
    (n - 1, edges)
}

/// Applies `op` to the topology; stars are re-derived.
pub fn apply(graph: &ElasticGraph, op: GrammarOp, moduli: &Moduli) -> Result<ElasticGraph> {
    require_primitive(graph)?;
    let n = graph.vertex_count();
    let edges = graph.edges();
    let (n2, e2) = match op {
        GrammarOp::AddNode(v) => {
            if v >= n {
                return Err(Error::Inapplicable(format!("vertex {v} does not exist")));
            }
            let mut e = edges.to_vec();
            e.push(Edge {
                u: v,
                v: n,
                lambda: moduli.edge(),
            });
            (n + 1, e)
        }
        GrammarOp::BisectEdge(i) => {
            let target = *edges
                .get(i)
                .ok_or_else(|| Error::Inapplicable(format!("edge {i} does not exist")))?;
            let mut e: Vec<Edge> = edges
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| *e)
                .collect();
            e.push(Edge {
                u: target.u,
                v: n,
                lambda: moduli.edge(),
            });
            e.push(Edge {
                u: n,
                v: target.v,
                lambda: moduli.edge(),
            });
            (n + 1, e)
        }
        GrammarOp::RemoveLeaf(v) => {
            if v >= n || graph.degree(v) != 1 {
                return Err(Error::Inapplicable(format!("vertex {v} is not a leaf")));
            }
            delete_vertex(n, edges, v)
        }
        GrammarOp::RemoveEdge(i) => {
            let target = *edges
                .get(i)
                .ok_or_else(|| Error::Inapplicable(format!("edge {i} does not exist")))?;
            let (keep, gone) = (target.u.min(target.v), target.u.max(target.v));
            // reattach the deleted vertex's other neighbours to the survivor
            let mut e: Vec<Edge> = Vec::with_capacity(edges.len());
            for (j, ed) in edges.iter().enumerate() {
                if j == i {
                    continue;
                }
                if ed.touches(gone) {
                    let other = ed.other(gone);
                    if graph.edge_index(keep, other).is_some() {
                        continue;
                    }
                    e.push(Edge {
                        u: keep,
                        v: other,
                        lambda: ed.lambda,
                    });
                } else {
                    e.push(*ed);
                }
            }
            delete_vertex(n, &e, gone)
        }
    };
    let g = ElasticGraph::from_parts_unchecked(n2, e2);
    Ok(g.with_primitive_stars(moduli))
}

/// Applies `op` to graph and embedding together. New vertices are placed
/// at a leaf extrapolation, halfway towards their parent's cell mean, or
/// at an edge midpoint; merged vertices sit at the midpoint of the pair.
pub fn apply_embedded(
    graph: &ElasticGraph,
    emb: &Embedding,
    op: GrammarOp,
    moduli: &Moduli,
    part: Option<&Partition>,
) -> Result<(ElasticGraph, Embedding)> {
    emb.check_against(graph)?;
    let child = apply(graph, op, moduli)?;
    let mut pos = emb.positions.clone();
    match op {
        GrammarOp::AddNode(v) => pos.push(new_node_position(graph, emb, v, part)),
        GrammarOp::BisectEdge(i) => {
            let e = graph.edges()[i];
            pos.push(mean_of([emb.position(e.u), emb.position(e.v)], emb.dim()));
        }
        GrammarOp::RemoveLeaf(v) => {
            pos.remove(v);
        }
        GrammarOp::RemoveEdge(i) => {
            let e = graph.edges()[i];
            let (keep, gone) = (e.u.min(e.v), e.u.max(e.v));
            pos[keep] = mean_of([emb.position(keep), emb.position(gone)], emb.dim());
            pos.remove(gone);
        }
    }
    Ok((child, Embedding { positions: pos }))
}

fn new_node_position(graph: &ElasticGraph, emb: &Embedding, v: usize, part: Option<&Partition>) -> Vec<f64> {
    let pv = emb.position(v);
    let nb = graph.neighbors(v);
    let extrapolated = || -> Vec<f64> {
        if nb.is_empty() {
            return pv.to_vec();
        }
        let mean = mean_of(nb.iter().map(|&u| emb.position(u)), emb.dim());
        pv.iter().zip(&mean).map(|(p, m)| 2.0 * p - m).collect()
    };
    if nb.len() == 1 {
        return extrapolated();
    }
    if let Some(cm) = part.and_then(|p| p.cell_mean(v)) {
        if sq_dist(&cm, pv) > 0.0 {
            return pv.iter().zip(&cm).map(|(p, c)| p + 0.5 * (c - p)).collect();
        }
    }
    extrapolated()
}
