//! Metro-map drawing of a principal tree: equiangular stars, edge lengths
//! proportional to the embedded ones, pie-chart glyphs per node.

mod svg;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dataset::{pca, Dataset};
use crate::elastic_graph::{ElasticGraph, Embedding};
use crate::error::{Error, Result};
use crate::linalg::dist;
use crate::optimizer::Partition;

pub use svg::{emit_svg, SvgStyle};

/// Plane used to read the cyclic order of a star's leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafOrder {
    /// Principal plane of all vertex positions.
    #[default]
    GlobalPlane,
    /// Principal plane of the star's own centre and leaves.
    LocalPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    /// Map length per embedded length.
    pub scale: f64,
    /// Glyph radius of the most populated node; `None` uses 0.35 of the
    /// median drawn edge length.
    pub max_radius: Option<f64>,
    /// Radius of nodes owning no points, as a fraction of `max_radius`.
    pub empty_radius_fraction: f64,
    pub leaf_order: LeafOrder,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            scale: 1.0,
            max_radius: None,
            empty_radius_fraction: 0.15,
            leaf_order: LeafOrder::GlobalPlane,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeLayout {
    pub root: usize,
    pub scale: f64,
    pub coords: Vec<[f64; 2]>,
    pub node_radius: Vec<f64>,
    pub counts: Vec<usize>,
    /// Label fractions of each node's cell, sorted by label.
    pub pie: Vec<Vec<(String, f64)>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeLayout {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn edge_length(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (self.coords[u], self.coords[v]);
        (a[0] - b[0]).hypot(a[1] - b[1])
    }
}

fn require_tree(graph: &ElasticGraph) -> Result<()> {
    if graph.vertex_count() == 0 || !graph.is_tree() {
        return Err(Error::InvalidInput("metro-map layout needs a tree".into()));
    }
    Ok(())
}

/// Sum of embedded edge lengths along tree paths from `src`.
fn path_lengths(graph: &ElasticGraph, src: usize, len: &dyn Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut d = vec![f64::NAN; graph.vertex_count()];
    d[src] = 0.0;
    let mut stack = vec![src];
    while let Some(v) = stack.pop() {
        for &u in graph.neighbors(v) {
            if d[u].is_nan() {
                d[u] = d[v] + len(v, u);
                stack.push(u);
            }
        }
    }
    d
}

/// Vertex with the smallest largest path length to any other vertex.
fn central_vertex(graph: &ElasticGraph, emb: &Embedding) -> usize {
    let len = |a: usize, b: usize| dist(emb.position(a), emb.position(b));
    let mut best = (f64::INFINITY, 0);
    for v in 0..graph.vertex_count() {
        let ecc = path_lengths(graph, v, &len).into_iter().fold(0.0, f64::max);
        if ecc < best.0 {
            best = (ecc, v);
        }
    }
    best.1
}

/// 2-D coordinates of `points` in their own principal plane, or `None`
/// when they span less than a plane.
fn planar(points: Vec<Vec<f64>>) -> Option<Vec<[f64; 2]>> {
    if points.len() < 3 || points[0].len() < 2 {
        return None;
    }
    let data = Dataset::new(points).ok()?;
    let model = pca(&data, 2).ok()?;
    if model.eigenvalues[1] <= 1e-12 * model.total_variance {
        return None;
    }
    Some(
        data.points()
            .iter()
            .map(|p| {
                let c = model.project_point(p, 2);
                [c[0], c[1]]
            })
            .collect(),
    )
}

/// Neighbours of `v` in counter-clockwise planar order, rotated so that
/// `first` (if given) leads.
fn cyclic_order(
    graph: &ElasticGraph,
    emb: &Embedding,
    plane: Option<&[[f64; 2]]>,
    order: LeafOrder,
    v: usize,
    first: Option<usize>,
) -> Vec<usize> {
    let nb = graph.neighbors(v).to_vec();
    let local;
    let (centre, leaf_xy): ([f64; 2], Vec<[f64; 2]>) = match order {
        LeafOrder::GlobalPlane => match plane {
            Some(p) => (p[v], nb.iter().map(|&u| p[u]).collect()),
            None => ([0.0, 0.0], vec![]),
        },
        LeafOrder::LocalPlane => {
            let mut pts = vec![emb.position(v).to_vec()];
            pts.extend(nb.iter().map(|&u| emb.position(u).to_vec()));
            local = planar(pts);
            match &local {
                Some(p) => (p[0], p[1..].to_vec()),
                None => ([0.0, 0.0], vec![]),
            }
        }
    };
    let mut keyed: Vec<(f64, usize)> = if leaf_xy.is_empty() {
        nb.iter().enumerate().map(|(i, &u)| (i as f64, u)).collect()
    } else {
        nb.iter()
            .zip(&leaf_xy)
            .map(|(&u, q)| ((q[1] - centre[1]).atan2(q[0] - centre[0]), u))
            .collect()
    };
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut ring: Vec<usize> = keyed.into_iter().map(|(_, u)| u).collect();
    if let Some(f) = first {
        let at = ring.iter().position(|&u| u == f).expect("first is a neighbour");
        ring.rotate_left(at);
    }
    ring
}

/// Lays the tree out from its most central vertex. Every vertex of degree
/// d has its incident edges 2π/d apart; the root's first neighbour points
/// along +x. Leaf order follows the chosen principal plane.
pub fn layout_tree(
    graph: &ElasticGraph,
    emb: &Embedding,
    part: &Partition,
    labels: Option<&[String]>,
    cfg: &LayoutConfig,
) -> Result<TreeLayout> {
    require_tree(graph)?;
    emb.check_against(graph)?;
    if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
        return Err(Error::InvalidInput("layout scale must be positive".into()));
    }
    if part.owner.iter().any(|&v| v >= graph.vertex_count()) {
        return Err(Error::DimensionMismatch("partition does not match the graph".into()));
    }
    if let Some(l) = labels {
        if l.len() != part.owner.len() {
            return Err(Error::DimensionMismatch("one label per partitioned point required".into()));
        }
    }
    let n = graph.vertex_count();
    let root = central_vertex(graph, emb);
    let plane = planar(emb.positions.clone());
    let mut coords = vec![[0.0f64; 2]; n];
    let mut angle_in = vec![0.0f64; n];
    let mut parent = vec![usize::MAX; n];
    let mut stack = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    while let Some(v) = stack.pop() {
        let d = graph.degree(v);
        if d == 0 {
            continue;
        }
        let step = 2.0 * PI / d as f64;
        let (ring, base) = if v == root {
            (cyclic_order(graph, emb, plane.as_deref(), cfg.leaf_order, v, None), 0.0)
        } else {
            let p = parent[v];
            // direction from v back to its parent
            (cyclic_order(graph, emb, plane.as_deref(), cfg.leaf_order, v, Some(p)), angle_in[v] + PI)
        };
        for (i, &u) in ring.iter().enumerate() {
            if seen[u] {
                continue;
            }
            seen[u] = true;
            let a = base + step * i as f64;
            let l = cfg.scale * dist(emb.position(v), emb.position(u));
            coords[u] = [coords[v][0] + l * a.cos(), coords[v][1] + l * a.sin()];
            angle_in[u] = a;
            parent[u] = v;
            stack.push(u);
        }
    }

    let counts = part.cell_counts();
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let max_radius = match cfg.max_radius {
        Some(r) => r,
        None => {
            let mut lens: Vec<f64> = graph
                .edges()
                .iter()
                .map(|e| cfg.scale * dist(emb.position(e.u), emb.position(e.v)))
                .collect();
            lens.sort_by(f64::total_cmp);
            lens.get(lens.len() / 2).map_or(cfg.scale, |m| 0.35 * m)
        }
    };
    let node_radius = counts
        .iter()
        .map(|&c| {
            if c == 0 || max_count == 0 {
                cfg.empty_radius_fraction * max_radius
            } else {
                max_radius * (c as f64 / max_count as f64).sqrt()
            }
        })
        .collect();
    let pie = match labels {
        None => vec![Vec::new(); n],
        Some(l) => {
            let mut tally: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); n];
            for (i, &v) in part.owner.iter().enumerate() {
                *tally[v].entry(l[i].as_str()).or_default() += 1;
            }
            tally
                .into_iter()
                .zip(&counts)
                .map(|(t, &c)| t.into_iter().map(|(k, m)| (k.to_string(), m as f64 / c as f64)).collect())
                .collect()
        }
    };
    Ok(TreeLayout {
        root,
        scale: cfg.scale,
        coords,
        node_radius,
        counts,
        pie,
        edges: graph.edges().iter().map(|e| (e.u, e.v)).collect(),
    })
}

/// Largest deviation of a gap between consecutive incident edges from
/// 2π/d, over all vertices of degree d ≥ 2.
pub fn equiangularity_error(layout: &TreeLayout, graph: &ElasticGraph) -> f64 {
    let mut worst: f64 = 0.0;
    for v in 0..graph.vertex_count() {
        let d = graph.degree(v);
        if d < 2 {
            continue;
        }
        let c = layout.coords[v];
        let mut angles: Vec<f64> = graph
            .neighbors(v)
            .iter()
            .map(|&u| {
                let q = layout.coords[u];
                (q[1] - c[1]).atan2(q[0] - c[0])
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        let target = 2.0 * PI / d as f64;
        for i in 0..d {
            let gap = if i + 1 < d { angles[i + 1] - angles[i] } else { angles[0] + 2.0 * PI - angles[d - 1] };
            worst = worst.max((gap - target).abs());
        }
    }
    worst
}

/// Largest relative deviation of a drawn edge from scale × embedded length.
pub fn edge_length_error(layout: &TreeLayout, emb: &Embedding) -> f64 {
    layout
        .edges
        .iter()
        .map(|&(u, v)| {
            let want = layout.scale * dist(emb.position(u), emb.position(v));
            let got = layout.edge_length(u, v);
            if want > 0.0 {
                (got - want).abs() / want
            } else {
                got
            }
        })
        .fold(0.0, f64::max)
}

/// Largest relative discrepancy, over all vertex pairs, between the map
/// path length and scale × the embedded path length.
pub fn path_distance_check(layout: &TreeLayout, graph: &ElasticGraph, emb: &Embedding) -> Result<f64> {
    require_tree(graph)?;
    if layout.coords.len() != graph.vertex_count() {
        return Err(Error::DimensionMismatch("layout does not match the graph".into()));
    }
    let drawn = |a: usize, b: usize| layout.edge_length(a, b);
    let embedded = |a: usize, b: usize| layout.scale * dist(emb.position(a), emb.position(b));
    let mut worst: f64 = 0.0;
    for s in 0..graph.vertex_count() {
        let p = path_lengths(graph, s, &drawn);
        let q = path_lengths(graph, s, &embedded);
        for t in s + 1..graph.vertex_count() {
            if q[t] > 0.0 {
                worst = worst.max((p[t] - q[t]).abs() / q[t]);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastic_graph::Moduli;
    use crate::optimizer::partition;

    fn one_point_per_vertex(emb: &Embedding) -> Partition {
        let data = Dataset::new(emb.positions.clone()).unwrap();
        partition(&data, emb)
    }

    #[test]
    fn single_edge_is_horizontal() {
        let g = ElasticGraph::chain(2, &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 2.0]]).unwrap();
        let cfg = LayoutConfig {
            scale: 2.0,
            ..LayoutConfig::default()
        };
        let l = layout_tree(&g, &emb, &one_point_per_vertex(&emb), None, &cfg).unwrap();
        assert_eq!(l.root, 0);
        assert_eq!(l.coords[0], [0.0, 0.0]);
        assert!((l.coords[1][0] - 6.0).abs() < 1e-12 && l.coords[1][1].abs() < 1e-12);
    }

    #[test]
    fn three_star_spacing() {
        let g = ElasticGraph::primitive(4, &[(0, 1), (0, 2), (0, 3)], &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        let l = layout_tree(&g, &emb, &one_point_per_vertex(&emb), None, &LayoutConfig::default()).unwrap();
        assert_eq!(l.root, 0);
        assert!(equiangularity_error(&l, &g) < 1e-12);
    }

    #[test]
    fn rejects_cycles() {
        let g = ElasticGraph::primitive(3, &[(0, 1), (1, 2), (2, 0)], &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let p = one_point_per_vertex(&emb);
        assert!(layout_tree(&g, &emb, &p, None, &LayoutConfig::default()).is_err());
    }

    #[test]
    fn stretched_edge_detected() {
        let g = ElasticGraph::chain(3, &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.5]]).unwrap();
        let mut l = layout_tree(&g, &emb, &one_point_per_vertex(&emb), None, &LayoutConfig::default()).unwrap();
        assert!(path_distance_check(&l, &g, &emb).unwrap() < 1e-12);
        // move vertex 2 so its edge to vertex 1 doubles
        let (a, b) = (l.coords[1], l.coords[2]);
        l.coords[2] = [a[0] + 2.0 * (b[0] - a[0]), a[1] + 2.0 * (b[1] - a[1])];
        let err = path_distance_check(&l, &g, &emb).unwrap();
        assert!((err - 1.0).abs() < 1e-9, "{err}");
    }

    #[test]
    fn pies_and_radii() {
        let g = ElasticGraph::chain(2, &Moduli::default()).unwrap();
        let emb = Embedding::new(vec![vec![0.0, 0.0], vec![4.0, 0.0], ]).unwrap();
        let data = Dataset::new(vec![vec![0.0, 0.1], vec![0.0, -0.1], vec![0.1, 0.0], vec![0.0, 0.2], vec![3.9, 0.0]]).unwrap();
        let p = partition(&data, &emb);
        let labels: Vec<String> = ["x", "y", "x", "y", "y"].iter().map(|s| s.to_string()).collect();
        let l = layout_tree(&g, &emb, &p, Some(&labels), &LayoutConfig::default()).unwrap();
        assert_eq!(l.pie[0], vec![("x".to_string(), 0.5), ("y".to_string(), 0.5)]);
        assert_eq!(l.pie[1], vec![("y".to_string(), 1.0)]);
        let area_ratio = (l.node_radius[1] / l.node_radius[0]).powi(2);
        assert!((area_ratio - 0.25).abs() < 1e-12);
    }
}
