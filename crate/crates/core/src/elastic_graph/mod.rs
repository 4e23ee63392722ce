//! Elastic graphs: simple undirected graphs with selected k-star families,
//! their embedding energy, pluriharmonicity and complexity measures.

mod json;

pub use json::GraphDocument;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub lambda: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }
}

/// A k-star: a centre and its k ≥ 2 leaves with stiffness `mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Star {
    pub center: usize,
    pub leaves: Vec<usize>,
    pub mu: f64,
}

impl Star {
    pub fn order(&self) -> usize {
        self.leaves.len()
    }
}

/// Default elasticity moduli: every edge gets `lambda`, a k-star gets
/// `mu * k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moduli {
    pub lambda: f64,
    pub mu: f64,
}

impl Default for Moduli {
    fn default() -> Self {
        Moduli {
            lambda: 0.01,
            mu: 0.1,
        }
    }
}

impl Moduli {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "moduli must be positive and finite (lambda = {lambda}, mu = {mu})"
            )));
        }
        Ok(Moduli { lambda, mu })
    }

    pub fn edge(&self) -> f64 {
        self.lambda
    }

    pub fn star(&self, k: usize) -> f64 {
        self.mu * k as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    stars: Vec<Star>,
    primitive: bool,
    adjacency: Vec<Vec<usize>>,
}

impl ElasticGraph {
    /// Validates and builds a graph with an explicit star list.
    pub fn new(vertex_count: usize, edges: Vec<Edge>, stars: Vec<Star>, primitive: bool) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) references a missing vertex",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {}", e.u)));
            }
            if !(e.lambda > 0.0 && e.lambda.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) has non-positive modulus",
                    e.u, e.v
                )));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidInput(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
        }
        let adjacency = build_adjacency(vertex_count, &edges);
        for s in &stars {
            if s.center >= vertex_count {
                return Err(Error::InvalidInput(format!("star centre {} missing", s.center)));
            }
            if s.leaves.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "star at {} has fewer than two leaves",
                    s.center
                )));
            }
            if !(s.mu > 0.0 && s.mu.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "star at {} has non-positive modulus",
                    s.center
                )));
            }
            let distinct: BTreeSet<_> = s.leaves.iter().collect();
            if distinct.len() != s.leaves.len() {
                return Err(Error::InvalidInput(format!("star at {} repeats a leaf", s.center)));
            }
            for &l in &s.leaves {
                if l >= vertex_count || adjacency[s.center].binary_search(&l).is_err() {
                    return Err(Error::InvalidInput(format!(
                        "star leaf {l} is not adjacent to centre {}",
                        s.center
                    )));
                }
            }
        }
        let g = ElasticGraph {
            vertex_count,
            edges,
            stars,
            primitive,
            adjacency,
        };
        if primitive && !g.stars_are_primitive() {
            return Err(Error::InvalidInput(
                "primitive graph must carry exactly one star per non-terminal vertex".into(),
            ));
        }
        Ok(g)
    }

    /// Primitive graph whose stars are derived from the topology.
    pub fn primitive(vertex_count: usize, edges: &[(usize, usize)], moduli: &Moduli) -> Result<Self> {
        let edges = edges
            .iter()
            .map(|&(u, v)| Edge {
                u,
                v,
                lambda: moduli.edge(),
            })
            .collect();
        let g = ElasticGraph::new(vertex_count, edges, Vec::new(), false)?;
        Ok(g.with_primitive_stars(moduli))
    }

    /// Path 0 - 1 - ... - (n-1) as a primitive graph.
    pub fn chain(n: usize, moduli: &Moduli) -> Result<Self> {
        let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::primitive(n, &edges, moduli)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn stars(&self) -> &[Star] {
        &self.stars
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    /// Sorted neighbour list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.u == a && e.v == b) || (e.u == b && e.v == a))
    }

    /// Number of stars with exactly `k` leaves.
    pub fn star_count(&self, k: usize) -> usize {
        self.stars.iter().filter(|s| s.order() == k).count()
    }

    fn stars_are_primitive(&self) -> bool {
        let expected = primitive_stars(&self.adjacency, |_| 1.0);
        if expected.len() != self.stars.len() {
            return false;
        }
        let key = |s: &Star| {
            let mut l = s.leaves.clone();
            l.sort_unstable();
            (s.center, l)
        };
        let mut a: Vec<_> = expected.iter().map(key).collect();
        let mut b: Vec<_> = self.stars.iter().map(key).collect();
        a.sort();
        b.sort();
        a == b
    }

    /// Rebuilds the star list from the current topology: one star per
    /// vertex of degree ≥ 2 over all its neighbours, modulus `moduli.star(k)`.
    pub fn with_primitive_stars(&self, moduli: &Moduli) -> ElasticGraph {
        let stars = primitive_stars(&self.adjacency, |k| moduli.star(k));
        ElasticGraph {
            vertex_count: self.vertex_count,
            edges: self.edges.clone(),
            stars,
            primitive: true,
            adjacency: self.adjacency.clone(),
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.vertex_count
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count && self.is_connected()
    }

    /// Hop distances from `src` to every vertex (`usize::MAX` if unreachable).
    pub fn hop_distances(&self, src: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.vertex_count];
        let mut queue = std::collections::VecDeque::new();
        d[src] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[v] {
                if d[u] == usize::MAX {
                    d[u] = d[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        d
    }

    pub(crate) fn from_parts_unchecked(vertex_count: usize, edges: Vec<Edge>) -> ElasticGraph {
        let adjacency = build_adjacency(vertex_count, &edges);
        ElasticGraph {
            vertex_count,
            edges,
            stars: Vec::new(),
            primitive: false,
            adjacency,
        }
    }
}

fn build_adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

fn primitive_stars(adjacency: &[Vec<usize>], mu_of_k: impl Fn(usize) -> f64) -> Vec<Star> {
    adjacency
        .iter()
        .enumerate()
        .filter(|(_, nb)| nb.len() >= 2)
        .map(|(c, nb)| Star {
            center: c,
            leaves: nb.clone(),
            mu: mu_of_k(nb.len()),
        })
        .collect()
}

/// Rebuilds the primitive star list of `graph`.
pub fn sync_primitive_stars(graph: &ElasticGraph, moduli: &Moduli) -> Result<ElasticGraph> {
    if !graph.is_primitive() {
        return Err(Error::InvalidInput("graph is not primitive".into()));
    }
    Ok(graph.with_primitive_stars(moduli))
}

/// Vertex positions of a graph embedding, one row per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub positions: Vec<Vec<f64>>,
}

impl Embedding {
    pub fn new(positions: Vec<Vec<f64>>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput("embedding has no vertices".into()));
        }
        let m = positions[0].len();
        for (i, p) in positions.iter().enumerate() {
            if p.len() != m {
                return Err(Error::DimensionMismatch(format!("position {i} has wrong length")));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("position of vertex {i}")));
            }
        }
        Ok(Embedding { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn position(&self, v: usize) -> &[f64] {
        &self.positions[v]
    }

    pub fn scaled(&self, c: f64) -> Embedding {
        Embedding {
            positions: self
                .positions
                .iter()
                .map(|p| p.iter().map(|x| c * x).collect())
                .collect(),
        }
    }

    pub fn translated(&self, t: &[f64]) -> Embedding {
        Embedding {
            positions: self
                .positions
                .iter()
                .map(|p| p.iter().zip(t).map(|(x, s)| x + s).collect())
                .collect(),
        }
    }

    pub(crate) fn check_against(&self, graph: &ElasticGraph) -> Result<()> {
        if self.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "embedding has {} rows for {} vertices",
                self.len(),
                graph.vertex_count()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub u_edges: f64,
    pub u_stars: f64,
    pub u_total: f64,
}

/// Squared deviation of a star centre from the mean of its leaves.
pub fn star_deviation_sq(star: &Star, emb: &Embedding) -> f64 {
    let k = star.order() as f64;
    let c = emb.position(star.center);
    let mut acc = 0.0;
    for (a, &cx) in c.iter().enumerate() {
        let mean: f64 = star.leaves.iter().map(|&l| emb.positions[l][a]).sum::<f64>() / k;
        let d = cx - mean;
        acc += d * d;
    }
    acc
}

/// Edge stretching plus star bending energy of an embedding.
pub fn energy(graph: &ElasticGraph, emb: &Embedding) -> Result<Energy> {
    emb.check_against(graph)?;
    let u_edges = graph
        .edges()
        .iter()
        .map(|e| e.lambda * sq_dist(emb.position(e.u), emb.position(e.v)))
        .sum::<f64>();
    let u_stars = graph
        .stars()
        .iter()
        .map(|s| s.mu * star_deviation_sq(s, emb))
        .sum::<f64>();
    Ok(Energy {
        u_edges,
        u_stars,
        u_total: u_edges + u_stars,
    })
}

/// True iff every selected star centre lies within `tol` of its leaf mean.
pub fn is_pluriharmonic(graph: &ElasticGraph, emb: &Embedding, tol: f64) -> Result<bool> {
    emb.check_against(graph)?;
    if tol < 0.0 {
        return Err(Error::InvalidInput("tolerance must be non-negative".into()));
    }
    Ok(graph
        .stars()
        .iter()
        .all(|s| star_deviation_sq(s, emb).sqrt() <= tol))
}

/// Structural complexity value; `Infinite` sorts above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Complexity {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScForm {
    /// SC(G) = |V|.
    VertexCount,
    /// |S_3| when at most `b_max` 3-stars and no higher-order stars exist,
    /// infinite otherwise.
    BranchCount { b_max: u64 },
}

pub fn sc(graph: &ElasticGraph, form: ScForm) -> Complexity {
    match form {
        ScForm::VertexCount => Complexity::Finite(graph.vertex_count() as u64),
        ScForm::BranchCount { b_max } => {
            let s3 = graph.star_count(3) as u64;
            let higher = graph.stars().iter().any(|s| s.order() >= 4);
            if s3 <= b_max && !higher {
                Complexity::Finite(s3)
            } else {
                Complexity::Infinite
            }
        }
    }
}

/// Upper bounds on structural and construction complexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityBudget {
    pub form: ScForm,
    pub sc_max: u64,
    pub cc_max: usize,
}

impl ComplexityBudget {
    /// Branch-count budget allowing `b_max` 3-stars.
    pub fn branches(b_max: u64, cc_max: usize) -> Self {
        ComplexityBudget {
            form: ScForm::BranchCount { b_max },
            sc_max: b_max,
            cc_max,
        }
    }

    pub fn permits(&self, graph: &ElasticGraph) -> bool {
        sc(graph, self.form) <= Complexity::Finite(self.sc_max)
    }
}

/// A rectangular elastic net together with its lattice shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub graph: ElasticGraph,
}

impl Grid {
    #[inline]
    pub fn vertex(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    /// (row, col) of a vertex.
    #[inline]
    pub fn cell(&self, v: usize) -> (usize, usize) {
        (v / self.cols, v % self.cols)
    }

    /// Lattice coordinates (col·h_x, row·h_y) of every vertex, with h_x and
    /// h_y the mean embedded lengths of horizontal and vertical edges.
    pub fn internal_coordinates(&self, emb: &Embedding) -> Result<Vec<Vec<f64>>> {
        emb.check_against(&self.graph)?;
        let (mut hx, mut nx, mut hy, mut ny) = (0.0, 0usize, 0.0, 0usize);
        for e in self.graph.edges() {
            let l = sq_dist(emb.position(e.u), emb.position(e.v)).sqrt();
            if self.cell(e.u).0 == self.cell(e.v).0 {
                hx += l;
                nx += 1;
            } else {
                hy += l;
                ny += 1;
            }
        }
        let (hx, hy) = (hx / nx as f64, hy / ny as f64);
        Ok((0..self.graph.vertex_count())
            .map(|v| {
                let (r, c) = self.cell(v);
                vec![c as f64 * hx, r as f64 * hy]
            })
            .collect())
    }
}

/// Square lattice with horizontal and vertical 2-stars through every
/// vertex that has both neighbours in that direction.
pub fn build_grid(rows: usize, cols: usize, moduli: &Moduli) -> Result<Grid> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 2x2 nodes, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push(Edge {
                    u: id(r, c),
                    v: id(r, c + 1),
                    lambda: moduli.edge(),
                });
            }
            if r + 1 < rows {
                edges.push(Edge {
                    u: id(r, c),
                    v: id(r + 1, c),
                    lambda: moduli.edge(),
                });
            }
        }
    }
    let mut stars = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c >= 1 && c + 1 < cols {
                stars.push(Star {
                    center: id(r, c),
                    leaves: vec![id(r, c - 1), id(r, c + 1)],
                    mu: moduli.star(2),
                });
            }
            if r >= 1 && r + 1 < rows {
                stars.push(Star {
                    center: id(r, c),
                    leaves: vec![id(r - 1, c), id(r + 1, c)],
                    mu: moduli.star(2),
                });
            }
        }
    }
    Ok(Grid {
        rows,
        cols,
        graph: ElasticGraph::new(rows * cols, edges, stars, false)?,
    })
}
