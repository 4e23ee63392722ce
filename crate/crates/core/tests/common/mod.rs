//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use elmap::elastic_graph::{ElasticGraph, Moduli};
use elmap::optimizer::Partition;
use elmap::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A fitting problem with its points already assigned to vertices.
pub struct Instance {
    pub data: Dataset,
    pub graph: ElasticGraph,
    pub owner: Vec<usize>,
}

impl Instance {
    pub fn partition(&self) -> Partition {
        let k = self.graph.vertex_count();
        let m = self.data.dim();
        let mut cell_weight = vec![0.0; k];
        let mut cell_weighted_sum = vec![vec![0.0; m]; k];
        for (i, &v) in self.owner.iter().enumerate() {
            let w = self.data.weights()[i];
            cell_weight[v] += w;
            for (s, x) in cell_weighted_sum[v].iter_mut().zip(self.data.point(i)) {
                *s += w * x;
            }
        }
        Partition {
            owner: self.owner.clone(),
            cell_weight,
            cell_weighted_sum,
        }
    }
}

/// Random connected graph on at most `max_v` vertices: a random tree,
/// optionally with extra chords, with primitive stars.
pub fn random_graph(rng: &mut ChaCha8Rng, max_v: usize) -> ElasticGraph {
    let n = rng.random_range(1..=max_v);
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    if n >= 3 && rng.random_bool(0.4) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !edges.iter().any(|&(u, v)| (u, v) == (a, b) || (u, v) == (b, a)) {
            edges.push((a, b));
        }
    }
    let moduli = Moduli::new(rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)).unwrap();
    ElasticGraph::primitive(n, &edges, &moduli).unwrap()
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_v: usize, max_n: usize, max_m: usize) -> Instance {
    let graph = random_graph(rng, max_v);
    let k = graph.vertex_count();
    let n = rng.random_range(k.max(2)..=max_n);
    let m = rng.random_range(1..=max_m);
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    let data = Dataset::new(pts).unwrap().with_weights(weights).unwrap();
    let owner = (0..n).map(|_| rng.random_range(0..k)).collect();
    Instance { data, graph, owner }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Value of weighted MSD (fixed assignment) plus edge and star energy,
/// written out from the definitions.
pub fn objective(inst: &Instance, phi: &[Vec<f64>]) -> f64 {
    let w_total: f64 = inst.data.weights().iter().sum();
    let mut f = 0.0;
    for (i, &v) in inst.owner.iter().enumerate() {
        let d: f64 = inst.data.point(i).iter().zip(&phi[v]).map(|(x, p)| (x - p) * (x - p)).sum();
        f += inst.data.weights()[i] * d / w_total;
    }
    for e in inst.graph.edges() {
        f += e.lambda * phi[e.u].iter().zip(&phi[e.v]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    for s in inst.graph.stars() {
        let k = s.leaves.len() as f64;
        for c in 0..phi[0].len() {
            let mean: f64 = s.leaves.iter().map(|&l| phi[l][c]).sum::<f64>() / k;
            f += s.mu * (phi[s.center][c] - mean).powi(2);
        }
    }
    f
}

/// Gradient of [`objective`].
pub fn gradient(inst: &Instance, phi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = phi[0].len();
    let w_total: f64 = inst.data.weights().iter().sum();
    let mut g = vec![vec![0.0; m]; phi.len()];
    for (i, &v) in inst.owner.iter().enumerate() {
        let w = inst.data.weights()[i] / w_total;
        for c in 0..m {
            g[v][c] += 2.0 * w * (phi[v][c] - inst.data.point(i)[c]);
        }
    }
    for e in inst.graph.edges() {
        for c in 0..m {
            let d = 2.0 * e.lambda * (phi[e.u][c] - phi[e.v][c]);
            g[e.u][c] += d;
            g[e.v][c] -= d;
        }
    }
    for s in inst.graph.stars() {
        let k = s.leaves.len() as f64;
        for c in 0..m {
            let dev = phi[s.center][c] - s.leaves.iter().map(|&l| phi[l][c]).sum::<f64>() / k;
            g[s.center][c] += 2.0 * s.mu * dev;
            for &l in &s.leaves {
                g[l][c] -= 2.0 * s.mu * dev / k;
            }
        }
    }
    g
}

fn flat_norm(v: &[Vec<f64>]) -> f64 {
    v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest curvature of the quadratic objective by power iteration on
/// Hessian-vector products (differences of gradients).
fn lipschitz(inst: &Instance, m: usize) -> f64 {
    let k = inst.graph.vertex_count();
    let zero = vec![vec![0.0; m]; k];
    let g0 = gradient(inst, &zero);
    let mut v: Vec<Vec<f64>> = (0..k).map(|i| (0..m).map(|c| 1.0 + 0.1 * ((i * 7 + c * 3) % 5) as f64).collect()).collect();
    let mut est = 0.0;
    for _ in 0..500 {
        let n = flat_norm(&v);
        v.iter_mut().flatten().for_each(|x| *x /= n);
        let g = gradient(inst, &v);
        let hv: Vec<Vec<f64>> = g.iter().zip(&g0).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
        est = flat_norm(&hv);
        v = hv;
    }
    est * 1.05
}

/// Nesterov-accelerated gradient descent with gradient-based restart,
/// run until the gradient is negligible.
pub fn gradient_descent(inst: &Instance, start: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = start[0].len();
    let step = 1.0 / lipschitz(inst, m);
    let mut x = start.to_vec();
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..2_000_000 {
        let g = gradient(inst, &y);
        if flat_norm(&g) < 1e-13 {
            return y;
        }
        let next: Vec<Vec<f64>> = y.iter().zip(&g).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p - step * q).collect()).collect();
        let uphill: f64 = g.iter().flatten().zip(next.iter().flatten().zip(x.iter().flatten())).map(|(gi, (n, o))| gi * (n - o)).sum();
        if uphill > 0.0 {
            // momentum points uphill: drop it
            t = 1.0;
            y = next.clone();
        } else {
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let beta = (t - 1.0) / t_next;
            y = next.iter().zip(&x).map(|(a, b)| a.iter().zip(b).map(|(p, q)| p + beta * (p - q)).collect()).collect();
            t = t_next;
        }
        x = next;
    }
    x
}

/// Canonical form: lexicographically smallest sorted edge list over all
/// vertex relabelings. Brute force, for small graphs only.
pub fn canonical_form(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    permutations(n)
        .into_iter()
        .map(|p| {
            let mut e: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(a, b)| (p[a].min(p[b]), p[a].max(p[b])))
                .collect();
            e.sort_unstable();
            e
        })
        .min()
        .unwrap_or_default()
}

pub fn isomorphism_classes(graphs: &[ElasticGraph]) -> usize {
    count_classes(graphs, None)
}

/// Classes of graphs with one distinguished vertex (encoded as a loop), so
/// that relabelings must map marked vertex to marked vertex.
pub fn marked_isomorphism_classes(graphs: &[ElasticGraph], marked: &[usize]) -> usize {
    count_classes(graphs, Some(marked))
}

fn count_classes(graphs: &[ElasticGraph], marked: Option<&[usize]>) -> usize {
    let mut forms: Vec<(usize, Vec<(usize, usize)>)> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut e: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
            if let Some(m) = marked {
                e.push((m[i], m[i]));
            }
            (g.vertex_count(), canonical_form(g.vertex_count(), &e))
        })
        .collect();
    forms.sort();
    forms.dedup();
    forms.len()
}
