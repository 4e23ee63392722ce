//! Sparse symmetric linear systems for the embedding update.
//!
//! The system matrix is shared by all coordinates. Up to
//! [`DIRECT_SOLVER_LIMIT`] unknowns it is factored once with an envelope
//! (skyline) Cholesky; larger systems use Jacobi-preconditioned conjugate
//! gradients per coordinate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::elastic_graph::{ElasticGraph, Embedding};
use crate::error::{Error, Result};
use crate::optimizer::Partition;

pub const DIRECT_SOLVER_LIMIT: usize = 10_000;

/// Relative pivot size below which the factorisation is declared singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LinearSolver {
    /// Direct below [`DIRECT_SOLVER_LIMIT`] unknowns, CG above.
    #[default]
    Auto,
    Direct,
    ConjugateGradient,
}

/// Symmetric matrix stored as per-row maps of the lower triangle.
#[derive(Debug, Clone)]
pub struct SymmetricSparse {
    n: usize,
    lower: Vec<BTreeMap<usize, f64>>,
}

impl SymmetricSparse {
    pub fn new(n: usize) -> Self {
        SymmetricSparse {
            n,
            lower: vec![BTreeMap::new(); n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Adds `v` to entry (i, j) and, implicitly, (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        *self.lower[r].entry(c).or_insert(0.0) += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.lower[r].get(&c).copied().unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (r, row) in self.lower.iter().enumerate() {
            for (&c, &v) in row {
                y[r] += v * x[c];
                if c != r {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }

    /// Dense copy, for tests and diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, row) in self.lower.iter().enumerate() {
            for (&c, &v) in row {
                d[r][c] = v;
                d[c][r] = v;
            }
        }
        d
    }
}

/// Assembles the system matrix and right-hand sides of the embedding
/// update for a fixed partition. Returns (A, B) with B one column per
/// coordinate, stored row-major as |V| × m.
pub fn assemble(data: &Dataset, graph: &ElasticGraph, part: &Partition) -> (SymmetricSparse, Vec<Vec<f64>>) {
    let n = graph.vertex_count();
    let w_total = data.total_weight();
    let mut a = SymmetricSparse::new(n);
    for j in 0..n {
        a.add(j, j, part.cell_weight[j] / w_total);
    }
    for e in graph.edges() {
        a.add(e.u, e.u, e.lambda);
        a.add(e.v, e.v, e.lambda);
        a.add(e.u, e.v, -e.lambda);
    }
    for s in graph.stars() {
        let k = s.order() as f64;
        let mut idx = Vec::with_capacity(s.leaves.len() + 1);
        idx.push((s.center, 1.0));
        idx.extend(s.leaves.iter().map(|&l| (l, -1.0 / k)));
        for (p, &(i, ei)) in idx.iter().enumerate() {
            for &(j, ej) in &idx[..=p] {
                a.add(i, j, s.mu * ei * ej);
            }
        }
    }
    let b = part
        .cell_weighted_sum
        .iter()
        .map(|s| s.iter().map(|x| x / w_total).collect())
        .collect();
    (a, b)
}

/// Envelope Cholesky factor: row i stores L[i][first[i]..=i].
struct Skyline {
    first: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Skyline {
    fn factor(a: &SymmetricSparse) -> Result<Skyline> {
        let n = a.size();
        let first: Vec<usize> = (0..n)
            .map(|i| a.lower[i].keys().next().copied().unwrap_or(i).min(i))
            .collect();
        let mut rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut r = vec![0.0; i - first[i] + 1];
                for (&c, &v) in &a.lower[i] {
                    r[c - first[i]] = v;
                }
                r
            })
            .collect();
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = rows[i][j - fi];
                for k in lo..j {
                    s -= rows[i][k - fi] * rows[j][k - fj];
                }
                rows[i][j - fi] = s / rows[j][j - fj];
            }
            let diag = a.get(i, i);
            let mut d = rows[i][i - fi];
            for k in fi..i {
                let l = rows[i][k - fi];
                d -= l * l;
            }
            if !(d > PIVOT_TOLERANCE * diag.abs().max(f64::MIN_POSITIVE)) {
                return Err(Error::Degenerate(format!(
                    "system matrix is singular at vertex {i} (a connected component owns no data?)"
                )));
            }
            rows[i][i - fi] = d.sqrt();
        }
        Ok(Skyline { first, rows })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.rows[i][k - fi] * y[k];
            }
            y[i] = s / self.rows[i][i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            y[i] /= self.rows[i][i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.rows[i][k - fi] * yi;
            }
        }
        y
    }
}

fn pcg(a: &SymmetricSparse, b: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
    let n = a.size();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    if diag.iter().any(|d| *d <= 0.0) {
        return Err(Error::Degenerate("non-positive diagonal entry".into()));
    }
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = x0.to_vec();
    let ax = a.mul_vec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 20 * n + 100;
    for _ in 0..max_iter {
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= 1e-13 * bnorm {
            return Ok(x);
        }
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::Degenerate("system matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence(format!("conjugate gradient after {max_iter} iterations")))
}

/// Solves A·Φ = B for every coordinate column of B.
pub fn solve_system(a: &SymmetricSparse, b: &[Vec<f64>], solver: LinearSolver, warm: Option<&Embedding>) -> Result<Vec<Vec<f64>>> {
    let n = a.size();
    let m = b.first().map_or(0, Vec::len);
    let direct = match solver {
        LinearSolver::Direct => true,
        LinearSolver::ConjugateGradient => false,
        LinearSolver::Auto => n <= DIRECT_SOLVER_LIMIT,
    };
    let mut out = vec![vec![0.0; m]; n];
    if direct {
        let f = Skyline::factor(a)?;
        for c in 0..m {
            let col: Vec<f64> = b.iter().map(|r| r[c]).collect();
            let x = f.solve(&col);
            for (row, v) in out.iter_mut().zip(x) {
                row[c] = v;
            }
        }
    } else {
        for c in 0..m {
            let col: Vec<f64> = b.iter().map(|r| r[c]).collect();
            let x0: Vec<f64> = match warm {
                Some(e) if e.len() == n => e.positions.iter().map(|p| p[c]).collect(),
                _ => vec![0.0; n],
            };
            let x = pcg(a, &col, &x0)?;
            for (row, v) in out.iter_mut().zip(x) {
                row[c] = v;
            }
        }
    }
    if out.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solved embedding".into()));
    }
    Ok(out)
}

/// Exact minimiser of MSD + elastic energy over vertex positions with the
/// partition held fixed.
pub fn solve_embedding(data: &Dataset, graph: &ElasticGraph, part: &Partition) -> Result<Embedding> {
    solve_embedding_with(data, graph, part, LinearSolver::Auto, None)
}

pub fn solve_embedding_with(
    data: &Dataset,
    graph: &ElasticGraph,
    part: &Partition,
    solver: LinearSolver,
    warm: Option<&Embedding>,
) -> Result<Embedding> {
    if part.vertex_count() != graph.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} vertices, graph has {}",
            part.vertex_count(),
            graph.vertex_count()
        )));
    }
    let (a, b) = assemble(data, graph, part);
    let positions = solve_system(&a, &b, solver, warm)?;
    Ok(Embedding { positions })
}
