use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Weighted principal components of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Orthonormal rows, strongest first.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub total_variance: f64,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Coordinates of a single point in the first `q` components.
    pub fn project_point(&self, x: &[f64], q: usize) -> Vec<f64> {
        let c: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        self.components[..q].iter().map(|v| dot(v, &c)).collect()
    }

    pub fn reconstruct_point(&self, coords: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (c, v) in coords.iter().zip(&self.components) {
            crate::linalg::add_scaled(&mut x, v, *c);
        }
        x
    }

    /// Weighted MSD of the data to the affine span of the first `q`
    /// components, from the spectrum.
    pub fn residual_variance(&self, q: usize) -> f64 {
        (self.total_variance - self.eigenvalues[..q].iter().sum::<f64>()).max(0.0)
    }
}

const EIGEN_FLOOR: f64 = 1e-12;

/// Top-`q` principal components of the weighted covariance. Uses the
/// m×m covariance when m ≤ N and the N×N Gram matrix otherwise.
pub fn pca(data: &Dataset, q: usize) -> Result<PcaModel> {
    let n = data.len();
    let m = data.dim();
    if n < 2 {
        return Err(Error::InvalidInput("PCA needs at least two points".into()));
    }
    if q == 0 || q > n.min(m) {
        return Err(Error::InvalidInput(format!(
            "component count {q} outside [1, {}]",
            n.min(m)
        )));
    }
    let mean = data.weighted_mean();
    let w = data.normalized_weights();
    let centered: Vec<Vec<f64>> = data
        .points()
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    let total_variance: f64 = centered
        .iter()
        .zip(&w)
        .map(|(c, wi)| wi * dot(c, c))
        .sum();
    if total_variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let (eigenvalues, mut components) = if m <= n {
        covariance_route(&centered, &w, m, q)
    } else {
        gram_route(&centered, &w, m, q, total_variance)
    };
    for c in &mut components {
        fix_sign(c);
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        total_variance,
    })
}

fn covariance_route(centered: &[Vec<f64>], w: &[f64], m: usize, q: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut cov = DMatrix::<f64>::zeros(m, m);
    for (c, wi) in centered.iter().zip(w) {
        for a in 0..m {
            let ca = wi * c[a];
            if ca == 0.0 {
                continue;
            }
            for b in a..m {
                cov[(a, b)] += ca * c[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    let eig = SymmetricEigen::new(cov);
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut vals = Vec::with_capacity(q);
    let mut comps = Vec::with_capacity(q);
    for &k in order.iter().take(q) {
        vals.push(eig.eigenvalues[k].max(0.0));
        comps.push(eig.eigenvectors.column(k).iter().copied().collect());
    }
    (vals, comps)
}

fn gram_route(
    centered: &[Vec<f64>],
    w: &[f64],
    m: usize,
    q: usize,
    total_variance: f64,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = centered.len();
    let sw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let g = sw[i] * sw[j] * dot(&centered[i], &centered[j]);
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    let eig = SymmetricEigen::new(gram);
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut vals = Vec::with_capacity(q);
    let mut comps: Vec<Vec<f64>> = Vec::with_capacity(q);
    for &k in order.iter().take(q) {
        let lambda = eig.eigenvalues[k].max(0.0);
        vals.push(lambda);
        if lambda > EIGEN_FLOOR * total_variance {
            let mut v = vec![0.0; m];
            for i in 0..n {
                let s = sw[i] * eig.eigenvectors[(i, k)];
                crate::linalg::add_scaled(&mut v, &centered[i], s);
            }
            let nv = norm(&v);
            comps.push(v.into_iter().map(|x| x / nv).collect());
        } else {
            // null direction: any unit vector orthogonal to the rest spans it
            comps.push(orthonormal_completion(&comps, m));
        }
    }
    (vals, comps)
}

fn orthonormal_completion(basis: &[Vec<f64>], m: usize) -> Vec<f64> {
    for e in 0..m {
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let s = dot(&v, b);
                crate::linalg::add_scaled(&mut v, b, -s);
            }
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
    unreachable!("basis shorter than the ambient dimension always has a completion")
}

fn descending_order(vals: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    idx
}

/// Largest-magnitude entry made positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Row i holds the first `q` principal coordinates of point i.
pub fn project(model: &PcaModel, data: &Dataset, q: usize) -> Result<Vec<Vec<f64>>> {
    if q == 0 || q > model.components.len() {
        return Err(Error::InvalidInput(format!(
            "projection dimension {q} outside [1, {}]",
            model.components.len()
        )));
    }
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} features, model {}",
            data.dim(),
            model.dim()
        )));
    }
    Ok(data
        .points()
        .iter()
        .map(|p| model.project_point(p, q))
        .collect())
}

/// Maps principal coordinates back to the data space.
pub fn reconstruct(model: &PcaModel, coords: &[Vec<f64>]) -> Vec<Vec<f64>> {
    coords.iter().map(|c| model.reconstruct_point(c)).collect()
}

/// `1 − msd / total_variance`.
pub fn explained_variance_fraction(data: &Dataset, approximator_msd: f64) -> Result<f64> {
    let tv = data.total_variance();
    if tv <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((1.0 - approximator_msd / tv).min(1.0))
}
