//! Projection quality: MSE fraction, distance correlation over all pairs
//! or Natural-PCA pairs, neighbourhood preservation, group compactness,
//! and random-neighbourhood baselines.

mod neighbors;
mod report;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, PcaModel};
use crate::elastic_graph::Embedding;
use crate::error::{Error, Result};
use crate::linalg::{dist, sq_dist};
use crate::optimizer::{project_piecewise_linear, Partition};

pub use neighbors::{knn, knn_table};
pub use report::{score_projection, write_comparison_table, Baseline, QualityReport, RandomBaselines, ScoreConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionKind {
    NearestVertex,
    PiecewiseLinear,
    Linear,
}

/// Original points together with their images, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionPair {
    pub original: Dataset,
    pub projected: Vec<Vec<f64>>,
    pub kind: ProjectionKind,
    /// Squared distance from each original point to the manifold, when known.
    pub sq_distances: Option<Vec<f64>>,
}

impl ProjectionPair {
    pub fn new(original: Dataset, projected: Vec<Vec<f64>>, kind: ProjectionKind, sq_distances: Option<Vec<f64>>) -> Result<Self> {
        if projected.len() != original.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} original points but {} projected",
                original.len(),
                projected.len()
            )));
        }
        if let Some(q) = projected.first().map(Vec::len) {
            if q == 0 || projected.iter().any(|p| p.len() != q) {
                return Err(Error::DimensionMismatch("projected points have inconsistent length".into()));
            }
        }
        if projected.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("projected coordinates".into()));
        }
        if let Some(d) = &sq_distances {
            if d.len() != original.len() || d.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidInput("squared distances must be finite, non-negative, one per point".into()));
            }
        }
        Ok(ProjectionPair {
            original,
            projected,
            kind,
            sq_distances,
        })
    }

    /// Projection onto the first `q` principal components, in PC coordinates.
    pub fn linear(data: &Dataset, model: &PcaModel, q: usize) -> Result<Self> {
        if q == 0 || q > model.components.len() {
            return Err(Error::InvalidInput(format!("q = {q} out of range")));
        }
        let mut projected = Vec::with_capacity(data.len());
        let mut sq = Vec::with_capacity(data.len());
        for x in data.points() {
            let c = model.project_point(x, q);
            let r = model.reconstruct_point(&c);
            sq.push(sq_dist(x, &r));
            projected.push(c);
        }
        ProjectionPair::new(data.clone(), projected, ProjectionKind::Linear, Some(sq))
    }

    /// Each point replaced by the coordinates of its owning vertex, taken
    /// from `coords` (the embedding itself or internal coordinates).
    pub fn nearest_vertex(data: &Dataset, emb: &Embedding, part: &Partition, coords: &[Vec<f64>]) -> Result<Self> {
        if coords.len() != emb.len() {
            return Err(Error::DimensionMismatch("one coordinate row per vertex required".into()));
        }
        let projected = part.owner.iter().map(|&v| coords[v].clone()).collect();
        let sq = data
            .points()
            .iter()
            .zip(&part.owner)
            .map(|(x, &v)| sq_dist(x, emb.position(v)))
            .collect();
        ProjectionPair::new(data.clone(), projected, ProjectionKind::NearestVertex, Some(sq))
    }

    /// Nearest points on the union of edge segments, in the ambient space.
    pub fn piecewise_linear(data: &Dataset, graph: &crate::elastic_graph::ElasticGraph, emb: &Embedding) -> Result<Self> {
        let proj = project_piecewise_linear(data, graph, emb)?;
        let sq = proj.iter().map(|p| p.sq_dist).collect();
        let projected = proj.into_iter().map(|p| p.point).collect();
        ProjectionPair::new(data.clone(), projected, ProjectionKind::PiecewiseLinear, Some(sq))
    }

    pub fn len(&self) -> usize {
        self.projected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projected.is_empty()
    }
}

/// Weighted mean squared distance to the manifold over total variance.
pub fn mse_fraction(data: &Dataset, sq_distances: &[f64]) -> Result<f64> {
    if sq_distances.len() != data.len() {
        return Err(Error::DimensionMismatch("one squared distance per point required".into()));
    }
    let tv = data.total_variance();
    if !(tv > 0.0) {
        return Err(Error::ZeroVariance);
    }
    let w = data.total_weight();
    let m: f64 = sq_distances.iter().zip(data.weights()).map(|(d, wi)| d * wi).sum::<f64>() / w;
    Ok(m / tv)
}

/// Natural-PCA components: ordered `(i_n, j_n)` index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NpcaComponents {
    pub pairs: Vec<(usize, usize)>,
}

/// Greedy Natural-PCA pair selection. The first pair is the diameter;
/// every later `i_n` is the point farthest from the selected set and
/// `j_n` its closest member. Ties go to lower indices.
pub fn natural_pca_pairs(points: &[Vec<f64>], n_components: usize) -> Result<NpcaComponents> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidInput("natural PCA needs at least two points".into()));
    }
    if n_components == 0 || n_components > n - 1 {
        return Err(Error::InvalidInput(format!(
            "{n_components} components requested from {n} points"
        )));
    }
    let (mut a, mut b, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..n {
        for j in i + 1..n {
            let d = sq_dist(&points[i], &points[j]);
            if d > best {
                (a, b, best) = (i, j, d);
            }
        }
    }
    let mut pairs = vec![(a, b)];
    let mut in_set = vec![false; n];
    in_set[a] = true;
    in_set[b] = true;
    // distance to the set and the member realising it
    let mut near: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let (da, db) = (sq_dist(&points[i], &points[a]), sq_dist(&points[i], &points[b]));
            if db < da || (db == da && b < a) {
                (db, b)
            } else {
                (da, a)
            }
        })
        .collect();
    while pairs.len() < n_components {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if !in_set[i] && pick.is_none_or(|p| near[i].0 > near[p].0) {
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        pairs.push((i, near[i].1));
        in_set[i] = true;
        for (x, nx) in near.iter_mut().enumerate() {
            let d = sq_dist(&points[x], &points[i]);
            if d < nx.0 || (d == nx.0 && i < nx.1) {
                *nx = (d, i);
            }
        }
    }
    Ok(NpcaComponents { pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelection {
    AllPairs,
    Npca(usize),
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if !(saa > 0.0 && sbb > 0.0) {
        return Err(Error::Degenerate("correlation of a constant vector".into()));
    }
    // rounding can push |r| just past 1
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(a: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..a.len()).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]));
    let mut ranks = vec![0.0; a.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s + 1;
        while e < idx.len() && a[idx[e]] == a[idx[s]] {
            e += 1;
        }
        let r = (s + e + 1) as f64 / 2.0;
        for &i in &idx[s..e] {
            ranks[i] = r;
        }
        s = e;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Pearson and Spearman correlation between original and projected
/// distances over the selected pairs.
pub fn qdm(pair: &ProjectionPair, selection: PairSelection) -> Result<(f64, f64)> {
    let x = pair.original.points();
    let y = &pair.projected;
    let pairs: Vec<(usize, usize)> = match selection {
        PairSelection::AllPairs => (0..x.len()).flat_map(|i| (i + 1..x.len()).map(move |j| (i, j))).collect(),
        PairSelection::Npca(n) => natural_pca_pairs(x, n)?.pairs,
    };
    if pairs.len() < 2 {
        return Err(Error::InvalidInput("at least two distance pairs are required".into()));
    }
    let d: Vec<f64> = pairs.iter().map(|&(i, j)| dist(&x[i], &x[j])).collect();
    let dh: Vec<f64> = pairs.iter().map(|&(i, j)| dist(&y[i], &y[j])).collect();
    Ok((pearson(&d, &dh)?, spearman(&d, &dh)?))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={}", n.saturating_sub(1))));
    }
    Ok(())
}

/// Mean overlap of the k-neighbourhoods before and after projection, over k.
pub fn qnp(pair: &ProjectionPair, k: usize) -> Result<f64> {
    let n = pair.len();
    check_k(k, n)?;
    let before = knn_table(pair.original.points(), k);
    let after = knn_table(&pair.projected, k);
    Ok(overlap_mean(&before, &after, k))
}

fn overlap_mean(before: &[Vec<usize>], after: &[Vec<usize>], k: usize) -> f64 {
    let total: usize = before
        .iter()
        .zip(after)
        .map(|(s, t)| {
            let s: BTreeSet<usize> = s.iter().copied().collect();
            t.iter().filter(|j| s.contains(j)).count()
        })
        .sum();
    total as f64 / (k as f64 * before.len() as f64)
}

/// Per label, the mean fraction of each member's k nearest neighbours
/// in `points` sharing its label.
pub fn qgc(points: &[Vec<f64>], labels: &[String], k: usize) -> Result<BTreeMap<String, f64>> {
    if labels.len() != points.len() {
        return Err(Error::InvalidInput("one label per point required".into()));
    }
    check_k(k, points.len())?;
    let table = knn_table(points, k);
    Ok(group_fractions(labels, &table, k))
}

fn group_fractions(labels: &[String], table: &[Vec<usize>], k: usize) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (i, nb) in table.iter().enumerate() {
        let same = nb.iter().filter(|&&j| labels[j] == labels[i]).count();
        let e = acc.entry(labels[i].clone()).or_insert((0, 0));
        e.0 += same;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(l, (same, count))| (l, same as f64 / (k as f64 * count as f64)))
        .collect()
}

/// k distinct indices drawn uniformly from `0..n` without `i`.
fn random_neighbourhood(rng: &mut ChaCha8Rng, n: usize, i: usize, k: usize) -> Vec<usize> {
    sample(rng, n - 1, k).into_iter().map(|j| if j >= i { j + 1 } else { j }).collect()
}

fn summarize(values: &[f64]) -> Baseline {
    let t = values.len() as f64;
    let mean = values.iter().sum::<f64>() / t;
    let std_error = if values.len() > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1.0);
        (var / t).sqrt()
    } else {
        0.0
    };
    Baseline { mean, std_error }
}

/// QNP with the projected neighbourhood replaced by k random points.
pub fn random_qnp_baseline(points: &[Vec<f64>], k: usize, trials: usize, seed: u64) -> Result<Baseline> {
    let n = points.len();
    check_k(k, n)?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let before = knn_table(points, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..trials)
        .map(|_| {
            let after: Vec<Vec<usize>> = (0..n).map(|i| random_neighbourhood(&mut rng, n, i, k)).collect();
            overlap_mean(&before, &after, k)
        })
        .collect();
    Ok(summarize(&values))
}

/// Per-label QGC with random k-neighbourhoods.
pub fn random_qgc_baseline(labels: &[String], k: usize, trials: usize, seed: u64) -> Result<BTreeMap<String, Baseline>> {
    let n = labels.len();
    check_k(k, n)?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for _ in 0..trials {
        let table: Vec<Vec<usize>> = (0..n).map(|i| random_neighbourhood(&mut rng, n, i, k)).collect();
        for (l, v) in group_fractions(labels, &table, k) {
            per.entry(l).or_default().push(v);
        }
    }
    Ok(per.into_iter().map(|(l, v)| (l, summarize(&v))).collect())
}
