use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::elastic_graph::{ElasticGraph, Embedding};
use crate::error::{Error, Result};
use crate::optimizer::nearest_vertex;

/// Step size h_k as a function of the global presentation counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StepSchedule {
    Constant(f64),
    /// Linear decay from `start` to `end` over the whole run.
    Linear { start: f64, end: f64 },
    /// Explicit values; the last one is repeated once exhausted.
    Explicit(Vec<f64>),
}

impl StepSchedule {
    fn at(&self, k: usize, total: usize) -> f64 {
        match self {
            StepSchedule::Constant(h) => *h,
            StepSchedule::Linear { start, end } => {
                let s = if total > 1 { k as f64 / (total - 1) as f64 } else { 0.0 };
                start + (end - start) * s
            }
            StepSchedule::Explicit(v) => v[k.min(v.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |h: f64| h.is_finite() && h >= 0.0;
        let valid = match self {
            StepSchedule::Constant(h) => ok(*h),
            StepSchedule::Linear { start, end } => ok(*start) && ok(*end),
            StepSchedule::Explicit(v) => !v.is_empty() && v.iter().all(|h| ok(*h)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidInput("step sizes must be finite and non-negative".into()))
        }
    }
}

/// Neighbourhood weight w(ρ) over grid hop distance, in [0, 1] and
/// non-increasing in ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CuttingFunction {
    /// Only the owner moves.
    Delta,
    /// exp(−ρ²/2σ²) with σ shrinking linearly from `sigma_start` to `sigma_end`.
    Gaussian { sigma_start: f64, sigma_end: f64 },
}

impl CuttingFunction {
    pub fn weight(&self, rho: usize, progress: f64) -> f64 {
        match self {
            CuttingFunction::Delta => {
                if rho == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            CuttingFunction::Gaussian { sigma_start, sigma_end } => {
                if rho == usize::MAX {
                    return 0.0;
                }
                let s = sigma_start + (sigma_end - sigma_start) * progress;
                let r = rho as f64;
                (-(r * r) / (2.0 * s * s)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SomConfig {
    /// Neuron topology; ρ is the hop distance in this graph.
    pub grid: ElasticGraph,
    pub steps: StepSchedule,
    pub cutting: CuttingFunction,
    pub epochs: usize,
    pub seed: u64,
}

/// Kohonen updates φ(y) += h_k · w(ρ(y, y_x)) · (x − φ(y)) over shuffled
/// passes through the data.
pub fn som_fit(data: &Dataset, cfg: &SomConfig, emb0: &Embedding) -> Result<Embedding> {
    cfg.steps.validate()?;
    if let CuttingFunction::Gaussian { sigma_start, sigma_end } = cfg.cutting {
        if !(sigma_start > 0.0 && sigma_end > 0.0) {
            return Err(Error::InvalidInput("Gaussian widths must be positive".into()));
        }
    }
    emb0.check_against(&cfg.grid)?;
    if emb0.dim() != data.dim() {
        return Err(Error::DimensionMismatch("embedding and data dimensions differ".into()));
    }
    let k = cfg.grid.vertex_count();
    let hops: Vec<Vec<usize>> = (0..k).map(|v| cfg.grid.hop_distances(v)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut emb = emb0.clone();
    let total = cfg.epochs * data.len();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut step = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = data.point(i);
            let (owner, _) = nearest_vertex(x, &emb);
            let h = cfg.steps.at(step, total);
            let progress = if total > 1 { step as f64 / (total - 1) as f64 } else { 0.0 };
            if h != 0.0 {
                for (y, pos) in emb.positions.iter_mut().enumerate() {
                    let w = cfg.cutting.weight(hops[owner][y], progress);
                    if w == 0.0 {
                        continue;
                    }
                    for (p, xi) in pos.iter_mut().zip(x) {
                        *p += h * w * (xi - *p);
                    }
                }
            }
            step += 1;
        }
    }
    Ok(emb)
}
