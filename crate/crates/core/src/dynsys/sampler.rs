use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{integrate, OdeSystem};
use crate::dataset::{pca, Dataset};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sq_dist, sub};

/// One period of an attracting cycle, sampled uniformly in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub period: f64,
    /// States from the anchor over one period, `dt` apart.
    pub points: Vec<Vec<f64>>,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSearch {
    pub settle_time: f64,
    /// Return distance that counts as closing the orbit.
    pub tol: f64,
    pub dt: f64,
    /// Give up after integrating this long past the settle time.
    pub max_time: f64,
}

impl Default for CycleSearch {
    fn default() -> Self {
        CycleSearch {
            settle_time: 100.0,
            tol: 1e-4,
            dt: 1e-3,
            max_time: 500.0,
        }
    }
}

fn rhs_at(sys: &dyn OdeSystem, x: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; x.len()];
    sys.rhs(0.0, x, &mut f);
    f
}

/// Settles onto the attractor, then measures the first return to the
/// section through the anchor state normal to the flow there. The anchor
/// is moved to each return until one closes within `tol`.
pub fn find_limit_cycle(sys: &dyn OdeSystem, x0: &[f64], search: &CycleSearch) -> Result<LimitCycle> {
    if !(search.tol > 0.0 && search.dt > 0.0 && search.settle_time >= 0.0 && search.max_time > 0.0) {
        return Err(Error::InvalidInput("cycle search parameters must be positive".into()));
    }
    let settled = integrate(sys, x0, (0.0, search.settle_time), search.dt, Some(search.settle_time.max(search.dt)))?;
    let mut anchor = settled.last().to_vec();
    let h = search.dt;
    let mut elapsed = 0.0;
    while elapsed < search.max_time {
        let normal = rhs_at(sys, &anchor);
        let speed = norm(&normal);
        if speed < 1e-9 {
            return Err(Error::CycleNotFound("trajectory settles on an equilibrium".into()));
        }
        let side = |x: &[f64]| dot(&sub(x, &anchor), &normal);
        // step until the orbit leaves the anchor, then wait for an upward crossing
        let mut x = anchor.clone();
        let mut t = 0.0;
        let mut left = false;
        let mut found = None;
        while elapsed + t < search.max_time {
            let step = integrate(sys, &x, (0.0, h), h, None)?;
            let y = step.last().to_vec();
            if !left && sq_dist(&y, &anchor).sqrt() > 10.0 * search.tol {
                left = true;
            }
            let (s0, s1) = (side(&x), side(&y));
            if left && s0 < 0.0 && s1 >= 0.0 {
                let frac = s0 / (s0 - s1);
                let hit: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + frac * (b - a)).collect();
                found = Some((t + frac * h, hit));
                t += h;
                break;
            }
            x = y;
            t += h;
        }
        elapsed += t;
        let Some((period, hit)) = found else { break };
        let gap = sq_dist(&hit, &anchor).sqrt();
        debug!("section return after {period:.6}, gap {gap:.3e}");
        if gap <= search.tol {
            let n = (period / h).round().max(1.0) as usize;
            let dt = period / n as f64;
            let orbit = integrate(sys, &anchor, (0.0, period), dt, None)?;
            let mut points = orbit.states;
            points.pop();
            return Ok(LimitCycle { period, points, dt });
        }
        anchor = hit;
    }
    Err(Error::CycleNotFound(format!(
        "no return within {} of the section after {} time units",
        search.tol, search.max_time
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Length of each trajectory.
    pub t_m: f64,
    /// Fraction of each trajectory discarded as transient.
    pub alpha: f64,
    /// Largest shift away from the cycle.
    pub delta_max: f64,
    pub n_samples: usize,
    pub dt: f64,
    pub dt_record: f64,
    /// Dimension of the linear manifold of the cycle; `None` keeps 99.9%
    /// of the cycle variance.
    pub manifold_dim: Option<usize>,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            t_m: 15.0,
            alpha: 0.3,
            delta_max: 1.0,
            n_samples: 5000,
            dt: 0.01,
            dt_record: 0.05,
            manifold_dim: None,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput("alpha must lie in (0, 1)".into()));
        }
        if !(self.delta_max > 0.0) {
            return Err(Error::InvalidInput("delta_max must be positive".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be positive".into()));
        }
        if !(self.t_m > 0.0 && self.dt > 0.0 && self.dt_record > 0.0) {
            return Err(Error::InvalidInput("t_m, dt and dt_record must be positive".into()));
        }
        if (1.0 - self.alpha) * self.t_m < self.dt_record {
            return Err(Error::InvalidInput("the kept tail is shorter than the recording interval".into()));
        }
        Ok(())
    }
}

/// Largest s such that x + s·d stays in the non-negative orthant.
fn boundary_distance(x: &[f64], d: &[f64]) -> f64 {
    x.iter()
        .zip(d)
        .filter(|(_, di)| **di < 0.0)
        .map(|(xi, di)| xi / -di)
        .fold(f64::INFINITY, f64::min)
}

/// Trajectories started from random cycle points shifted inside the
/// cycle's principal linear manifold; only the tail after α·t_m is kept.
pub fn sample_invariant(sys: &dyn OdeSystem, cycle: &LimitCycle, cfg: &SamplerConfig) -> Result<Dataset> {
    cfg.validate()?;
    if cycle.points.len() < 3 {
        return Err(Error::InvalidInput("cycle needs at least three points".into()));
    }
    let cyc = Dataset::new(cycle.points.clone())?;
    let m = cyc.dim();
    let model = pca(&cyc, m.min(cyc.len() - 1))?;
    let r = match cfg.manifold_dim {
        Some(r) if r >= 1 && r <= model.components.len() => r,
        Some(r) => return Err(Error::InvalidInput(format!("manifold dimension {r} out of range"))),
        None => {
            let mut acc = 0.0;
            let mut r = model.components.len();
            for (i, l) in model.eigenvalues.iter().enumerate() {
                acc += l;
                if acc >= 0.999 * model.total_variance {
                    r = i + 1;
                    break;
                }
            }
            r
        }
    };
    debug!("cycle manifold dimension {r}");
    let clip = sys.nonneg_clip();
    let t_keep = cfg.alpha * cfg.t_m;
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(cfg.n_samples);
    let (mut attempts, mut discarded) = (0u64, 0u64);
    while samples.len() < cfg.n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(attempts);
        attempts += 1;
        let start = &cycle.points[rng.random_range(0..cycle.points.len())];
        let g: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
        let gn = norm(&g);
        let mut dir = vec![0.0; m];
        for (a, ga) in g.iter().enumerate() {
            for (d, c) in dir.iter_mut().zip(&model.components[a]) {
                *d += ga / gn * c;
            }
        }
        let mut mag = cfg.delta_max * (1.0 - rng.random::<f64>());
        if clip {
            mag = mag.min(boundary_distance(start, &dir));
        }
        let x0: Vec<f64> = start.iter().zip(&dir).map(|(s, d)| s + mag * d).collect();
        match integrate(sys, &x0, (0.0, cfg.t_m), cfg.dt, Some(cfg.dt_record)) {
            Ok(tr) => {
                for (t, s) in tr.times.iter().zip(tr.states) {
                    if *t >= t_keep - 1e-9 && samples.len() < cfg.n_samples {
                        samples.push(s);
                    }
                }
            }
            Err(Error::BlowUp { time }) => {
                discarded += 1;
                warn!("trajectory {} blew up at t = {time}", attempts - 1);
            }
            Err(e) => return Err(e),
        }
        if attempts >= 4 && 2 * discarded > attempts {
            return Err(Error::NoConvergence(format!(
                "{discarded} of {attempts} trajectories blew up"
            )));
        }
    }
    debug!("{} samples from {attempts} trajectories ({discarded} discarded)", samples.len());
    Dataset::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{LinearDecay, VanDerPol};

    #[test]
    fn van_der_pol_period() {
        let c = find_limit_cycle(&VanDerPol { mu: 1.0 }, &[0.5, 0.0], &CycleSearch::default()).unwrap();
        assert!((c.period - 6.6633).abs() / 6.6633 < 0.02, "{}", c.period);
    }

    #[test]
    fn equilibrium_has_no_cycle() {
        let r = find_limit_cycle(&LinearDecay { dim: 2, rate: 1.0 }, &[1.0, 1.0], &CycleSearch::default());
        assert!(matches!(r, Err(Error::CycleNotFound(_))));
    }

    #[test]
    fn boundary_truncation() {
        assert_eq!(boundary_distance(&[1.0, 2.0], &[-0.5, 1.0]), 2.0);
        assert_eq!(boundary_distance(&[1.0, 2.0], &[0.5, 1.0]), f64::INFINITY);
    }
}
