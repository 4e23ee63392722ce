//! Seeded synthetic datasets used by the demos and the test-suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(format!("noise level: {e}")))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput("at least two points are required".into()));
    }
    Ok(())
}

/// Noisy parabola y = x² over x in [-1, 1].
pub fn parabola(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = normal(noise)?;
    let pts = (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(-1.0..=1.0);
            vec![x + eps.sample(&mut rng), x * x + eps.sample(&mut rng)]
        })
        .collect();
    Dataset::new(pts)
}

/// Two curved arms in R^4 that meet at a junction, labelled `a` and `b`.
pub fn country_like(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = normal(noise)?;
    let mut pts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let t: f64 = rng.random_range(0.0..=1.0);
        let bump = (std::f64::consts::PI * t).sin();
        let p = if i % 2 == 0 {
            [-2.0 * t, 2.5 * t * t, 0.3 * bump, 0.0]
        } else {
            [2.2 * t, 2.2 * t * t, 0.0, 0.3 * bump]
        };
        pts.push(p.iter().map(|v| v + eps.sample(&mut rng)).collect());
        labels.push(if i % 2 == 0 { "a" } else { "b" }.to_string());
    }
    Dataset::new(pts)?.with_labels(labels)
}

/// Three straight arms of lengths 1.2, 1.0 and 0.8 leaving the origin of
/// the plane at 120° to each other, labelled `arm0`..`arm2`, with
/// Gaussian noise in a third coordinate as well. Density along an arm
/// grows linearly with the distance from the junction.
pub fn y_branches(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = normal(noise)?;
    let lengths = [1.2, 1.0, 0.8];
    let mut pts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let arm = rng.random_range(0..3usize);
        let angle = std::f64::consts::FRAC_PI_2 + arm as f64 * 2.0 * std::f64::consts::PI / 3.0;
        let r = lengths[arm] * rng.random_range(0.0..=1.0f64).sqrt();
        pts.push(vec![
            r * angle.cos() + eps.sample(&mut rng),
            r * angle.sin() + eps.sample(&mut rng),
            eps.sample(&mut rng),
        ]);
        labels.push(format!("arm{arm}"));
    }
    Dataset::new(pts)?.with_labels(labels)
}

/// S-shaped sheet (sin t, y, ±(cos t − 1)) for t in [-π, π], y in [0, 6],
/// rotated into R^`dim` by a random orthonormal frame and perturbed by
/// isotropic noise.
pub fn s_curve(n: usize, dim: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_n(n)?;
    if dim < 3 {
        return Err(Error::InvalidInput("the S-curve needs at least three dimensions".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = normal(noise)?;
    let frame = random_frame(&mut rng, dim, 3);
    let pts = (0..n)
        .map(|_| {
            let t: f64 = rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI);
            let y: f64 = rng.random_range(0.0..=6.0);
            let local = [t.sin(), y, t.signum() * (t.cos() - 1.0)];
            (0..dim)
                .map(|d| (0..3).map(|a| frame[a][d] * local[a]).sum::<f64>() + eps.sample(&mut rng))
                .collect()
        })
        .collect();
    Dataset::new(pts)
}

/// `k` orthonormal vectors of length `dim` by Gram-Schmidt on Gaussian draws.
fn random_frame(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Vec<Vec<f64>> {
    let g = Normal::new(0.0, 1.0).expect("unit normal");
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(k);
    while frame.len() < k {
        let mut v: Vec<f64> = (0..dim).map(|_| g.sample(rng)).collect();
        for f in &frame {
            let p = crate::linalg::dot(&v, f);
            crate::linalg::add_scaled(&mut v, f, -p);
        }
        let n = crate::linalg::norm(&v);
        if n > 1e-6 {
            frame.push(v.iter().map(|x| x / n).collect());
        }
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generators_repeat() {
        assert_eq!(parabola(20, 0.05, 3).unwrap(), parabola(20, 0.05, 3).unwrap());
        assert_eq!(s_curve(20, 10, 0.05, 3).unwrap(), s_curve(20, 10, 0.05, 3).unwrap());
        assert_ne!(y_branches(20, 0.05, 3).unwrap(), y_branches(20, 0.05, 4).unwrap());
    }

    #[test]
    fn shapes() {
        let c = country_like(200, 0.05, 1).unwrap();
        assert_eq!((c.len(), c.dim()), (200, 4));
        assert_eq!(c.label_set(), vec!["a", "b"]);
        let y = y_branches(300, 0.05, 1).unwrap();
        assert_eq!(y.label_set().len(), 3);
        assert_eq!(s_curve(500, 10, 0.05, 1).unwrap().dim(), 10);
    }

    #[test]
    fn frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_frame(&mut rng, 10, 3);
        for a in 0..3 {
            for b in 0..3 {
                let d = crate::linalg::dot(&f[a], &f[b]);
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
