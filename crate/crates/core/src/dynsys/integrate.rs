use crate::error::{Error, Result};

use super::OdeSystem;

/// Recorded states of one integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

fn rk4_step(sys: &dyn OdeSystem, t: f64, x: &mut [f64], h: f64, k: &mut [Vec<f64>; 5]) {
    let m = x.len();
    let [k1, k2, k3, k4, tmp] = k;
    sys.rhs(t, x, k1);
    for i in 0..m {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, tmp, k2);
    for i in 0..m {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, tmp, k3);
    for i in 0..m {
        tmp[i] = x[i] + h * k3[i];
    }
    sys.rhs(t + h, tmp, k4);
    for i in 0..m {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if sys.nonneg_clip() {
        for v in x.iter_mut() {
            *v = v.max(0.0);
        }
    }
}

/// Fixed-step classical Runge-Kutta over `t_span`. The step is `dt`
/// shrunk so that it divides the span; states are recorded at the start
/// and then every `dt_record` (every step when `None`) and at the end.
pub fn integrate(sys: &dyn OdeSystem, x0: &[f64], t_span: (f64, f64), dt: f64, dt_record: Option<f64>) -> Result<Trajectory> {
    let (t0, t1) = t_span;
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} coordinates, system has {}",
            x0.len(),
            sys.dim()
        )));
    }
    if !(dt > 0.0) || !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput("need dt > 0 and a finite span with t1 >= t0".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    let span = t1 - t0;
    let steps = if span == 0.0 { 0 } else { (span / dt - 1e-9).ceil().max(1.0) as usize };
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };
    let stride = match dt_record {
        Some(r) if r > 0.0 && h > 0.0 => ((r / h).round() as usize).max(1),
        _ => 1,
    };
    let mut x = x0.to_vec();
    let mut k: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; x.len()]);
    let mut out = Trajectory {
        times: vec![t0],
        states: vec![x.clone()],
    };
    for s in 1..=steps {
        let t = t0 + (s - 1) as f64 * h;
        rk4_step(sys, t, &mut x, h, &mut k);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { time: t + h });
        }
        if s % stride == 0 || s == steps {
            out.times.push(t0 + s as f64 * h);
            out.states.push(x.clone());
        }
    }
    Ok(out)
}
