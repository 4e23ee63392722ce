/// Autonomous or time-dependent vector field x' = f(t, x).
pub trait OdeSystem: Send + Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, x: &[f64], dx: &mut [f64]);
    /// States are concentrations and are clipped at zero after each step.
    fn nonneg_clip(&self) -> bool {
        false
    }
}

/// x' = -rate·x in every coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDecay {
    pub dim: usize,
    pub rate: f64,
}

impl OdeSystem for LinearDecay {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        for (d, v) in dx.iter_mut().zip(x) {
            *d = -self.rate * v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanDerPol {
    pub mu: f64,
}

impl OdeSystem for VanDerPol {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = x[1];
        dx[1] = self.mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
    }
}

/// Van der Pol oscillator with a third coordinate relaxing quickly onto
/// the curved surface z = x².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanDerPol3 {
    pub mu: f64,
    pub gamma: f64,
}

impl Default for VanDerPol3 {
    fn default() -> Self {
        VanDerPol3 { mu: 1.0, gamma: 10.0 }
    }
}

impl OdeSystem for VanDerPol3 {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = x[1];
        dx[1] = self.mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
        dx[2] = -self.gamma * (x[2] - x[0] * x[0]);
    }
}

/// Brusselator: x' = a − (b+1)x + x²y, y' = bx − x²y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brusselator {
    pub a: f64,
    pub b: f64,
}

impl OdeSystem for Brusselator {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, x: &[f64], dx: &mut [f64]) {
        let q = x[0] * x[0] * x[1];
        dx[0] = self.a - (self.b + 1.0) * x[0] + q;
        dx[1] = self.b * x[0] - q;
    }

    fn nonneg_clip(&self) -> bool {
        true
    }
}

pub fn system_names() -> &'static [&'static str] {
    &["brusselator", "vdp", "vdp3"]
}

/// Bundled systems with their default parameters.
pub fn system_by_name(name: &str) -> Option<Box<dyn OdeSystem>> {
    match name {
        "vdp" => Some(Box::new(VanDerPol { mu: 1.0 })),
        "vdp3" => Some(Box::new(VanDerPol3::default())),
        "brusselator" => Some(Box::new(Brusselator { a: 1.0, b: 3.0 })),
        _ => None,
    }
}
