//! Trajectory sampling around an attracting limit cycle and a 2-D elastic
//! map fitted to the sampled tails as an approximate invariant manifold.

mod integrate;
mod manifold;
mod sampler;
mod systems;

pub use integrate::{integrate, Trajectory};
pub use manifold::{fit_invariant_manifold, trajectory_distance_profile, ManifoldFit};
pub use sampler::{find_limit_cycle, sample_invariant, CycleSearch, LimitCycle, SamplerConfig};
pub use systems::{system_by_name, system_names, Brusselator, LinearDecay, OdeSystem, VanDerPol, VanDerPol3};
