//! Fitting graph embeddings to data: the alternating nearest-vertex /
//! quadratic-solve scheme, initialisations, piecewise-linear projection and
//! the self-organising map baseline.

mod fit;
mod init;
mod partition;
mod projection;
mod som;
pub mod solver;

pub use fit::{fit, functional, FitConfig, FitResult, TraceRow};
pub use init::{init_chain_on_pc_segment, init_grid_on_plane, init_on_pc_segment};
pub use partition::{msd, nearest_vertex, partition, Partition};
pub use projection::{project_on_segment, project_piecewise_linear, project_point_piecewise_linear, SegmentProjection};
pub use solver::{solve_embedding, solve_embedding_with, LinearSolver};
pub use som::{som_fit, CuttingFunction, SomConfig, StepSchedule};
