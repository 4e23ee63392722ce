//! Elastic principal curves, elastic maps and principal trees.
//!
//! A dataset is approximated by an embedded elastic graph whose vertex
//! positions minimise the mean squared distance to the data plus an edge
//! stretching and star bending energy. The crate also scores linear and
//! non-linear projections, lays principal trees out as metro maps and
//! samples trajectories of dynamical systems to approximate invariant
//! manifolds.

pub mod dataset;
pub mod dynsys;
pub mod elastic_graph;
pub mod error;
pub mod grammars;
pub mod layout;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod synthetic;

pub use dataset::{Dataset, PcaModel};
pub use elastic_graph::{ElasticGraph, Embedding, Moduli};
pub use error::{Error, Result};
