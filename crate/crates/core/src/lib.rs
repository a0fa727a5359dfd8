//! Sorting-based embeddings of point clouds modulo permutation, with tools to
//! audit their bi-Lipschitz behaviour and to decide injectivity exactly for
//! small cases.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, parallel runners
//! and the command line live in the `permorb` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audit;
pub mod cloud;
pub mod constructions;
pub mod embeddings;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod perm;
pub mod rng;
pub mod separation;
pub mod tables;

pub use cloud::PointCloud;
pub use embeddings::{
    beta, beta_sketch, delta, DirectionSet, RowProjector, SketchOperator, SortedEmbedding,
};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use metrics::{orbit_distance, wasserstein2};
pub use perm::Permutation;
pub use rng::RngSeed;
