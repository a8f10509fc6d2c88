#![no_std]
#![warn(missing_docs)]

//! Planted-structure inference toolkit.
//!
//! Generators for planted clique, dense subgraph, block model, biclustering,
//! rank-one submatrix, spiked Wigner and sparse PCA instances; the rejection
//! kernels, lifting, cloning and rotation maps that carry one problem onto
//! another; and the detection and recovery procedures used to score them.
//!
//! Every randomized entry point takes an explicit generator so results are a
//! pure function of `(inputs, stream)`. See [`rng::RandomStream`] for the
//! splittable seeding contract.
//!
//! Indices are 0-based throughout. A vertex `i` in a graph on `m` vertices is
//! reflected to `m - 1 - i`.

extern crate alloc;

pub mod cloning;
pub mod error;
pub mod graph;
pub mod instances;
pub mod lifting;
pub mod linalg;
pub mod matrix;
pub mod params;
pub mod reductions;
pub mod rejection;
pub mod rng;
pub mod solvers;
pub mod special;
pub mod support;

pub use error::{Error, Result};
pub use graph::Graph;
pub use matrix::RealMatrix;
pub use params::{Hypothesis, Problem, ProblemParams, Rule, Verdict};
pub use rng::{split_stream, RandomStream, StreamRng};
pub use support::Support;
