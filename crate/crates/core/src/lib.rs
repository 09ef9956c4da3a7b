//! Decentralized constrained convex optimization over static directed graphs.
//!
//! The crate is organised around the DAGP iteration (double averaging and
//! gradient projection):
//!
//! - [`graph`]: directed communication graphs and the `(W, Q)` gossip pair.
//! - [`operators`]: Euclidean projections, proximal operators and epigraph
//!   projection by proximal backtracking.
//! - [`problems`]: per-node objective/constraint pairs for the log-cosh,
//!   logistic-regression and optimal-transport families.
//! - [`solvers`]: DAGP plus the DDPS, Push-Pull, ADD-OPT, centralized and
//!   Sinkhorn baselines, all emitting a common [`solvers::SolverTrace`].
//! - [`analysis`]: the spectral feasibility analyzer for the step-size
//!   conditions of the aggregate lower-bounding argument.
//! - [`harness`]: experiment presets, config parsing and CSV output.

// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod graph;
pub mod harness;
pub(crate) mod linalg;
pub mod operators;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
