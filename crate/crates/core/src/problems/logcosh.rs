use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DecentralizedProblem, LogCosh, NodeProblem};
use crate::error::{Error, Result};
use crate::linalg::seeded_rng;
use crate::operators::ConstraintSet;

/// `f^v(x) = log cosh(a_v^T x - b_v)` over `{x : c_v^T x <= d_v}`.
///
/// A feasible anchor `x_f` is drawn first and `d_v = c_v^T x_f + |u_v|`, so the
/// anchor lies strictly inside every halfspace.
pub fn build_logcosh_problem(nodes: usize, dim: usize, seed: u64) -> Result<DecentralizedProblem> {
    if nodes == 0 || dim == 0 {
        return Err(Error::InvalidParameter(format!("need M, m >= 1, got M={nodes}, m={dim}")));
    }
    let mut rng = seeded_rng(seed);
    let mut randn = |n: usize| DVector::<f64>::from_fn(n, |_, _| rng.sample(StandardNormal));
    let anchor = randn(dim);
    let mut out = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let a = randn(dim);
        let b = randn(1)[0];
        let c = randn(dim);
        let u = randn(1)[0];
        let d = c.dot(&anchor) + u.abs();
        out.push(NodeProblem::new(Arc::new(LogCosh { a, b }), ConstraintSet::halfspace(c, d))?);
    }
    DecentralizedProblem::new(out)
}
