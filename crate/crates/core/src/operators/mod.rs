//! Projection and proximal operators.
//!
//! [`ConstraintSet`] covers the sets used by the experiment families;
//! [`ProxFunction`] implementations feed [`epigraph_project`], which reduces
//! projection onto `epi f` to a proximal evaluation plus a scalar search for
//! the multiplier `tau`.

mod epigraph;
mod prox;
mod sets;

pub use epigraph::{backtracking_objective, epigraph_project, EpigraphOptions};
pub use prox::{
    prox_abs, prox_l2norm, prox_linear, prox_quadratic, AbsValue, L2Norm, LinearFunction,
    ProxFunction, QuadraticNorm,
};
pub use sets::{
    normal_cone_residual, project, project_intersection, project_simplex, ConstraintSet, SliceGroup, MEMBERSHIP_TOL,
};

use nalgebra::DVector;

/// A differentiable objective with an `L`-Lipschitz gradient.
pub trait SmoothFunction: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Lipschitz constant of the gradient (zero for affine functions).
    fn smoothness(&self) -> f64;
}
