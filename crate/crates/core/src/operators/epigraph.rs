use nalgebra::DVector;

use super::ProxFunction;
use crate::error::{Error, Result};

/// Tuning for [`epigraph_project`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpigraphOptions {
    /// Gradient-ascent step on the scalar multiplier, in (0, 1).
    pub backtrack_step: f64,
    /// Target for `|f(x') - t'|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EpigraphOptions {
    fn default() -> Self {
        Self { backtrack_step: 0.5, tol: 1e-10, max_iter: 10_000 }
    }
}

impl EpigraphOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.backtrack_step > 0.0 && self.backtrack_step < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "backtrack_step must lie in (0, 1), got {}",
                self.backtrack_step
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// `(f~^tau(x) - t) tau - tau^2 / 2`, the concave function whose maximizer
/// is the multiplier of the epigraph projection.
pub fn backtracking_objective(f: &dyn ProxFunction, x: &DVector<f64>, t: f64, tau: f64) -> f64 {
    (f.moreau_envelope(x, tau) - t) * tau - 0.5 * tau * tau
}

/// Euclidean projection of `(x, t)` onto `{(y, s) : f(y) <= s}`.
///
/// Ascends the backtracking objective, whose derivative is
/// `f(prox_tau(x)) - t - tau`. The derivative is decreasing, so a bracket on
/// the root is kept; a step that leaves the bracket or fails to halve the
/// residual is replaced by bisection.
pub fn epigraph_project(
    f: &dyn ProxFunction,
    x: &DVector<f64>,
    t: f64,
    opts: &EpigraphOptions,
) -> Result<(DVector<f64>, f64)> {
    opts.validate()?;
    let fx = f.value(x);
    if t >= fx {
        return Ok((x.clone(), t));
    }
    // x - prox_1(x) is a subgradient at prox_1(x)
    let slope = (x - f.prox(x, 1.0)).norm();
    let mut tau = if slope.is_finite() { (fx - t) / (1.0 + slope) } else { 1.0 };
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let p = f.prox(x, tau);
        let g = f.value(&p) - t - tau;
        let progressed = g.abs() <= 0.5 * residual;
        residual = g.abs();
        if residual <= opts.tol {
            return Ok((p, t + tau));
        }
        if g > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        if hi.is_finite() && hi - lo <= f64::EPSILON * hi.max(1.0) {
            return Ok((p, t + tau));
        }
        let next = tau + opts.backtrack_step * g;
        let inside = next > lo && next < hi;
        tau = if inside && (progressed || !hi.is_finite()) { next } else { 0.5 * (lo + hi) };
    }
    Err(Error::NonConvergence { what: "epigraph projection", iterations: opts.max_iter, residual })
}
