use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problems::OtInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    /// Entropic regularization weight.
    pub epsilon: f64,
    /// Stop once both marginal residuals (max norm) are below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self { epsilon: 0.05, tol: 1e-9, max_iter: 100_000 }
    }
}

/// Entropy-regularized transport plan by alternating diagonal scaling of
/// `exp(-C / epsilon)`.
pub fn run_sinkhorn(instance: &OtInstance, opts: &SinkhornOptions) -> Result<DMatrix<f64>> {
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", opts.epsilon)));
    }
    let kernel = instance.cost.map(|c| (-c / opts.epsilon).exp());
    if let Some(v) = kernel.iter().find(|v| !v.is_normal()) {
        return Err(Error::NumericalUnderflow(format!(
            "kernel entry {v:e} for epsilon {}; increase epsilon",
            opts.epsilon
        )));
    }
    let (a, b) = (&instance.source, &instance.target);
    let mut v = DVector::from_element(b.len(), 1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let u = a.component_div(&(&kernel * &v));
        v = b.component_div(&(kernel.tr_mul(&u)));
        if u.iter().chain(v.iter()).any(|t| !t.is_finite()) {
            return Err(Error::NumericalUnderflow("scaling vectors overflowed".into()));
        }
        let plan = DMatrix::from_fn(a.len(), b.len(), |i, j| u[i] * kernel[(i, j)] * v[j]);
        residual = instance.plan_violation(&plan);
        if residual <= opts.tol {
            return Ok(plan);
        }
    }
    Err(Error::NonConvergence { what: "Sinkhorn scaling", iterations: opts.max_iter, residual })
}

/// Fraction of entries strictly below `threshold`.
pub fn sparsity(plan: &DMatrix<f64>, threshold: f64) -> f64 {
    if plan.is_empty() {
        return 1.0;
    }
    plan.iter().filter(|&&v| v < threshold).count() as f64 / plan.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> OtInstance {
        OtInstance::new(
            DVector::from_element(2, 0.5),
            DVector::from_element(2, 0.5),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn small_epsilon_approaches_lp_vertex() {
        let plan = run_sinkhorn(&two_by_two(), &SinkhornOptions { epsilon: 0.01, ..Default::default() }).unwrap();
        let diag = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert!((plan - diag).amax() < 1e-3);
    }

    #[test]
    fn large_epsilon_approaches_independent_coupling() {
        let inst = OtInstance::gaussian(4, (0.3, 0.2), (0.6, 0.1)).unwrap();
        let plan = run_sinkhorn(&inst, &SinkhornOptions { epsilon: 1e4, ..Default::default() }).unwrap();
        let outer = &inst.source * inst.target.transpose();
        assert!((&plan - outer).amax() < 1e-4);
        assert!(inst.plan_violation(&plan) <= 1e-9);
    }

    #[test]
    fn underflow_is_signalled() {
        let err = run_sinkhorn(&two_by_two(), &SinkhornOptions { epsilon: 1e-3, ..Default::default() });
        assert!(matches!(err, Err(Error::NumericalUnderflow(_))));
        assert!(run_sinkhorn(&two_by_two(), &SinkhornOptions { epsilon: 0.0, ..Default::default() }).is_err());
    }

    #[test]
    fn sparsity_examples() {
        assert_eq!(sparsity(&DMatrix::zeros(3, 3), 1e-5), 1.0);
        let diag = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert_eq!(sparsity(&diag, 1e-5), 0.5);
    }
}
