use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::nnls;
use crate::operators::{project_intersection, ConstraintSet};
use crate::problems::{DecentralizedProblem, Reference};

const ACTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Target norm of the projected-gradient mapping.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200_000 }
    }
}

/// Minimizes `sum_v f^v` over the intersection of the node sets by
/// accelerated projected gradient with adaptive restart; the projection onto
/// the intersection uses alternating projections.
///
/// Halfspace multipliers are recovered by nonnegative least squares on the
/// active faces, giving `n^v = lambda_v c_v`. Normals are `None` when some
/// node set is neither a halfspace nor the whole space.
pub fn centralized_reference(problem: &DecentralizedProblem, opts: &ReferenceOptions) -> Result<Reference> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let sets: Vec<&ConstraintSet> = problem.nodes().iter().map(|n| &n.constraint).collect();
    let lip: f64 = problem.nodes().iter().map(|n| n.objective.smoothness()).sum();
    let step = if lip > 0.0 { 1.0 / lip } else { 1.0 };
    let proj = |v: &DVector<f64>| project_intersection(&sets, v);

    let mut x = proj(&DVector::zeros(problem.dim()))?;
    let mut y = x.clone();
    let mut t = 1.0_f64;
    let mut residual = f64::INFINITY;
    let mut solved = None;
    for _ in 0..opts.max_iter {
        let next = proj(&(&y - problem.gradient(&y) * step))?;
        residual = (&y - &next).norm() / step;
        if residual <= opts.tol {
            solved = Some(next);
            break;
        }
        if (&y - &next).dot(&(&next - &x)) > 0.0 {
            t = 1.0;
            y = next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &next + (&next - &x) * ((t - 1.0) / t_next);
            t = t_next;
        }
        x = next;
    }
    let x_star = solved.ok_or(Error::NonConvergence {
        what: "centralized projected gradient",
        iterations: opts.max_iter,
        residual,
    })?;
    let normals = halfspace_normals(problem, &x_star);
    Ok(Reference { f_star: problem.objective(&x_star), x_star, normals })
}

fn halfspace_normals(problem: &DecentralizedProblem, x: &DVector<f64>) -> Option<Vec<DVector<f64>>> {
    let m = problem.dim();
    let mut active = Vec::new();
    for (v, node) in problem.nodes().iter().enumerate() {
        match &node.constraint {
            ConstraintSet::Halfspace { c, d } => {
                let nc = c.norm();
                if nc > 0.0 && (d - c.dot(x)) / nc <= ACTIVE_TOL {
                    active.push((v, c.clone()));
                }
            }
            set if set.is_whole_space() => {}
            _ => return None,
        }
    }
    let mut normals = vec![DVector::zeros(m); problem.node_count()];
    if active.is_empty() {
        return Some(normals);
    }
    let cols: Vec<DVector<f64>> = active.iter().map(|(_, c)| c.clone()).collect();
    let a = DMatrix::from_columns(&cols);
    let lambda = nnls(&a, &(-problem.gradient(x)));
    for (k, (v, c)) in active.iter().enumerate() {
        normals[*v] = c * lambda[k];
    }
    Some(normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{build_logcosh_problem, NodeProblem, QuadraticObjective};
    use std::sync::Arc;

    fn quad(h: DMatrix<f64>, b: DVector<f64>, set: ConstraintSet) -> NodeProblem {
        NodeProblem::new(Arc::new(QuadraticObjective::new(h, b).unwrap()), set).unwrap()
    }

    #[test]
    fn unconstrained_quadratic_sum() {
        let ws = ConstraintSet::WholeSpace { dim: 2 };
        let p = DecentralizedProblem::new(vec![
            quad(DMatrix::identity(2, 2), DVector::from_column_slice(&[-1.0, 0.0]), ws.clone()),
            quad(DMatrix::identity(2, 2) * 3.0, DVector::from_column_slice(&[0.0, 6.0]), ws),
        ])
        .unwrap();
        let r = centralized_reference(&p, &Default::default()).unwrap();
        // (I + 3I) x = (1, -6)
        assert!((&r.x_star - DVector::from_column_slice(&[0.25, -1.5])).norm() < 1e-10);
        assert!(r.normals.as_ref().unwrap().iter().all(|n| n.norm() == 0.0));
    }

    #[test]
    fn one_dimensional_kkt() {
        // f = x^2/2 subject to x >= 1, written as -x <= -1
        let set = ConstraintSet::halfspace(DVector::from_element(1, -1.0), -1.0);
        let p = DecentralizedProblem::new(vec![quad(DMatrix::identity(1, 1), DVector::zeros(1), set)]).unwrap();
        let r = centralized_reference(&p, &Default::default()).unwrap();
        assert!((r.x_star[0] - 1.0).abs() < 1e-12);
        let n = &r.normals.as_ref().unwrap()[0];
        assert!((n[0] + 1.0).abs() < 1e-9);
        let p = p.with_reference(r).unwrap();
        assert!(p.reference().is_some());
    }

    #[test]
    fn logcosh_setup_reaches_unconstrained_optimum() {
        // with more variables than nodes the zero set of the objective is an
        // affine subspace, which meets the halfspaces here
        let p = build_logcosh_problem(10, 20, 1).unwrap();
        let r = centralized_reference(&p, &Default::default()).unwrap();
        assert!(r.f_star.abs() < 1e-12, "{}", r.f_star);
        for n in r.normals.as_ref().unwrap() {
            assert!(n.norm() < 1e-6);
        }
        p.with_reference(r).unwrap();
    }

    #[test]
    fn non_halfspace_sets_have_no_normals() {
        let set = ConstraintSet::scaled_simplex(2, 1.0).unwrap();
        let p = DecentralizedProblem::new(vec![quad(DMatrix::identity(2, 2), DVector::zeros(2), set)]).unwrap();
        let r = centralized_reference(&p, &Default::default()).unwrap();
        assert!((&r.x_star - DVector::from_element(2, 0.5)).norm() < 1e-9);
        assert!(r.normals.is_none());
    }
}
