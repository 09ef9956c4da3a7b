use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{DecentralizedProblem, LinearObjective, NodeProblem};
use crate::error::{Error, Result};
use crate::operators::{ConstraintSet, SliceGroup};

const MARGINAL_TOL: f64 = 1e-9;

/// Marginals and cost of a discrete transport problem. The plan is flattened
/// row-major, so cell `(i, j)` is coordinate `i * n_t + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OtInstance {
    pub source: DVector<f64>,
    pub target: DVector<f64>,
    pub cost: DMatrix<f64>,
}

impl OtInstance {
    pub fn new(source: DVector<f64>, target: DVector<f64>, cost: DMatrix<f64>) -> Result<Self> {
        for (name, v) in [("source", &source), ("target", &target)] {
            if v.is_empty() || v.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidMarginal(format!("{name} marginal must be nonempty and nonnegative")));
            }
            if (v.sum() - 1.0).abs() > MARGINAL_TOL {
                return Err(Error::InvalidMarginal(format!("{name} marginal sums to {}", v.sum())));
            }
        }
        if cost.shape() != (source.len(), target.len()) {
            return Err(Error::DimensionMismatch {
                expected: source.len() * target.len(),
                found: cost.len(),
            });
        }
        Ok(Self { source, target, cost })
    }

    /// Gaussian-bin marginals on `[0, 1]` with cost `|c_i - c_j|` between bin centers.
    pub fn gaussian(n: usize, source: (f64, f64), target: (f64, f64)) -> Result<Self> {
        let s = gaussian_bins(source.0, source.1, n)?;
        let t = gaussian_bins(target.0, target.1, n)?;
        let cost = DMatrix::from_fn(n, n, |i, j| (bin_center(i, n) - bin_center(j, n)).abs());
        Self::new(s, t, cost)
    }

    pub fn rows(&self) -> usize {
        self.source.len()
    }

    pub fn cols(&self) -> usize {
        self.target.len()
    }

    pub fn flatten(&self, plan: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(plan.len(), plan.transpose().iter().copied())
    }

    pub fn unflatten(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows(), self.cols(), x.as_slice())
    }

    /// `<C, X>`.
    pub fn cost_of(&self, plan: &DMatrix<f64>) -> f64 {
        self.cost.component_mul(plan).sum()
    }

    /// Worst violation of the marginal and sign constraints.
    pub fn plan_violation(&self, plan: &DMatrix<f64>) -> f64 {
        let rows = plan.column_sum() - &self.source;
        let cols = plan.row_sum().transpose() - &self.target;
        let neg = plan.iter().fold(0.0_f64, |m, &v| m.max(-v));
        rows.amax().max(cols.amax()).max(neg)
    }
}

fn bin_center(k: usize, n: usize) -> f64 {
    (k as f64 + 0.5) / n as f64
}

/// Gaussian density at the `n` bin centers `(k + 1/2)/n` of `[0, 1]`,
/// normalized to sum to one.
pub fn gaussian_bins(mean: f64, std: f64, n: usize) -> Result<DVector<f64>> {
    if !(std > 0.0) {
        return Err(Error::InvalidParameter(format!("std must be positive, got {std}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    let dens = DVector::from_fn(n, |k, _| {
        let z = (bin_center(k, n) - mean) / std;
        (-0.5 * z * z).exp()
    });
    let total = dens.sum();
    if !(total > 0.0) {
        return Err(Error::NumericalUnderflow("all bin densities underflowed".into()));
    }
    Ok(dens / total)
}

/// Splits the `n_s` row terms and `n_t` column terms of the transport LP
/// round-robin over `nodes`: term `k` (rows first) goes to node `k mod M`.
///
/// A row term contributes `(1/2) <C_i, X_i>` and the simplex constraint on
/// row `i`; a column term likewise for column `j`. Coordinates outside a
/// node's slices are free in its set.
pub fn build_ot_problem(instance: &OtInstance, nodes: usize) -> Result<DecentralizedProblem> {
    let (ns, nt) = (instance.rows(), instance.cols());
    if nodes == 0 || nodes > ns + nt {
        return Err(Error::InvalidParameter(format!("need 1 <= M <= {}, got {nodes}", ns + nt)));
    }
    let dim = ns * nt;
    let mut costs = vec![DVector::<f64>::zeros(dim); nodes];
    let mut groups: Vec<Vec<SliceGroup>> = vec![Vec::new(); nodes];
    for term in 0..ns + nt {
        let v = term % nodes;
        let (indices, mass) = if term < ns {
            let i = term;
            ((0..nt).map(|j| i * nt + j).collect::<Vec<_>>(), instance.source[i])
        } else {
            let j = term - ns;
            ((0..ns).map(|i| i * nt + j).collect::<Vec<_>>(), instance.target[j])
        };
        for &k in &indices {
            costs[v][k] += 0.5 * instance.cost[(k / nt, k % nt)];
        }
        groups[v].push(SliceGroup { indices, mass });
    }
    let out = costs
        .into_iter()
        .zip(groups)
        .map(|(c, g)| {
            NodeProblem::new(Arc::new(LinearObjective { c, offset: 0.0 }), ConstraintSet::slice_groups(dim, g)?)
        })
        .collect::<Result<Vec<_>>>()?;
    DecentralizedProblem::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_by_two() -> OtInstance {
        OtInstance::new(
            DVector::from_element(2, 0.5),
            DVector::from_element(2, 0.5),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_vertices() {
        // the polytope has two vertices: the diagonal and the anti-diagonal
        let inst = two_by_two();
        let diag = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        let anti = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        assert_eq!(inst.cost_of(&diag), 0.0);
        assert_eq!(inst.cost_of(&anti), 1.0);
        let p = build_ot_problem(&inst, 4).unwrap();
        let x = inst.flatten(&diag);
        for n in p.nodes() {
            assert_eq!(n.constraint.violation(&x).unwrap(), 0.0);
        }
        assert_eq!(p.objective(&x), 0.0);
    }

    #[test]
    fn node_objectives_sum_to_transport_cost() {
        let inst = OtInstance::gaussian(5, (1.0 / 3.0, 0.25), (2.0 / 3.0, 0.125)).unwrap();
        let plan = &inst.source * inst.target.transpose();
        assert!(inst.plan_violation(&plan) < 1e-15);
        for m in [1, 3, 4, 10] {
            let p = build_ot_problem(&inst, m).unwrap();
            assert_abs_diff_eq!(p.objective(&inst.flatten(&plan)), inst.cost_of(&plan), epsilon = 1e-14);
            for n in p.nodes() {
                assert!(n.constraint.violation(&inst.flatten(&plan)).unwrap() < 1e-15);
            }
        }
        assert!(build_ot_problem(&inst, 11).is_err());
    }

    #[test]
    fn one_term_per_node_when_m_equals_term_count() {
        let inst = two_by_two();
        let p = build_ot_problem(&inst, 4).unwrap();
        for n in p.nodes() {
            match &n.constraint {
                ConstraintSet::AffineThenNonneg { groups, .. } => assert_eq!(groups.len(), 1),
                other => panic!("unexpected set {other:?}"),
            }
        }
    }

    #[test]
    fn marginal_validation() {
        let c = DMatrix::zeros(2, 2);
        let half = DVector::from_element(2, 0.5);
        assert!(matches!(
            OtInstance::new(DVector::from_column_slice(&[0.6, 0.5]), half.clone(), c.clone()),
            Err(Error::InvalidMarginal(_))
        ));
        assert!(matches!(
            OtInstance::new(DVector::from_column_slice(&[1.5, -0.5]), half.clone(), c.clone()),
            Err(Error::InvalidMarginal(_))
        ));
        assert!(OtInstance::new(half.clone(), half, DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn bins() {
        assert_eq!(gaussian_bins(0.3, 0.1, 1).unwrap(), DVector::from_element(1, 1.0));
        let b = gaussian_bins(0.5, 0.2, 3).unwrap();
        assert_abs_diff_eq!(b[0], b[2], epsilon = 1e-16);
        let b = gaussian_bins(1.0 / 3.0, 0.25, 4).unwrap();
        let raw: Vec<f64> = [0.125, 0.375, 0.625, 0.875]
            .iter()
            .map(|c: &f64| (-0.5 * ((c - 1.0 / 3.0) / 0.25).powi(2)).exp())
            .collect();
        let s: f64 = raw.iter().sum();
        for k in 0..4 {
            assert_abs_diff_eq!(b[k], raw[k] / s, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(b.sum(), 1.0, epsilon = 1e-15);
        assert!(gaussian_bins(0.5, 0.0, 3).is_err());
    }
}
