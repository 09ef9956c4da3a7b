//! The experiment families as collections of per-node (objective, set) pairs.

mod io;
mod logcosh;
mod logistic;
mod objectives;
mod transport;

pub use io::{load_matrix_text, load_samples_csv, parse_matrix_text, parse_samples_csv};
pub use logcosh::build_logcosh_problem;
pub use logistic::{build_logistic_problem, synthetic_two_clusters, LabeledSamples};
pub use objectives::{LinearObjective, LogCosh, LogisticLoss, QuadraticObjective};
pub use transport::{build_ot_problem, gaussian_bins, OtInstance};

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::operators::{project, ConstraintSet, SmoothFunction};

/// Tolerance for checking a stored reference solution.
pub const REFERENCE_TOL: f64 = 1e-6;

/// One agent's private data.
#[derive(Debug, Clone)]
pub struct NodeProblem {
    pub objective: Arc<dyn SmoothFunction>,
    pub constraint: ConstraintSet,
}

impl NodeProblem {
    pub fn new(objective: Arc<dyn SmoothFunction>, constraint: ConstraintSet) -> Result<Self> {
        check_dim(objective.dim(), constraint.dim())?;
        Ok(Self { objective, constraint })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }
}

/// A centralized solution: the point, the summed optimal value and, when
/// available, one normal-cone element per node such that
/// `sum_v (grad f^v(x*) + n^v) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x_star: DVector<f64>,
    pub f_star: f64,
    pub normals: Option<Vec<DVector<f64>>>,
}

#[derive(Debug, Clone)]
pub struct DecentralizedProblem {
    nodes: Vec<NodeProblem>,
    reference: Option<Reference>,
}

impl DecentralizedProblem {
    pub fn new(nodes: Vec<NodeProblem>) -> Result<Self> {
        let first = nodes.first().ok_or_else(|| Error::InvalidParameter("problem has no nodes".into()))?;
        let m = first.dim();
        for n in &nodes {
            check_dim(m, n.dim())?;
        }
        Ok(Self { nodes, reference: None })
    }

    pub fn nodes(&self) -> &[NodeProblem] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    pub fn reference(&self) -> Option<&Reference> {
        self.reference.as_ref()
    }

    /// Largest smoothness constant over the nodes.
    pub fn max_smoothness(&self) -> f64 {
        self.nodes.iter().map(|n| n.objective.smoothness()).fold(0.0, f64::max)
    }

    pub fn all_unconstrained(&self) -> bool {
        self.nodes.iter().all(|n| n.constraint.is_whole_space())
    }

    /// `sum_v f^v(x)`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.nodes.iter().map(|n| n.objective.value(x)).sum()
    }

    /// `sum_v grad f^v(x)`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.nodes
            .iter()
            .fold(DVector::zeros(x.len()), |acc, n| acc + n.objective.gradient(x))
    }

    /// Squared distances from `x` to each node's set.
    pub fn squared_distances(&self, x: &DVector<f64>) -> Result<Vec<f64>> {
        self.nodes
            .iter()
            .map(|n| Ok((x - project(&n.constraint, x)?).norm_squared()))
            .collect()
    }

    /// Attaches a reference after checking feasibility and stationarity.
    pub fn with_reference(mut self, reference: Reference) -> Result<Self> {
        self.check_reference(&reference)?;
        self.reference = Some(reference);
        Ok(self)
    }

    /// Stationarity residual `|sum_v (grad f^v(x*) + n^v)|` (zero when the
    /// normals are unavailable) and the worst per-node constraint violation.
    pub fn reference_residuals(&self, r: &Reference) -> Result<(f64, f64)> {
        check_dim(self.dim(), r.x_star.len())?;
        let stat = match &r.normals {
            Some(normals) => {
                check_dim(self.node_count(), normals.len())?;
                let mut sum = self.gradient(&r.x_star);
                for n in normals {
                    check_dim(self.dim(), n.len())?;
                    sum += n;
                }
                sum.norm()
            }
            None => 0.0,
        };
        let mut viol = 0.0_f64;
        for n in &self.nodes {
            viol = viol.max(n.constraint.violation(&r.x_star)?);
        }
        Ok((stat, viol))
    }

    fn check_reference(&self, r: &Reference) -> Result<()> {
        let (stat, viol) = self.reference_residuals(r)?;
        if viol > REFERENCE_TOL {
            return Err(Error::NotAMember(viol));
        }
        if stat > REFERENCE_TOL {
            return Err(Error::InvalidParameter(format!("reference stationarity residual {stat:.3e}")));
        }
        Ok(())
    }
}
