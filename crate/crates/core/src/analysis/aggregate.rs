use nalgebra::DMatrix;

use super::SpectralModel;
use crate::error::{check_dim, Error, Result};
use crate::problems::{DecentralizedProblem, Reference};
use crate::solvers::NodeState;

/// Running values of `A_K` along a trajectory together with the lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateTrace {
    /// `values[K - 1] = A_K` for `K = 1, 2, ...`.
    pub values: Vec<f64>,
    /// `|Psi_0|_F^2`.
    pub psi0_norm_sq: f64,
    /// `C = max(0, -lambda_min(S)) + 1e-9`.
    pub c: f64,
}

impl AggregateTrace {
    /// `-C |Psi_0|_F^2`.
    pub fn lower_bound(&self) -> f64 {
        -self.c * self.psi0_norm_sq
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn bound_holds(&self) -> bool {
        self.min_value() >= self.lower_bound()
    }
}

/// Stacks `Psi_k = (X~_{k+1}, X~_k, G~_k, Delta_k)` as a `4M x d` matrix for
/// every `k` with a successor state in `history`.
pub fn stacked_states(
    history: &[Vec<NodeState>],
    problem: &DecentralizedProblem,
    reference: &Reference,
) -> Result<Vec<DMatrix<f64>>> {
    let m = problem.node_count();
    let d = problem.dim();
    check_dim(d, reference.x_star.len())?;
    let offsets: Vec<_> = problem
        .nodes()
        .iter()
        .enumerate()
        .map(|(v, node)| {
            let grad = node.objective.gradient(&reference.x_star);
            match (&reference.normals, node.constraint.is_whole_space()) {
                (Some(n), _) => {
                    check_dim(m, n.len())?;
                    check_dim(d, n[v].len())?;
                    Ok(grad + &n[v])
                }
                (None, true) => Ok(grad),
                (None, false) => Err(Error::MissingReference(format!("normal vector of node {v}"))),
            }
        })
        .collect::<Result<_>>()?;
    for states in history {
        check_dim(m, states.len())?;
    }
    let x_tilde = |k: usize, v: usize| &history[k][v].x - &reference.x_star;
    Ok((0..history.len().saturating_sub(1))
        .map(|k| {
            let mut psi = DMatrix::zeros(4 * m, d);
            for v in 0..m {
                let s = &history[k][v];
                psi.row_mut(v).copy_from(&x_tilde(k + 1, v).transpose());
                psi.row_mut(m + v).copy_from(&x_tilde(k, v).transpose());
                psi.row_mut(2 * m + v).copy_from(&(&s.g - &offsets[v]).transpose());
                psi.row_mut(3 * m + v).copy_from(&(&s.h - &s.g).transpose());
            }
            psi
        })
        .collect())
}

/// `A_K = sum_{k < K} <Psi_k, S Psi_k>` for every `K` the history allows.
pub fn aggregate_a_k(
    history: &[Vec<NodeState>],
    problem: &DecentralizedProblem,
    model: &SpectralModel,
    reference: &Reference,
) -> Result<AggregateTrace> {
    check_dim(model.state_dim(), 4 * problem.node_count())?;
    let psis = stacked_states(history, problem, reference)?;
    if psis.is_empty() {
        return Err(Error::InsufficientData("history needs at least two states".into()));
    }
    let mut acc = 0.0;
    let values = psis
        .iter()
        .map(|psi| {
            acc += psi.dot(&(&model.s * psi));
            acc
        })
        .collect();
    Ok(AggregateTrace { values, psi0_norm_sq: psis[0].norm_squared(), c: model.bound_constant() })
}
