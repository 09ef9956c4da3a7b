use nalgebra::{DMatrix, DVector};

use super::trace::{sum, RecordOptions, Recorder, SolverTrace};
use crate::error::{check_dim, Error, Result};
use crate::graph::GossipPair;
use crate::operators::project;
use crate::problems::DecentralizedProblem;

/// Final local solutions and trace of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub trace: SolverTrace,
    pub solutions: Vec<DVector<f64>>,
}

/// Modified DDPS: step `c / sqrt(k)` and surplus weight `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdpsParams {
    pub c: f64,
    pub epsilon: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub step: f64,
    pub iterations: usize,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn check_setup(problem: &DecentralizedProblem, gossip: &GossipPair, x0: &[DVector<f64>]) -> Result<()> {
    check_dim(problem.node_count(), gossip.node_count())?;
    check_dim(problem.node_count(), x0.len())?;
    for x in x0 {
        check_dim(problem.dim(), x.len())?;
    }
    Ok(())
}

fn require_unconstrained(problem: &DecentralizedProblem, method: &str) -> Result<()> {
    match problem.nodes().iter().position(|n| !n.constraint.is_whole_space()) {
        Some(v) => Err(Error::UnsupportedConstraint(format!("{method} handles unconstrained problems only (node {v})"))),
        None => Ok(()),
    }
}

/// `out[v] = sum_u mat[v, u] vs[u]`.
fn mix(mat: &DMatrix<f64>, vs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    (0..mat.nrows())
        .map(|v| {
            let mut acc = DVector::zeros(vs[0].len());
            for (u, x) in vs.iter().enumerate() {
                let a = mat[(v, u)];
                if a != 0.0 {
                    acc.axpy(a, x, 1.0);
                }
            }
            acc
        })
        .collect()
}

fn gradients(problem: &DecentralizedProblem, xs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    problem.nodes().iter().zip(xs).map(|(n, x)| n.objective.gradient(x)).collect()
}

/// Surplus-based projected subgradient method over a directed graph with the
/// row-stochastic `A = I - W` and column-stochastic `B = I - Q`:
///
/// `v = A x + eps y`, `x+ = P(v - (c/sqrt k) grad f(v))`,
/// `y+ = x - A x + B y - eps y`.
pub fn run_ddps(
    problem: &DecentralizedProblem,
    gossip: &GossipPair,
    params: &DdpsParams,
    x0: Vec<DVector<f64>>,
    record: &RecordOptions,
) -> Result<BaselineRun> {
    positive("c", params.c)?;
    if !(params.epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {}", params.epsilon)));
    }
    check_setup(problem, gossip, &x0)?;
    let a = gossip.row_stochastic();
    let b = gossip.column_stochastic();
    let mut x = x0;
    let mut y = vec![DVector::zeros(problem.dim()); problem.node_count()];
    let mut rec = Recorder::new(problem, *record, params.iterations, &x, &sum(&y));
    for k in 1..=params.iterations {
        let step = params.c / (k as f64).sqrt();
        let ax = mix(&a, &x);
        let by = mix(&b, &y);
        let mut next_x = Vec::with_capacity(x.len());
        let mut next_y = Vec::with_capacity(x.len());
        for (vi, node) in problem.nodes().iter().enumerate() {
            let v = &ax[vi] + &y[vi] * params.epsilon;
            let g = node.objective.gradient(&v);
            next_x.push(project(&node.constraint, &(&v - g * step))?);
            next_y.push(&x[vi] - &ax[vi] + &by[vi] - &y[vi] * params.epsilon);
        }
        x = next_x;
        y = next_y;
        rec.observe(k, &x, &sum(&y))?;
    }
    Ok(BaselineRun { trace: rec.trace, solutions: x })
}

/// Push-Pull: `x+ = R (x - a y)`, `y+ = C y + grad F(x+) - grad F(x)` with
/// `R = I - W`, `C = I - Q` and `y_0 = grad F(x_0)`.
pub fn run_push_pull(
    problem: &DecentralizedProblem,
    gossip: &GossipPair,
    params: &StepParams,
    x0: Vec<DVector<f64>>,
    record: &RecordOptions,
) -> Result<BaselineRun> {
    require_unconstrained(problem, "Push-Pull")?;
    positive("step", params.step)?;
    check_setup(problem, gossip, &x0)?;
    let r = gossip.row_stochastic();
    let c = gossip.column_stochastic();
    let mut x = x0;
    let mut grad = gradients(problem, &x);
    let mut y = grad.clone();
    let mut rec = Recorder::new(problem, *record, params.iterations, &x, &sum(&y));
    for k in 1..=params.iterations {
        let moved: Vec<DVector<f64>> = x.iter().zip(&y).map(|(xi, yi)| xi - yi * params.step).collect();
        let next_x = mix(&r, &moved);
        let next_grad = gradients(problem, &next_x);
        let cy = mix(&c, &y);
        y = cy.iter().zip(next_grad.iter().zip(&grad)).map(|(a, (g1, g0))| a + g1 - g0).collect();
        x = next_x;
        grad = next_grad;
        rec.observe(k, &x, &sum(&y))?;
    }
    Ok(BaselineRun { trace: rec.trace, solutions: x })
}

/// ADD-OPT with the column-stochastic `A = I - Q`:
/// `x+ = A x - a w`, `y+ = A y`, `z+ = x+ / y+`, `w+ = A w + grad F(z+) - grad F(z)`,
/// started from `y_0 = 1`, `z_0 = x_0`, `w_0 = grad F(z_0)`. The local
/// solutions reported are the `z` estimates.
pub fn run_add_opt(
    problem: &DecentralizedProblem,
    gossip: &GossipPair,
    params: &StepParams,
    x0: Vec<DVector<f64>>,
    record: &RecordOptions,
) -> Result<BaselineRun> {
    require_unconstrained(problem, "ADD-OPT")?;
    positive("step", params.step)?;
    check_setup(problem, gossip, &x0)?;
    let a = gossip.column_stochastic();
    let n = problem.node_count();
    let mut x = x0;
    let mut y = DVector::from_element(n, 1.0);
    let mut z = x.clone();
    let mut grad = gradients(problem, &z);
    let mut w = grad.clone();
    let mut rec = Recorder::new(problem, *record, params.iterations, &z, &sum(&w));
    for k in 1..=params.iterations {
        let ax = mix(&a, &x);
        x = ax.iter().zip(&w).map(|(xi, wi)| xi - wi * params.step).collect();
        y = &a * y;
        if let Some(v) = y.iter().position(|&t| !(t > 0.0)) {
            return Err(Error::NumericalUnderflow(format!("push-sum weight of node {v} vanished")));
        }
        z = x.iter().zip(y.iter()).map(|(xi, &yi)| xi / yi).collect();
        let next_grad = gradients(problem, &z);
        let aw = mix(&a, &w);
        w = aw.iter().zip(next_grad.iter().zip(&grad)).map(|(t, (g1, g0))| t + g1 - g0).collect();
        grad = next_grad;
        rec.observe(k, &z, &sum(&w))?;
    }
    Ok(BaselineRun { trace: rec.trace, solutions: z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_gossip_matrices, random_strongly_connected_graph, DirectedGraph};
    use crate::operators::ConstraintSet;
    use crate::problems::{NodeProblem, QuadraticObjective};
    use std::sync::Arc;

    fn quad(h: f64, b: f64, set: ConstraintSet) -> NodeProblem {
        let q = QuadraticObjective::new(DMatrix::from_element(1, 1, h), DVector::from_element(1, b)).unwrap();
        NodeProblem::new(Arc::new(q), set).unwrap()
    }

    fn one(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    fn two_node() -> (DecentralizedProblem, GossipPair) {
        let ws = ConstraintSet::WholeSpace { dim: 1 };
        let p = DecentralizedProblem::new(vec![quad(1.0, -1.0, ws.clone()), quad(3.0, 2.0, ws)]).unwrap();
        (p, build_gossip_matrices(&DirectedGraph::complete(2).unwrap()).unwrap())
    }

    #[test]
    fn single_node_methods_are_gradient_descent() {
        let ws = ConstraintSet::WholeSpace { dim: 1 };
        let p = DecentralizedProblem::new(vec![quad(2.0, 0.0, ws)]).unwrap();
        let iso = GossipPair::isolated(1);
        let sp = StepParams { step: 0.1, iterations: 3 };
        // x_{k+1} = (1 - 0.2) x_k
        let expect = 0.8_f64.powi(3);
        let pp = run_push_pull(&p, &iso, &sp, vec![one(1.0)], &Default::default()).unwrap();
        let ao = run_add_opt(&p, &iso, &sp, vec![one(1.0)], &Default::default()).unwrap();
        assert!((pp.solutions[0][0] - expect).abs() < 1e-15);
        assert!((ao.solutions[0][0] - expect).abs() < 1e-15);
        let dd = run_ddps(&p, &iso, &DdpsParams { c: 0.1, epsilon: 0.0, iterations: 2 }, vec![one(1.0)], &Default::default())
            .unwrap();
        let e = (1.0 - 0.2) * (1.0 - 0.2 / 2f64.sqrt());
        assert!((dd.solutions[0][0] - e).abs() < 1e-15);
    }

    #[test]
    fn two_node_quadratic_reaches_closed_form() {
        // minimizer of (x^2 - 2x)/2 + (3x^2 + 4x)/2 is x = -1/4
        let (p, gossip) = two_node();
        let x0 = vec![one(3.0), one(-2.0)];
        let sp = StepParams { step: 0.1, iterations: 2000 };
        for run in [
            run_push_pull(&p, &gossip, &sp, x0.clone(), &Default::default()).unwrap(),
            run_add_opt(&p, &gossip, &sp, x0.clone(), &Default::default()).unwrap(),
        ] {
            for x in &run.solutions {
                assert!((x[0] + 0.25).abs() < 1e-8, "{}", x[0]);
            }
        }
    }

    #[test]
    fn constrained_problems_are_rejected() {
        let set = ConstraintSet::halfspace(one(1.0), 0.0);
        let p = DecentralizedProblem::new(vec![quad(1.0, 0.0, set)]).unwrap();
        let sp = StepParams { step: 0.1, iterations: 1 };
        let iso = GossipPair::isolated(1);
        assert!(matches!(run_push_pull(&p, &iso, &sp, vec![one(0.0)], &Default::default()), Err(Error::UnsupportedConstraint(_))));
        assert!(matches!(run_add_opt(&p, &iso, &sp, vec![one(0.0)], &Default::default()), Err(Error::UnsupportedConstraint(_))));
    }

    #[test]
    fn ddps_identical_constraints_approach_constrained_optimum() {
        // every node keeps x <= 0.5; unconstrained minimizer of the sum is 1
        let set = ConstraintSet::halfspace(one(1.0), 0.5);
        let nodes = (0..4).map(|v| quad(1.0, -(v as f64) / 1.5, set.clone())).collect();
        let p = DecentralizedProblem::new(nodes).unwrap();
        let gossip = build_gossip_matrices(&random_strongly_connected_graph(4, 0.5, 3).unwrap()).unwrap();
        let x0 = vec![one(0.0); 4];
        let run = run_ddps(&p, &gossip, &DdpsParams { c: 0.1, epsilon: 0.01, iterations: 100_000 }, x0, &RecordOptions { every: 1000, wallclock: false })
            .unwrap();
        for x in &run.solutions {
            assert!((x[0] - 0.5).abs() < 1e-3, "{}", x[0]);
        }
        assert!(p.nodes()[0].objective.smoothness() > 0.0);
    }
}
