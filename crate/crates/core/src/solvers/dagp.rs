use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::trace::{sum, RecordOptions, Recorder, SolverTrace, TraceRecord};
use crate::error::{check_dim, Error, Result};
use crate::graph::GossipPair;
use crate::linalg::seeded_rng;
use crate::operators::project;
use crate::problems::DecentralizedProblem;

/// Tolerance on `|sum_v h_0^v|` accepted at the start of a run.
pub const INITIAL_H_SUM_TOL: f64 = 1e-12;

/// The tuple each node keeps between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub x: DVector<f64>,
    pub z: DVector<f64>,
    pub g: DVector<f64>,
    pub h: DVector<f64>,
}

impl NodeState {
    /// `z = x` and `g = h = 0`.
    pub fn at(x: DVector<f64>) -> Self {
        let n = x.len();
        Self { z: x.clone(), x, g: DVector::zeros(n), h: DVector::zeros(n) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DagpParams {
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub iterations: usize,
}

impl DagpParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("rho", self.rho), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Standard normal `x_0^v` per node, `g_0 = h_0 = 0`.
pub fn random_initial_states(problem: &DecentralizedProblem, seed: u64) -> Vec<NodeState> {
    let mut rng = seeded_rng(seed);
    (0..problem.node_count())
        .map(|_| NodeState::at(DVector::from_fn(problem.dim(), |_, _| rng.sample(StandardNormal))))
        .collect()
}

fn check_inputs(states: &[NodeState], problem: &DecentralizedProblem, gossip: &GossipPair) -> Result<()> {
    check_dim(problem.node_count(), states.len())?;
    check_dim(problem.node_count(), gossip.node_count())?;
    for s in states {
        for v in [&s.x, &s.z, &s.g, &s.h] {
            check_dim(problem.dim(), v.len())?;
        }
    }
    Ok(())
}

/// Nonzero entries of each row, so the sums run over in-neighbors and self.
fn row_support(mat: &DMatrix<f64>) -> Vec<Vec<(usize, f64)>> {
    (0..mat.nrows())
        .map(|v| (0..mat.ncols()).filter(|&u| mat[(v, u)] != 0.0).map(|u| (u, mat[(v, u)])).collect())
        .collect()
}

/// One synchronous round; every node reads only round-`k` messages
/// `(x^u, h^u - g^u)`.
pub fn dagp_round(
    states: &[NodeState],
    problem: &DecentralizedProblem,
    gossip: &GossipPair,
    params: &DagpParams,
) -> Result<Vec<NodeState>> {
    params.validate()?;
    check_inputs(states, problem, gossip)?;
    let w = row_support(&gossip.w);
    let q = row_support(&gossip.q);
    round_with(states, problem, &w, &q, params)
}

fn round_with(
    states: &[NodeState],
    problem: &DecentralizedProblem,
    w: &[Vec<(usize, f64)>],
    q: &[Vec<(usize, f64)>],
    params: &DagpParams,
) -> Result<Vec<NodeState>> {
    let DagpParams { mu, rho, alpha, .. } = *params;
    let messages: Vec<DVector<f64>> = states.iter().map(|s| &s.h - &s.g).collect();
    (0..states.len())
        .into_par_iter()
        .map(|v| {
            let s = &states[v];
            let node = &problem.nodes()[v];
            let grad = node.objective.gradient(&s.x);
            let mut mix = DVector::zeros(s.x.len());
            for &(u, wvu) in &w[v] {
                mix.axpy(wvu, &states[u].x, 1.0);
            }
            let z = &s.x - mix - (&grad - &s.g) * mu;
            let x = project(&node.constraint, &z)?;
            let g = &s.g + (&grad - &s.g + (&z - &x) / mu) * rho + (&s.h - &s.g) * alpha;
            let mut h = s.h.clone();
            for &(u, qvu) in &q[v] {
                h.axpy(-qvu, &messages[u], 1.0);
            }
            Ok(NodeState { x, z, g, h })
        })
        .collect()
}

/// Outcome of [`run_dagp`].
#[derive(Debug, Clone)]
pub struct DagpRun {
    pub trace: SolverTrace,
    pub states: Vec<NodeState>,
    /// States after every round, starting with the initial ones, when requested.
    pub history: Option<Vec<Vec<NodeState>>>,
    /// Rounds actually performed.
    pub rounds: usize,
}

/// Runs `params.iterations` rounds from `init`.
pub fn run_dagp(
    problem: &DecentralizedProblem,
    gossip: &GossipPair,
    params: &DagpParams,
    init: Vec<NodeState>,
    record: &RecordOptions,
    keep_history: bool,
) -> Result<DagpRun> {
    run_dagp_until(problem, gossip, params, init, record, keep_history, &|_| false)
}

/// Like [`run_dagp`], but stops after the first recorded round at which
/// `stop` holds for the instantaneous trace so far.
pub fn run_dagp_until(
    problem: &DecentralizedProblem,
    gossip: &GossipPair,
    params: &DagpParams,
    init: Vec<NodeState>,
    record: &RecordOptions,
    keep_history: bool,
    stop: &dyn Fn(&[TraceRecord]) -> bool,
) -> Result<DagpRun> {
    params.validate()?;
    check_inputs(&init, problem, gossip)?;
    let hsum = sum(&init.iter().map(|s| s.h.clone()).collect::<Vec<_>>());
    if hsum.norm() > INITIAL_H_SUM_TOL {
        return Err(Error::InvalidParameter(format!("initial h must sum to zero, |sum h| = {:e}", hsum.norm())));
    }
    let w = row_support(&gossip.w);
    let q = row_support(&gossip.q);
    let x0: Vec<DVector<f64>> = init.iter().map(|s| s.x.clone()).collect();
    let g0 = sum(&init.iter().map(|s| s.g.clone()).collect::<Vec<_>>());
    let mut rec = Recorder::new(problem, *record, params.iterations, &x0, &g0);
    let mut history = keep_history.then(|| vec![init.clone()]);
    let mut states = init;
    let mut rounds = 0;
    for k in 1..=params.iterations {
        states = round_with(&states, problem, &w, &q, params)?;
        let xs: Vec<DVector<f64>> = states.iter().map(|s| s.x.clone()).collect();
        let gs: Vec<DVector<f64>> = states.iter().map(|s| s.g.clone()).collect();
        rec.observe(k, &xs, &sum(&gs))?;
        if let Some(h) = history.as_mut() {
            h.push(states.clone());
        }
        rounds = k;
        let recorded = rec.trace.instantaneous.last().is_some_and(|r| r.iter == k);
        if recorded && stop(&rec.trace.instantaneous) {
            break;
        }
    }
    Ok(DagpRun { trace: rec.trace, states, history, rounds })
}
