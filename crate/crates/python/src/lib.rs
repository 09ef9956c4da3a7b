//! Python bindings. Vectors cross the boundary as lists of floats, matrices
//! as lists of rows.

use std::path::PathBuf;

use dagp_core::analysis::{build_gd_model, pencil_roots};
use dagp_core::graph::{build_gossip_matrices, random_strongly_connected_graph, DirectedGraph, GossipPair};
use dagp_core::harness::{self, ExperimentConfig, ExperimentId};
use dagp_core::operators::{project, project_simplex, ConstraintSet};
use dagp_core::problems::{build_logcosh_problem, build_ot_problem, DecentralizedProblem, OtInstance};
use dagp_core::solvers::{
    self, centralized_reference, random_initial_states, run_dagp, DagpParams, NodeState, RecordOptions,
    ReferenceOptions, SinkhornOptions, TraceRecord,
};
use dagp_core::{DMatrix, DVector};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(dagp, DagpError, PyException);

fn err(e: dagp_core::Error) -> PyErr {
    DagpError::new_err(e.to_string())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(DagpError::new_err("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn record_dict<'py>(py: Python<'py>, r: &TraceRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("iter", r.iter)?;
    d.set_item("obj_gap", r.obj_gap)?;
    d.set_item("feas_max", r.feas_max)?;
    d.set_item("feas_sum", r.feas_sum)?;
    d.set_item("consensus", r.consensus)?;
    d.set_item("gsum_norm", r.gsum_norm)?;
    Ok(d)
}

/// A directed communication graph with its gossip matrices.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    graph: DirectedGraph,
    gossip: GossipPair,
}

impl PyGraph {
    fn wrap(graph: DirectedGraph) -> PyResult<Self> {
        let gossip = build_gossip_matrices(&graph).map_err(err)?;
        Ok(Self { graph, gossip })
    }
}

#[pymethods]
impl PyGraph {
    /// Edges are `(receiver, sender)` pairs.
    #[new]
    fn new(nodes: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Self::wrap(DirectedGraph::from_edges(nodes, &edges).map_err(err)?)
    }

    #[staticmethod]
    fn complete(nodes: usize) -> PyResult<Self> {
        Self::wrap(DirectedGraph::complete(nodes).map_err(err)?)
    }

    #[staticmethod]
    #[pyo3(signature = (nodes, edge_probability, seed=0))]
    fn random(nodes: usize, edge_probability: f64, seed: u64) -> PyResult<Self> {
        Self::wrap(random_strongly_connected_graph(nodes, edge_probability, seed).map_err(err)?)
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.graph.node_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.graph.edges().collect()
    }

    fn is_strongly_connected(&self) -> bool {
        self.graph.is_strongly_connected()
    }

    #[getter]
    fn w(&self) -> Vec<Vec<f64>> {
        rows(&self.gossip.w)
    }

    #[getter]
    fn q(&self) -> Vec<Vec<f64>> {
        rows(&self.gossip.q)
    }

    fn __repr__(&self) -> String {
        format!("Graph(nodes={}, edges={})", self.graph.node_count(), self.graph.edge_count())
    }
}

/// A sum of node objectives, each with its own constraint set.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: DecentralizedProblem,
}

#[pymethods]
impl PyProblem {
    /// Log-cosh objectives with per-node halfspace constraints.
    #[staticmethod]
    #[pyo3(signature = (nodes, dim, seed=0, reference=true))]
    fn logcosh(nodes: usize, dim: usize, seed: u64, reference: bool) -> PyResult<Self> {
        let p = build_logcosh_problem(nodes, dim, seed).map_err(err)?;
        Ok(Self { inner: if reference { with_reference(p)? } else { p } })
    }

    /// Transport between two discretized Gaussians split over `nodes` nodes.
    #[staticmethod]
    #[pyo3(signature = (n, nodes, source=(0.3, 0.1), target=(0.7, 0.1)))]
    fn transport(n: usize, nodes: usize, source: (f64, f64), target: (f64, f64)) -> PyResult<Self> {
        let inst = OtInstance::gaussian(n, source, target).map_err(err)?;
        Ok(Self { inner: build_ot_problem(&inst, nodes).map_err(err)? })
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn f_star(&self) -> Option<f64> {
        self.inner.reference().map(|r| r.f_star)
    }

    #[getter]
    fn x_star(&self) -> Option<Vec<f64>> {
        self.inner.reference().map(|r| r.x_star.iter().copied().collect())
    }

    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_dim(&x)?;
        Ok(self.inner.objective(&DVector::from_vec(x)))
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check_dim(&x)?;
        Ok(self.inner.gradient(&DVector::from_vec(x)).iter().copied().collect())
    }

    /// Squared distance from `x` to each node's set.
    fn squared_distances(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check_dim(&x)?;
        self.inner.squared_distances(&DVector::from_vec(x)).map_err(err)
    }
}

impl PyProblem {
    fn check_dim(&self, x: &[f64]) -> PyResult<()> {
        if x.len() != self.inner.dim() {
            return Err(DagpError::new_err(format!("expected {} coordinates, got {}", self.inner.dim(), x.len())));
        }
        Ok(())
    }
}

fn with_reference(p: DecentralizedProblem) -> PyResult<DecentralizedProblem> {
    let r = centralized_reference(&p, &ReferenceOptions::default()).map_err(err)?;
    p.with_reference(r).map_err(err)
}

/// Runs DAGP and returns the final local iterates and both traces.
#[pyfunction]
#[pyo3(signature = (problem, graph, mu, rho, alpha, iterations, seed=None, every=1))]
#[allow(clippy::too_many_arguments)]
fn solve_dagp<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    graph: &PyGraph,
    mu: f64,
    rho: f64,
    alpha: f64,
    iterations: usize,
    seed: Option<u64>,
    every: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = &problem.inner;
    let init = match seed {
        Some(s) => random_initial_states(p, s),
        None => (0..p.node_count()).map(|_| NodeState::at(DVector::zeros(p.dim()))).collect(),
    };
    let params = DagpParams { mu, rho, alpha, iterations };
    let record = RecordOptions { every, wallclock: false };
    let run = py
        .detach(|| run_dagp(p, &graph.gossip, &params, init, &record, false))
        .map_err(err)?;
    let out = PyDict::new(py);
    let xs: Vec<Vec<f64>> = run.states.iter().map(|s| s.x.iter().copied().collect()).collect();
    out.set_item("x", xs)?;
    out.set_item("rounds", run.rounds)?;
    let inst: PyResult<Vec<_>> = run.trace.instantaneous.iter().map(|r| record_dict(py, r)).collect();
    let avg: PyResult<Vec<_>> = run.trace.averaged.iter().map(|r| record_dict(py, r)).collect();
    out.set_item("trace", inst?)?;
    out.set_item("averaged", avg?)?;
    Ok(out)
}

/// Euclidean projection onto `{x >= 0 : sum x = radius}`.
#[pyfunction(name = "project_simplex")]
fn py_project_simplex(y: Vec<f64>, radius: f64) -> PyResult<Vec<f64>> {
    Ok(project_simplex(&DVector::from_vec(y), radius).map_err(err)?.iter().copied().collect())
}

/// Euclidean projection onto `{x : c^T x <= d}`.
#[pyfunction]
fn project_halfspace(x: Vec<f64>, c: Vec<f64>, d: f64) -> PyResult<Vec<f64>> {
    if x.len() != c.len() {
        return Err(DagpError::new_err("x and c differ in length"));
    }
    let set = ConstraintSet::halfspace(DVector::from_vec(c), d);
    Ok(project(&set, &DVector::from_vec(x)).map_err(err)?.iter().copied().collect())
}

/// Entropic transport plan between two histograms.
#[pyfunction]
#[pyo3(signature = (source, target, cost, epsilon=0.05))]
fn sinkhorn(source: Vec<f64>, target: Vec<f64>, cost: Vec<Vec<f64>>, epsilon: f64) -> PyResult<Vec<Vec<f64>>> {
    let inst = OtInstance::new(DVector::from_vec(source), DVector::from_vec(target), matrix(&cost)?).map_err(err)?;
    let opts = SinkhornOptions { epsilon, ..Default::default() };
    Ok(rows(&solvers::run_sinkhorn(&inst, &opts).map_err(err)?))
}

/// Exact transport plan and its cost.
#[pyfunction]
fn transport_lp(source: Vec<f64>, target: Vec<f64>, cost: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let inst = OtInstance::new(DVector::from_vec(source), DVector::from_vec(target), matrix(&cost)?).map_err(err)?;
    let (plan, value) = solvers::solve_transport_lp(&inst).map_err(err)?;
    Ok((rows(&plan), value))
}

type GdRoots = (Option<(f64, f64)>, Vec<(f64, f64)>);

/// Closed-form and numerical pencil roots of the scalar gradient-descent model.
#[pyfunction]
fn gd_roots(l: f64, mu: f64, beta: f64) -> PyResult<GdRoots> {
    let closed = harness::gd_closed_form_roots(l, mu, beta);
    let report = pencil_roots(&build_gd_model(l, mu, beta).map_err(err)?).map_err(err)?;
    Ok((closed, report.roots.iter().map(|r| (r.re, r.im)).collect()))
}

/// Experiment configuration; unset fields take the preset's defaults.
#[pyclass(name = "ExperimentConfig")]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ExperimentConfig::from_toml_str(text).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: ExperimentConfig::load(&path).map_err(err)? })
    }

    #[staticmethod]
    fn presets() -> Vec<&'static str> {
        ExperimentId::ALL.iter().map(|id| id.name()).collect()
    }

    #[getter]
    fn experiment(&self) -> &'static str {
        self.inner.experiment.name()
    }

    #[getter]
    fn output_dir(&self) -> PathBuf {
        self.inner.output_dir.clone()
    }

    #[setter]
    fn set_output_dir(&mut self, dir: PathBuf) {
        self.inner.output_dir = dir;
    }

    /// The resolved configuration as TOML.
    fn echo(&self) -> String {
        self.inner.echo().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Writes the output bundle; returns the summary text and file paths.
    fn run(&self, py: Python<'_>) -> PyResult<(String, Vec<PathBuf>)> {
        let cfg = self.inner.clone();
        let bundle = py.detach(|| harness::run_experiment(&cfg)).map_err(err)?;
        Ok((bundle.summary, bundle.files))
    }

    /// Whether the configured step sizes are certified, with the report.
    fn check_params(&self, py: Python<'_>) -> PyResult<(bool, String)> {
        let cfg = self.inner.clone();
        py.detach(|| harness::check_params_report(&cfg)).map_err(err)
    }
}

#[pymodule]
fn dagp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DagpError", m.py().get_type::<DagpError>())?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyConfig>()?;
    m.add_function(wrap_pyfunction!(solve_dagp, m)?)?;
    m.add_function(wrap_pyfunction!(py_project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(project_halfspace, m)?)?;
    m.add_function(wrap_pyfunction!(sinkhorn, m)?)?;
    m.add_function(wrap_pyfunction!(transport_lp, m)?)?;
    m.add_function(wrap_pyfunction!(gd_roots, m)?)?;
    Ok(())
}
