use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::analysis::{
    build_spectral_model, check_lemma_conditions_at, log_grid, scan_mu_region, scan_rho_alpha_region,
    SpectralParams,
};
use crate::error::{Error, Result};
use crate::graph::{build_gossip_matrices, random_strongly_connected_graph, DirectedGraph, GossipPair};
use crate::harness::config::{ExperimentConfig, ExperimentId, GraphKind, SolverId};
use crate::harness::fit::{fit_linear_rate, fit_rate, ot_stopping_check, Metric, RateFit};
use crate::harness::gd::{gd_check_pair, random_gd_pairs, GD_CSV_HEADER};
use crate::problems::{
    build_logcosh_problem, build_logistic_problem, build_ot_problem, load_samples_csv, synthetic_two_clusters,
    DecentralizedProblem, OtInstance, Reference,
};
use crate::solvers::{
    centralized_reference, random_initial_states, run_add_opt, run_dagp, run_dagp_until, run_ddps, run_push_pull,
    run_sinkhorn, solve_transport_lp, sparsity, write_trace_csv, DagpParams, DdpsParams, NodeState, RecordOptions,
    ReferenceOptions, SinkhornOptions, SolverTrace, StepParams, TraceRecord, LP_MAX_CELLS,
};

/// First iteration of the log-log fit window.
pub const FIT_START: usize = 100;
/// Gaps at or below this are left out of the linear-rate fit.
pub const LINEAR_FIT_FLOOR: f64 = 1e-12;
/// Entries at or below this count as zero in a plan.
pub const SPARSITY_THRESHOLD: f64 = 1e-5;

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    echo: Vec<(String, String)>,
    files: Vec<PathBuf>,
    summary: String,
}

impl Writer {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::from(e).context("creating output directory"))?;
        Ok(Self { dir: cfg.output_dir.clone(), echo: cfg.echo(), files: Vec::new(), summary: String::new() })
    }

    fn header(&self) -> String {
        self.echo.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, format!("{}{body}", self.header())).map_err(|e| Error::from(e).context(format!("writing {name}")))?;
        self.files.push(path);
        Ok(())
    }

    fn trace(&mut self, name: &str, records: &[TraceRecord]) -> Result<()> {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &self.echo, records)?;
        let path = self.dir.join(name);
        fs::write(&path, buf).map_err(|e| Error::from(e).context(format!("writing {name}")))?;
        self.files.push(path);
        Ok(())
    }

    fn traces(&mut self, solver: SolverId, trace: &SolverTrace) -> Result<()> {
        self.trace(&format!("{}_trace.csv", solver.name()), &trace.instantaneous)?;
        self.trace(&format!("{}_averaged.csv", solver.name()), &trace.averaged)
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.summary, "{key} = {value}");
    }

    fn finish(mut self) -> Result<OutputBundle> {
        let summary = std::mem::take(&mut self.summary);
        self.put("summary.txt", &summary)?;
        Ok(OutputBundle { dir: self.dir, files: self.files, summary })
    }
}

fn matrix_text(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn fit_text(fit: Result<RateFit>) -> String {
    match fit {
        Ok(f) => format!("{:.4} (r2 {:.4}, {} points)", f.slope, f.r_squared, f.points),
        Err(e) => format!("n/a ({e})"),
    }
}

fn mean_x(xs: &[DVector<f64>]) -> DVector<f64> {
    let mut s = DVector::zeros(xs[0].len());
    for x in xs {
        s += x;
    }
    s / xs.len() as f64
}

/// Communication graph and gossip pair for a config.
pub fn build_gossip(cfg: &ExperimentConfig) -> Result<(DirectedGraph, GossipPair)> {
    let graph = match cfg.graph {
        GraphKind::Random => random_strongly_connected_graph(cfg.nodes, cfg.edge_probability, cfg.graph_seed)?,
        GraphKind::Complete => DirectedGraph::complete(cfg.nodes)?,
    };
    let gossip = build_gossip_matrices(&graph)?;
    Ok((graph, gossip))
}

fn record_options(cfg: &ExperimentConfig) -> RecordOptions {
    RecordOptions { every: cfg.record_every, wallclock: cfg.wallclock }
}

fn dagp_params(cfg: &ExperimentConfig) -> DagpParams {
    DagpParams { mu: cfg.mu, rho: cfg.rho, alpha: cfg.alpha, iterations: cfg.iterations }
}

fn with_reference(problem: DecentralizedProblem) -> Result<DecentralizedProblem> {
    let r = centralized_reference(&problem, &ReferenceOptions::default()).map_err(|e| e.context("reference solve"))?;
    problem.with_reference(r).map_err(|e| e.context("reference check"))
}

/// Runs one preset and writes its bundle into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<OutputBundle> {
    cfg.validate()?;
    let mut w = Writer::new(cfg)?;
    match cfg.experiment {
        ExperimentId::LogcoshSetup1 | ExperimentId::LogcoshSetup2 => run_logcosh(cfg, &mut w)?,
        ExperimentId::Logistic => run_logistic(cfg, &mut w)?,
        ExperimentId::OtPlan => run_ot_plan(cfg, &mut w)?,
        ExperimentId::OtScaling => run_ot_scaling(cfg, &mut w)?,
        ExperimentId::ParamScan => run_param_scan(cfg, &mut w)?,
        ExperimentId::GdCheck => run_gd_check(cfg, &mut w)?,
    }
    w.finish()
}

fn graph_files(cfg: &ExperimentConfig, w: &mut Writer) -> Result<GossipPair> {
    let (graph, gossip) = build_gossip(cfg).map_err(|e| e.context("building graph"))?;
    w.put("graph_edges.txt", &graph.to_edge_list())?;
    Ok(gossip)
}

fn summarize_trace(w: &mut Writer, solver: SolverId, trace: &SolverTrace, secs: f64) {
    let name = solver.name();
    if let (Some(i), Some(a)) = (trace.instantaneous.last(), trace.averaged.last()) {
        w.line(&format!("{name}.final_obj_gap"), format!("{:e}", i.obj_gap));
        w.line(&format!("{name}.final_feas_max"), format!("{:e}", i.feas_max));
        w.line(&format!("{name}.final_consensus"), format!("{:e}", i.consensus));
        w.line(&format!("{name}.averaged_obj_gap"), format!("{:e}", a.obj_gap));
        w.line(&format!("{name}.averaged_feas_sum"), format!("{:e}", a.feas_sum));
    }
    w.line(&format!("{name}.wallclock_s"), format!("{secs:.3}"));
}

fn run_logcosh(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let gossip = graph_files(cfg, w)?;
    let problem = with_reference(build_logcosh_problem(cfg.nodes, cfg.dim, cfg.problem_seed)?)?;
    w.line("f_star", format!("{:e}", problem.reference().map_or(0.0, |r| r.f_star)));
    let init = random_initial_states(&problem, cfg.init_seed);
    let x0: Vec<DVector<f64>> = init.iter().map(|s| s.x.clone()).collect();
    let rec = record_options(cfg);
    for &solver in &cfg.solvers {
        let start = Instant::now();
        let (trace, xs) = match solver {
            SolverId::Dagp => {
                let run = run_dagp(&problem, &gossip, &dagp_params(cfg), init.clone(), &rec, false)
                    .map_err(|e| e.context("DAGP run"))?;
                (run.trace, run.states.into_iter().map(|s| s.x).collect::<Vec<_>>())
            }
            SolverId::Ddps => {
                let p = DdpsParams { c: cfg.ddps_c, epsilon: cfg.ddps_epsilon, iterations: cfg.iterations };
                let run = run_ddps(&problem, &gossip, &p, x0.clone(), &rec).map_err(|e| e.context("DDPS run"))?;
                (run.trace, run.solutions)
            }
            other => return Err(Error::Config { field: "solvers".into(), message: format!("{} unsupported", other.name()) }),
        };
        let secs = start.elapsed().as_secs_f64();
        w.traces(solver, &trace)?;
        w.put(&format!("{}_solution.txt", solver.name()), &matrix_text(&DMatrix::from_row_slice(1, problem.dim(), mean_x(&xs).as_slice())))?;
        summarize_trace(w, solver, &trace, secs);
        let name = solver.name();
        w.line(
            &format!("{name}.slope_averaged_feas_sum"),
            fit_text(fit_rate(&trace.averaged, Metric::FeasSum, FIT_START, cfg.iterations)),
        );
        w.line(
            &format!("{name}.slope_averaged_feas_max"),
            fit_text(fit_rate(&trace.averaged, Metric::FeasMax, FIT_START, cfg.iterations)),
        );
        w.line(
            &format!("{name}.slope_averaged_abs_obj_gap"),
            fit_text(fit_rate(&trace.averaged, Metric::AbsObjGap, FIT_START, cfg.iterations)),
        );
    }
    Ok(())
}

/// Builds the logistic-regression problem of a config, with its reference attached.
pub fn logistic_problem(cfg: &ExperimentConfig) -> Result<DecentralizedProblem> {
    let data = match &cfg.data_file {
        Some(path) => load_samples_csv(path).map_err(|e| e.context(format!("loading {}", path.display())))?,
        None => synthetic_two_clusters(cfg.samples, cfg.dim, cfg.separation, cfg.problem_seed)?,
    };
    with_reference(build_logistic_problem(&data, cfg.nodes, cfg.lambda, cfg.problem_seed)?)
}

fn run_logistic(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let gossip = graph_files(cfg, w)?;
    let problem = logistic_problem(cfg)?;
    w.line("f_star", format!("{:e}", problem.reference().map_or(0.0, |r| r.f_star)));
    let init = random_initial_states(&problem, cfg.init_seed);
    let x0: Vec<DVector<f64>> = init.iter().map(|s| s.x.clone()).collect();
    let rec = record_options(cfg);
    for &solver in &cfg.solvers {
        let start = Instant::now();
        let trace = match solver {
            SolverId::Dagp => {
                run_dagp(&problem, &gossip, &dagp_params(cfg), init.clone(), &rec, false)
                    .map_err(|e| e.context("DAGP run"))?
                    .trace
            }
            SolverId::PushPull => {
                let p = StepParams { step: cfg.push_pull_step, iterations: cfg.iterations };
                run_push_pull(&problem, &gossip, &p, x0.clone(), &rec).map_err(|e| e.context("Push-Pull run"))?.trace
            }
            SolverId::AddOpt => {
                let p = StepParams { step: cfg.add_opt_step, iterations: cfg.iterations };
                run_add_opt(&problem, &gossip, &p, x0.clone(), &rec).map_err(|e| e.context("ADD-OPT run"))?.trace
            }
            other => return Err(Error::Config { field: "solvers".into(), message: format!("{} unsupported", other.name()) }),
        };
        let secs = start.elapsed().as_secs_f64();
        w.traces(solver, &trace)?;
        summarize_trace(w, solver, &trace, secs);
        w.line(
            &format!("{}.linear_rate_abs_obj_gap", solver.name()),
            fit_text(fit_linear_rate(&trace.instantaneous, Metric::AbsObjGap, 1, cfg.iterations, LINEAR_FIT_FLOOR)),
        );
    }
    Ok(())
}

/// Gaussian-bin transport instance of a config with `n` bins.
pub fn ot_instance(cfg: &ExperimentConfig, n: usize) -> Result<OtInstance> {
    OtInstance::gaussian(n, (cfg.source_mean, cfg.source_std), (cfg.target_mean, cfg.target_std))
}

fn zero_states(problem: &DecentralizedProblem) -> Vec<NodeState> {
    (0..problem.node_count()).map(|_| NodeState::at(DVector::zeros(problem.dim()))).collect()
}

/// Exact plan and cost when the instance is small enough for enumeration.
fn exact_plan(inst: &OtInstance) -> Result<Option<(DMatrix<f64>, f64)>> {
    if inst.rows() * inst.cols() > LP_MAX_CELLS {
        return Ok(None);
    }
    solve_transport_lp(inst).map(Some).map_err(|e| e.context("exact transport LP"))
}

fn ot_problem(cfg: &ExperimentConfig, inst: &OtInstance, lp: Option<&(DMatrix<f64>, f64)>) -> Result<DecentralizedProblem> {
    let problem = build_ot_problem(inst, cfg.nodes)?;
    match lp {
        Some((plan, cost)) => problem.with_reference(Reference { x_star: inst.flatten(plan), f_star: *cost, normals: None }),
        None => Ok(problem),
    }
}

fn ot_gossip(cfg: &ExperimentConfig) -> Result<GossipPair> {
    Ok(build_gossip(cfg).map_err(|e| e.context("building graph"))?.1)
}

fn stopped(t: &[TraceRecord]) -> bool {
    t.len() >= 2 && ot_stopping_check(&t[t.len() - 2..])
}

fn run_ot_plan(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let gossip = graph_files(cfg, w)?;
    let inst = ot_instance(cfg, cfg.bins)?;
    let lp = exact_plan(&inst)?;
    let problem = ot_problem(cfg, &inst, lp.as_ref())?;
    let summary = |w: &mut Writer, solver: SolverId, plan: &DMatrix<f64>| {
        let name = solver.name();
        w.line(&format!("{name}.cost"), format!("{:.10e}", inst.cost_of(plan)));
        w.line(&format!("{name}.marginal_violation"), format!("{:e}", inst.plan_violation(plan)));
        w.line(&format!("{name}.sparsity"), format!("{:.4}", sparsity(plan, SPARSITY_THRESHOLD)));
    };
    for &solver in &cfg.solvers {
        let start = Instant::now();
        let plan = match solver {
            SolverId::Dagp => {
                let run = run_dagp(&problem, &gossip, &dagp_params(cfg), zero_states(&problem), &record_options(cfg), false)
                    .map_err(|e| e.context("DAGP run"))?;
                w.traces(solver, &run.trace)?;
                let first = (2..=run.trace.instantaneous.len()).find(|&k| stopped(&run.trace.instantaneous[..k]));
                w.line("dagp.stopping_iteration", first.map_or("not reached".to_string(), |k| run.trace.instantaneous[k - 1].iter.to_string()));
                let xs: Vec<DVector<f64>> = run.states.into_iter().map(|s| s.x).collect();
                inst.unflatten(&mean_x(&xs))
            }
            SolverId::Sinkhorn => run_sinkhorn(&inst, &SinkhornOptions { epsilon: cfg.sinkhorn_epsilon, ..Default::default() })
                .map_err(|e| e.context("Sinkhorn run"))?,
            SolverId::Lp => match &lp {
                Some((plan, _)) => plan.clone(),
                None => {
                    w.line("lp", format!("skipped, more than {LP_MAX_CELLS} cells"));
                    continue;
                }
            },
            other => return Err(Error::Config { field: "solvers".into(), message: format!("{} unsupported", other.name()) }),
        };
        let secs = start.elapsed().as_secs_f64();
        w.put(&format!("{}_plan.txt", solver.name()), &matrix_text(&plan))?;
        summary(w, solver, &plan);
        w.line(&format!("{}.wallclock_s", solver.name()), format!("{secs:.3}"));
    }
    Ok(())
}

pub const SCALING_HEADER: &str = "solver,n,rep,rounds,converged,cost,marginal_violation,wallclock_s";

fn run_ot_scaling(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let gossip = ot_gossip(cfg)?;
    let mut rows = format!("{SCALING_HEADER}\n");
    for &n in &cfg.sizes {
        let inst = ot_instance(cfg, n)?;
        let lp = exact_plan(&inst)?;
        let problem = ot_problem(cfg, &inst, lp.as_ref()).map_err(|e| e.context(format!("transport problem n={n}")))?;
        for &solver in &cfg.solvers {
            let mut total = 0.0;
            let mut done = 0usize;
            for rep in 0..cfg.reps {
                let start = Instant::now();
                let (rounds, converged, plan) = match solver {
                    SolverId::Dagp => {
                        let init = zero_states(&problem);
                        let rec = RecordOptions { every: 1, wallclock: false };
                        let run = run_dagp_until(&problem, &gossip, &dagp_params(cfg), init, &rec, false, &stopped)
                            .map_err(|e| e.context(format!("DAGP run n={n} rep={rep}")))?;
                        let conv = stopped(&run.trace.instantaneous);
                        let xs: Vec<DVector<f64>> = run.states.into_iter().map(|s| s.x).collect();
                        (run.rounds, conv, inst.unflatten(&mean_x(&xs)))
                    }
                    SolverId::Sinkhorn => {
                        let opts = SinkhornOptions { epsilon: cfg.sinkhorn_epsilon, ..Default::default() };
                        (0, true, run_sinkhorn(&inst, &opts).map_err(|e| e.context(format!("Sinkhorn n={n}")))?)
                    }
                    SolverId::Lp => match &lp {
                        Some((plan, _)) => (0, true, plan.clone()),
                        None => break,
                    },
                    other => return Err(Error::Config { field: "solvers".into(), message: format!("{} unsupported", other.name()) }),
                };
                let secs = if cfg.wallclock { start.elapsed().as_secs_f64() } else { 0.0 };
                total += secs;
                done += 1;
                let _ = writeln!(
                    rows,
                    "{},{n},{rep},{rounds},{converged},{:.10e},{:e},{:e}",
                    solver.name(),
                    inst.cost_of(&plan),
                    inst.plan_violation(&plan),
                    secs
                );
            }
            if done > 0 {
                w.line(&format!("{}.n{n}.mean_wallclock_s", solver.name()), format!("{:e}", total / done as f64));
            }
        }
    }
    w.put("scaling.csv", &rows)
}

/// Spectral parameters of a config at its `mu`.
pub fn spectral_params(cfg: &ExperimentConfig) -> SpectralParams {
    SpectralParams { l: cfg.smoothness, mu: cfg.mu, rho: cfg.rho, alpha: cfg.alpha, eta: cfg.eta, beta: 1.0 }
}

/// Lemma checks at the config's parameters, as a text report.
pub fn check_params_report(cfg: &ExperimentConfig) -> Result<(bool, String)> {
    let gossip = ot_gossip(cfg)?;
    let model = build_spectral_model(&gossip, &spectral_params(cfg))?;
    let verdict = check_lemma_conditions_at(&model, &cfg.betas)?;
    Ok((verdict.certified(), verdict.to_text()))
}

fn run_param_scan(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let gossip = graph_files(cfg, w)?;
    let base = spectral_params(cfg);
    let mus = log_grid(cfg.mu_min, cfg.mu_max, cfg.mu_points)?;
    let scan = scan_mu_region(&gossip, &base, &mus, &cfg.betas).map_err(|e| e.context("mu scan"))?;
    w.put("mu_scan.csv", &scan.to_csv())?;
    let rhos = log_grid(cfg.rho_min, cfg.rho_max, cfg.rho_points)?;
    let alphas: Vec<f64> = if cfg.alpha_points == 1 {
        vec![cfg.alpha_min]
    } else {
        (0..cfg.alpha_points)
            .map(|i| cfg.alpha_min + (cfg.alpha_max - cfg.alpha_min) * i as f64 / (cfg.alpha_points - 1) as f64)
            .collect()
    };
    let grid = scan_rho_alpha_region(&gossip, &base, &rhos, &alphas, &cfg.betas).map_err(|e| e.context("rho/alpha scan"))?;
    w.put("rho_alpha_scan.csv", &grid.to_csv())?;
    let model = build_spectral_model(&gossip, &base)?;
    let verdict = check_lemma_conditions_at(&model, &cfg.betas)?;
    w.put("lemma_report.txt", &verdict.to_text())?;
    w.line("mu0", scan.mu0.map_or("none".to_string(), |m| format!("{m:e}")));
    w.line("mu_pass_count", format!("{}/{}", scan.mask().iter().filter(|p| **p).count(), mus.len()));
    w.line(&format!("mu={:e}.certified", cfg.mu), verdict.certified());
    w.line(&format!("mu={:e}.heuristic", cfg.mu), verdict.heuristic());
    w.line("rho_alpha_pass_count", format!("{}/{}", grid.feasible_count(), rhos.len() * alphas.len()));
    Ok(())
}

fn run_gd_check(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let mut rows = format!("{GD_CSV_HEADER}\n");
    let mut pass = [0usize; 2];
    for (i, (l, beta)) in random_gd_pairs(cfg.gd_pairs, cfg.problem_seed).into_iter().enumerate() {
        for (slot, factor) in [0.99, 1.01].into_iter().enumerate() {
            let c = gd_check_pair(l, factor / l, beta).map_err(|e| e.context(format!("gd pair {i}")))?;
            pass[slot] += usize::from(c.pass());
            rows.push_str(&c.csv_row(i));
            rows.push('\n');
        }
    }
    let hand = gd_check_pair(1.0, 0.5, 1.0)?;
    w.put("gd_check.csv", &rows)?;
    w.line("mu=0.99/L.pass", format!("{}/{}", pass[0], cfg.gd_pairs));
    w.line("mu=1.01/L.pass", format!("{}/{}", pass[1], cfg.gd_pairs));
    w.line("hand_instance.roots", format!("{:.12} {:.12}", hand.roots[0].0, hand.roots[1].0));
    w.line("hand_instance.pass", hand.pass());
    Ok(())
}

/// Path of a file inside a bundle.
pub fn bundle_file(bundle: &OutputBundle, name: &str) -> Option<PathBuf> {
    bundle.files.iter().find(|p| p.file_name().is_some_and(|f| f == name)).cloned()
}

/// Lines of a bundle file that are not config echo lines.
pub fn csv_body(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect())
}
