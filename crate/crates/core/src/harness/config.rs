use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_BETAS;
use crate::error::{Error, Result};

/// The runnable presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    LogcoshSetup1,
    LogcoshSetup2,
    Logistic,
    OtScaling,
    OtPlan,
    ParamScan,
    GdCheck,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::LogcoshSetup1,
        ExperimentId::LogcoshSetup2,
        ExperimentId::Logistic,
        ExperimentId::OtScaling,
        ExperimentId::OtPlan,
        ExperimentId::ParamScan,
        ExperimentId::GdCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::LogcoshSetup1 => "logcosh_setup1",
            ExperimentId::LogcoshSetup2 => "logcosh_setup2",
            ExperimentId::Logistic => "logistic",
            ExperimentId::OtScaling => "ot_scaling",
            ExperimentId::OtPlan => "ot_plan",
            ExperimentId::ParamScan => "param_scan",
            ExperimentId::GdCheck => "gd_check",
        }
    }

    /// Solvers a preset may run; the first entries are the defaults.
    pub fn allowed_solvers(self) -> &'static [SolverId] {
        match self {
            ExperimentId::LogcoshSetup1 | ExperimentId::LogcoshSetup2 => &[SolverId::Dagp, SolverId::Ddps],
            ExperimentId::Logistic => &[SolverId::Dagp, SolverId::PushPull, SolverId::AddOpt],
            ExperimentId::OtScaling | ExperimentId::OtPlan => &[SolverId::Dagp, SolverId::Sinkhorn, SolverId::Lp],
            ExperimentId::ParamScan | ExperimentId::GdCheck => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverId {
    Dagp,
    Ddps,
    PushPull,
    AddOpt,
    Sinkhorn,
    Lp,
}

impl SolverId {
    pub fn name(self) -> &'static str {
        match self {
            SolverId::Dagp => "dagp",
            SolverId::Ddps => "ddps",
            SolverId::PushPull => "push_pull",
            SolverId::AddOpt => "add_opt",
            SolverId::Sinkhorn => "sinkhorn",
            SolverId::Lp => "lp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    /// Random strongly connected, degree-balanced digraph.
    Random,
    Complete,
}

/// Resolved experiment configuration; every field is echoed into outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub solvers: Vec<SolverId>,
    pub graph: GraphKind,
    pub nodes: usize,
    pub edge_probability: f64,
    pub graph_seed: u64,
    pub problem_seed: u64,
    pub init_seed: u64,
    pub dim: usize,
    pub samples: usize,
    pub separation: f64,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_file: Option<PathBuf>,
    pub iterations: usize,
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub ddps_c: f64,
    pub ddps_epsilon: f64,
    pub push_pull_step: f64,
    pub add_opt_step: f64,
    pub record_every: usize,
    pub wallclock: bool,
    pub bins: usize,
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub sinkhorn_epsilon: f64,
    pub source_mean: f64,
    pub source_std: f64,
    pub target_mean: f64,
    pub target_std: f64,
    pub smoothness: f64,
    pub eta: f64,
    pub betas: Vec<f64>,
    pub mu_min: f64,
    pub mu_max: f64,
    pub mu_points: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_points: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_points: usize,
    pub gd_pairs: usize,
    pub output_dir: PathBuf,
}

/// On-disk form: flat keys, all optional except `experiment`; unknown keys are errors.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<ExperimentId>,
    pub solvers: Option<Vec<SolverId>>,
    pub graph: Option<GraphKind>,
    pub nodes: Option<usize>,
    pub edge_probability: Option<f64>,
    pub graph_seed: Option<u64>,
    pub problem_seed: Option<u64>,
    pub init_seed: Option<u64>,
    pub dim: Option<usize>,
    pub samples: Option<usize>,
    pub separation: Option<f64>,
    pub lambda: Option<f64>,
    pub data_file: Option<PathBuf>,
    pub iterations: Option<usize>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub ddps_c: Option<f64>,
    pub ddps_epsilon: Option<f64>,
    pub push_pull_step: Option<f64>,
    pub add_opt_step: Option<f64>,
    pub record_every: Option<usize>,
    pub wallclock: Option<bool>,
    pub bins: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub sinkhorn_epsilon: Option<f64>,
    pub source_mean: Option<f64>,
    pub source_std: Option<f64>,
    pub target_mean: Option<f64>,
    pub target_std: Option<f64>,
    pub smoothness: Option<f64>,
    pub eta: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub mu_points: Option<usize>,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub rho_points: Option<usize>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub alpha_points: Option<usize>,
    pub gd_pairs: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn config_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), message: message.into() }
}

impl ExperimentConfig {
    /// Defaults of a preset.
    pub fn preset(id: ExperimentId) -> Self {
        let mut c = ExperimentConfig {
            experiment: id,
            solvers: id.allowed_solvers().to_vec(),
            graph: GraphKind::Random,
            nodes: 10,
            edge_probability: 0.2,
            graph_seed: 1,
            problem_seed: 1,
            init_seed: 1,
            dim: 20,
            samples: 2000,
            separation: 2.0,
            lambda: 1.0 / 2000.0,
            data_file: None,
            iterations: 10_000,
            mu: 0.03,
            rho: 0.1,
            alpha: 0.5,
            ddps_c: 0.3,
            ddps_epsilon: 0.05,
            push_pull_step: 0.5,
            add_opt_step: 0.5,
            record_every: 1,
            wallclock: false,
            bins: 5,
            sizes: vec![5, 10, 20, 40],
            reps: 10,
            sinkhorn_epsilon: 0.05,
            source_mean: 1.0 / 3.0,
            source_std: 0.25,
            target_mean: 2.0 / 3.0,
            target_std: 0.125,
            smoothness: 0.1,
            eta: 0.1,
            betas: DEFAULT_BETAS.to_vec(),
            mu_min: 1e-4,
            mu_max: 10.0,
            mu_points: 26,
            rho_min: 1e-8,
            rho_max: 1e-1,
            rho_points: 8,
            alpha_min: 0.05,
            alpha_max: 0.95,
            alpha_points: 10,
            gd_pairs: 50,
            output_dir: PathBuf::from("out").join(id.name()),
        };
        match id {
            ExperimentId::LogcoshSetup1 => {}
            ExperimentId::LogcoshSetup2 => {
                c.nodes = 20;
                c.dim = 10;
            }
            ExperimentId::Logistic => {
                c.nodes = 20;
                c.dim = 10;
                c.edge_probability = 0.1;
                c.iterations = 1500;
                c.mu = 0.5;
                c.rho = 0.5;
                c.alpha = 0.5;
            }
            ExperimentId::OtPlan => {
                c.graph = GraphKind::Complete;
                c.nodes = 5;
                c.iterations = 5000;
                c.mu = 0.1;
                c.rho = 0.1;
            }
            ExperimentId::OtScaling => {
                c.graph = GraphKind::Complete;
                c.nodes = 5;
                c.iterations = 20_000;
                c.mu = 0.03;
                c.rho = 0.5;
                c.wallclock = true;
            }
            ExperimentId::ParamScan => {
                c.graph = GraphKind::Complete;
                c.nodes = 4;
                c.mu = 1e-2;
                c.rho = 1e-6;
            }
            ExperimentId::GdCheck => {}
        }
        c
    }

    /// Parses a flat TOML document and fills the gaps from the preset.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err("<document>", e.message().to_string()))?;
        Self::from_raw(raw)
    }

    /// Reads a config file and checks that referenced files exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err("<file>", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(f), Some(dir)) = (&cfg.data_file, path.parent()) {
            if f.is_relative() {
                cfg.data_file = Some(dir.join(f));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let id = raw.experiment.ok_or_else(|| config_err("experiment", "missing"))?;
        let mut c = Self::preset(id);
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = raw.$f { c.$f = v; })* };
        }
        take!(
            solvers, graph, nodes, edge_probability, graph_seed, problem_seed, init_seed, dim, samples, separation,
            iterations, mu, rho, alpha, ddps_c, ddps_epsilon, push_pull_step, add_opt_step, record_every, wallclock,
            bins, sizes, reps, sinkhorn_epsilon, source_mean, source_std, target_mean, target_std, smoothness, eta,
            betas, mu_min, mu_max, mu_points, rho_min, rho_max, rho_points, alpha_min, alpha_max,
            alpha_points, gd_pairs, output_dir
        );
        c.data_file = raw.data_file;
        c.lambda = raw.lambda.unwrap_or(1.0 / c.samples.max(1) as f64);
        c.validate()?;
        Ok(c)
    }

    /// Field-level checks.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(config_err(name, format!("must be positive, got {v}")))
            }
        };
        let at_least = |name: &str, v: usize, min: usize| {
            if v >= min {
                Ok(())
            } else {
                Err(config_err(name, format!("must be at least {min}, got {v}")))
            }
        };
        for (name, v) in [
            ("mu", self.mu),
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("ddps_c", self.ddps_c),
            ("push_pull_step", self.push_pull_step),
            ("add_opt_step", self.add_opt_step),
            ("sinkhorn_epsilon", self.sinkhorn_epsilon),
            ("source_std", self.source_std),
            ("target_std", self.target_std),
            ("smoothness", self.smoothness),
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("separation", self.separation),
            ("mu_min", self.mu_min),
            ("mu_max", self.mu_max),
            ("rho_min", self.rho_min),
            ("rho_max", self.rho_max),
            ("alpha_min", self.alpha_min),
            ("alpha_max", self.alpha_max),
        ] {
            positive(name, v)?;
        }
        if !(self.ddps_epsilon >= 0.0 && self.ddps_epsilon.is_finite()) {
            return Err(config_err("ddps_epsilon", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return Err(config_err("edge_probability", "must lie in [0, 1]"));
        }
        at_least("nodes", self.nodes, 1)?;
        at_least("dim", self.dim, 1)?;
        at_least("samples", self.samples, 1)?;
        at_least("record_every", self.record_every, 1)?;
        at_least("bins", self.bins, 1)?;
        at_least("reps", self.reps, 1)?;
        at_least("mu_points", self.mu_points, 1)?;
        at_least("rho_points", self.rho_points, 1)?;
        at_least("alpha_points", self.alpha_points, 1)?;
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(config_err("sizes", "needs at least one positive size"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(*b > 0.0)) {
            return Err(config_err("betas", "needs at least one positive value"));
        }
        if self.mu_min > self.mu_max || self.rho_min > self.rho_max || self.alpha_min > self.alpha_max {
            return Err(config_err("mu_min", "grid lower ends must not exceed upper ends"));
        }
        let allowed = self.experiment.allowed_solvers();
        if let Some(s) = self.solvers.iter().find(|s| !allowed.contains(s)) {
            return Err(config_err("solvers", format!("{} is not available for {}", s.name(), self.experiment.name())));
        }
        if let Some(f) = &self.data_file {
            if self.experiment != ExperimentId::Logistic {
                return Err(config_err("data_file", "only the logistic preset reads data"));
            }
            if !f.is_file() {
                return Err(config_err("data_file", format!("{} does not exist", f.display())));
            }
        }
        Ok(())
    }

    /// `(key, value)` pairs of every field, in declaration order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let table = value.as_table().expect("config is a table");
        let mut out: Vec<(String, String)> = table.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        out.sort_by_key(|(k, _)| field_rank(k));
        out
    }
}

const FIELD_ORDER: [&str; 45] = [
    "experiment", "solvers", "graph", "nodes", "edge_probability", "graph_seed", "problem_seed", "init_seed", "dim",
    "samples", "separation", "lambda", "data_file", "iterations", "mu", "rho", "alpha", "ddps_c", "ddps_epsilon",
    "push_pull_step", "add_opt_step", "record_every", "wallclock", "bins", "sizes", "reps", "sinkhorn_epsilon",
    "source_mean", "source_std", "target_mean", "target_std", "smoothness", "eta", "betas", "mu_min", "mu_max",
    "mu_points", "rho_min", "rho_max", "rho_points", "alpha_min", "alpha_max", "alpha_points", "gd_pairs",
    "output_dir",
];

fn field_rank(k: &str) -> usize {
    FIELD_ORDER.iter().position(|f| *f == k).unwrap_or(FIELD_ORDER.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_overrides_and_lambda_default() {
        let c = ExperimentConfig::from_toml_str("experiment = \"logistic\"\nsamples = 400\nmu = 0.25\n").unwrap();
        assert_eq!(c.nodes, 20);
        assert_eq!(c.mu, 0.25);
        assert_eq!(c.lambda, 1.0 / 400.0);
        assert_eq!(c.solvers, vec![SolverId::Dagp, SolverId::PushPull, SolverId::AddOpt]);
    }

    #[test]
    fn unknown_keys_and_bad_values_name_the_field() {
        let e = ExperimentConfig::from_toml_str("experiment = \"gd_check\"\nstepsize = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { .. }));
        assert!(e.to_string().contains("stepsize"));
        let e = ExperimentConfig::from_toml_str("experiment = \"logcosh_setup1\"\nmu = -1.0\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "mu"));
        let e = ExperimentConfig::from_toml_str("mu = 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "experiment"));
        let e = ExperimentConfig::from_toml_str("experiment = \"logistic\"\nsolvers = [\"ddps\"]\n").unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "solvers"));
    }

    #[test]
    fn missing_data_file_is_rejected() {
        let e = ExperimentConfig::from_toml_str("experiment = \"logistic\"\ndata_file = \"/nonexistent/x.csv\"\n")
            .unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "data_file"));
    }

    #[test]
    fn echo_covers_every_field() {
        for id in ExperimentId::ALL {
            let c = ExperimentConfig::preset(id);
            c.validate().unwrap();
            let echo = c.echo();
            assert_eq!(echo[0], ("experiment".to_string(), format!("\"{}\"", id.name())));
            assert_eq!(echo.len(), 44);
            assert!(echo.iter().all(|(k, _)| field_rank(k) < 45));
        }
    }
}
