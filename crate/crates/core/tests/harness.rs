use std::fs;
use std::process::Command;

use dagp_core::harness::{run_experiment, ExperimentConfig, ExperimentId};
use dagp_core::solvers::TRACE_HEADER;

fn small(id: ExperimentId, dir: &std::path::Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(id);
    c.output_dir = dir.to_path_buf();
    c.iterations = c.iterations.min(200);
    c.sizes = vec![3, 4];
    c.reps = 2;
    c.mu_points = 4;
    c.rho_points = 2;
    c.alpha_points = 2;
    c.gd_pairs = 5;
    c
}

#[test]
fn empty_budget_gives_header_only_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { iterations: 0, ..small(ExperimentId::LogcoshSetup1, dir.path()) };
    let bundle = run_experiment(&cfg).unwrap();
    let traces: Vec<_> = bundle.files.iter().filter(|p| p.to_str().unwrap().ends_with(".csv")).collect();
    assert_eq!(traces.len(), 4);
    for t in traces {
        let text = fs::read_to_string(t).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec![TRACE_HEADER]);
    }
}

#[test]
fn every_file_carries_the_config_echo() {
    for id in ExperimentId::ALL {
        let dir = tempfile::tempdir().unwrap();
        let bundle = run_experiment(&small(id, dir.path())).unwrap();
        assert!(!bundle.files.is_empty());
        for f in &bundle.files {
            let text = fs::read_to_string(f).unwrap();
            assert!(text.starts_with(&format!("# experiment = \"{}\"\n", id.name())), "{}", f.display());
            assert!(text.contains("# output_dir = "), "{}", f.display());
        }
        assert!(bundle.summary.lines().all(|l| l.contains(" = ")));
    }
}

#[test]
fn ot_plan_bundle_compares_three_plans() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { iterations: 3000, ..small(ExperimentId::OtPlan, dir.path()) };
    let bundle = run_experiment(&cfg).unwrap();
    for name in ["dagp_plan.txt", "sinkhorn_plan.txt", "lp_plan.txt"] {
        let plan = dagp_core::problems::load_matrix_text(&dir.path().join(name)).unwrap();
        assert_eq!(plan.shape(), (5, 5));
    }
    for key in ["dagp.sparsity", "sinkhorn.sparsity", "lp.sparsity", "dagp.cost", "lp.cost"] {
        assert!(bundle.summary.contains(key), "{key}");
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dagp-sim")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "experiment = \"gd_check\"\nstep = 3\n").unwrap();
    let out = cli(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));

    let missing = dir.path().join("missing.toml");
    fs::write(&missing, "experiment = \"logistic\"\ndata_file = \"nope.csv\"\n").unwrap();
    assert_eq!(cli(&["run", missing.to_str().unwrap()]).status.code(), Some(2));

    // passes validation, fails inside the graph builder
    let solver = dir.path().join("solver.toml");
    let out_dir = dir.path().join("solver_out");
    fs::write(&solver, format!("experiment = \"logcosh_setup1\"\nnodes = 1\noutput_dir = {:?}\n", out_dir.to_str().unwrap())).unwrap();
    assert_eq!(cli(&["run", solver.to_str().unwrap()]).status.code(), Some(3));

    let good = dir.path().join("good.toml");
    let out_dir = dir.path().join("gd");
    fs::write(&good, format!("experiment = \"gd_check\"\ngd_pairs = 3\noutput_dir = {:?}\n", out_dir.to_str().unwrap())).unwrap();
    let out = cli(&["run", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mu=0.99/L.pass = 3/3"));
    assert!(out_dir.join("gd_check.csv").is_file());

    let scan = dir.path().join("scan.toml");
    let out_dir = dir.path().join("scan");
    fs::write(
        &scan,
        format!("experiment = \"param_scan\"\nmu_points = 3\nrho_points = 2\nalpha_points = 2\noutput_dir = {:?}\n", out_dir.to_str().unwrap()),
    )
    .unwrap();
    assert_eq!(cli(&["scan", scan.to_str().unwrap()]).status.code(), Some(0));
    assert!(out_dir.join("mu_scan.csv").is_file());
    let out = cli(&["check-params", scan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("certified = "));
}
