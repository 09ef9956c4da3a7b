//! Experiment presets, flat TOML configs, rate fits and CSV bundles.

mod config;
mod fit;
mod gd;
mod run;

pub use config::{ExperimentConfig, ExperimentId, GraphKind, RawConfig, SolverId};
pub use fit::{
    fit_linear_rate, fit_rate, ot_stopping_check, Metric, RateFit, MIN_FIT_POINTS, OT_DISTANCE_TOL, OT_OBJECTIVE_TOL,
};
pub use gd::{gd_check_pair, gd_closed_form_roots, random_gd_pairs, GdCheck, GD_CSV_HEADER, GD_MATCH_TOL};
pub use run::{
    build_gossip, bundle_file, check_params_report, csv_body, logistic_problem, ot_instance, run_experiment,
    spectral_params, OutputBundle, FIT_START, LINEAR_FIT_FLOOR, SCALING_HEADER, SPARSITY_THRESHOLD,
};
