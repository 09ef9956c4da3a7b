//! Checks of the convergence analysis: the `R`, `S`, `P` matrices, the pencil
//! `F_beta(z)`, its roots and null vectors, parameter scans and the aggregate
//! `A_K` along trajectories.

mod aggregate;
mod lemma;
mod model;
mod pencil;
mod scan;

pub use aggregate::{aggregate_a_k, stacked_states, AggregateTrace};
pub use lemma::{
    check_lemma_conditions, check_lemma_conditions_at, BetaVerdict, LemmaVerdict, LimitVerdict, DEFAULT_BETAS,
    LIMIT_BETAS, LIMIT_GROWTH, LIMIT_PROBES,
};
pub use model::{build_gd_model, build_spectral_model, SpectralModel, SpectralParams};
pub use pencil::{
    pencil_eigenvalues, pencil_roots, PencilRoot, RootReport, CLASSIFY_TOL, CLUSTER_TOL, RANK_TOL, REAL_TOL,
    ROOT_GAP, SIMPLE_MARGIN,
};
pub use scan::{log_grid, scan_mu_region, scan_rho_alpha_region, MuScan, MuScanPoint, RhoAlphaScan};
