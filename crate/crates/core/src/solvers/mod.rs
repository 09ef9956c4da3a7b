//! The DAGP engine, baseline methods and reference solvers.

mod baselines;
mod dagp;
mod reference;
mod sinkhorn;
mod trace;
mod transport_lp;

pub use baselines::{run_add_opt, run_ddps, run_push_pull, BaselineRun, DdpsParams, StepParams};
pub use dagp::{dagp_round, random_initial_states, run_dagp, run_dagp_until, DagpParams, DagpRun, NodeState, INITIAL_H_SUM_TOL};
pub use reference::{centralized_reference, ReferenceOptions};
pub use sinkhorn::{run_sinkhorn, sparsity, SinkhornOptions};
pub use trace::{write_trace_csv, RecordOptions, SolverTrace, TraceRecord, TRACE_HEADER};
pub use transport_lp::{solve_transport_lp, LP_MAX_CELLS};
