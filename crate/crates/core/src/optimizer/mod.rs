//! LP engine, branch-and-bound, exhaustive oracle, MPS export and KKT
//! residual checking.

pub mod brute;
pub mod kkt;
pub mod lp;
pub mod milp;
pub mod model;
pub mod mps;
pub mod propagate;
pub mod simplex;

use thiserror::Error;

pub use brute::{solve_brute_force, BRUTE_FORCE_LIMIT};
pub use kkt::{check_euc_kkt, check_kkt_residuals, check_wem_kkt, Condition, KktError, KktReport};
pub use lp::{solve_lp, LpSolution, LpStatus};
pub use milp::{relative_gap, solve_milp, Branching, MilpOptions, MilpSolution, MilpStatus, RoundingRule, TracePoint};
pub use model::{Model, RowSense, Sense, VarKind};
pub use mps::{export_mps, MpsExport};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("simplex iteration limit reached ({0} iterations)")]
    IterationLimit(usize),
    #[error("model has {count} binaries; exhaustive search is capped at {limit}")]
    TooManyBinaries { count: usize, limit: usize },
}
