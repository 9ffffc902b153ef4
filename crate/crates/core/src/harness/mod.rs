//! Experiment driver shared by the command line and the test suites:
//! per-solve reports, offset sweeps and re-validation of stored results.

mod report;
mod sweep;
mod validate;

use crate::joint::JointError;
use crate::optimizer::MilpStatus;

pub use report::{fixed, report_csv, report_text, RunReport};
pub use sweep::{offset_case, run_sweep, sweep_csv, SweepOutcome, SweepRow, SweepSpec, SweepTarget};
pub use validate::{validate_result, Check, Validation};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("bad sweep spec: {0}")]
    Spec(String),
    #[error("the unperturbed solve returned no decision ({0:?})")]
    NoBaseline(MilpStatus),
    #[error(transparent)]
    Joint(#[from] JointError),
}
