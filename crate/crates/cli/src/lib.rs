//! Command-line driver: scenario runner, ledger auditor, and size/timing
//! benchmark.

pub mod bench;
pub mod commands;
pub mod scenario;

pub use bench::{run_bench, BenchReport, SizeReport};
pub use commands::{cmd_audit, cmd_bench, cmd_run, AuditOutcome, RunError, RunOutput};
pub use scenario::{Scenario, ScenarioError};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    /// Invalid scenario or arguments.
    Validation = 2,
    /// An audit check failed or a run disagreed with its expected outcome.
    AuditFailure = 3,
    /// Unreadable, truncated, or corrupt input; output not writable.
    Io = 4,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}
