//! Benchmark harness for the smoothing toolkit: run specifications, solver
//! execution with CSV traces and JSON summaries, the convergence-rate
//! diagnostic, a subgradient-descent baseline, and the property suite that
//! backs the `suite` CLI subcommand.

pub mod baseline;
pub mod checks;
pub mod rate;
pub mod report;
pub mod run;
pub mod runspec;
pub mod trace;

pub use baseline::{run_baseline_subgradient, BaselineOutcome};
pub use rate::{estimate_rate, RateEstimate};
pub use report::{FileSummary, ReportSummary, StopKind};
pub use run::run_from_spec;
pub use runspec::{AlgorithmKind, DomainKind, EstimatorKind, RunSpec};

/// Harness-level error; the variant decides the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Core(#[from] steklov_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file `{path}`: {reason}")]
    Malformed { path: String, reason: String },
    #[error("need at least {needed} iteration records, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl HarnessError {
    /// CLI contract: 0 success, 1 solver failure, 2 config error,
    /// 3 property-suite failure (handled by the suite runner).
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
