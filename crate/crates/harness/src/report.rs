//! Run summaries.
//!
//! The summary file is a single JSON document with every field recomputable
//! from the trace (plus the run specification); the measured wall time is
//! reported in memory and on stdout but kept out of the file so identical
//! runs produce byte-identical artifacts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use steklov_core::solver::StopReason;

use crate::runspec::{AlgorithmKind, DomainKind};
use crate::trace::write_atomic;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    StepTol,
    MaxIters,
    LineSearchExhausted,
}

impl From<StopReason> for StopKind {
    fn from(r: StopReason) -> StopKind {
        match r {
            StopReason::StepTol => StopKind::StepTol,
            StopReason::MaxIters => StopKind::MaxIters,
            StopReason::LineSearchExhausted => StopKind::LineSearchExhausted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub a0: f64,
    pub target_distance: f64,
    pub max_iters: u64,
    /// Iterations the baseline needed to match the target; `null` when the
    /// budget ran out first.
    pub iterations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileSummary {
    pub problem: String,
    pub dim: usize,
    pub algorithm: AlgorithmKind,
    pub domain: DomainKind,
    pub stop_reason: StopKind,
    pub iterations: u64,
    pub x_final: Vec<f64>,
    /// Distance to the known minimizer in the domain norm (Euclidean for
    /// balls, max-coordinate for cubes).
    pub distance_to_known_minimizer: f64,
    /// Containment radius of `x_final + 2 D_final`.
    pub eps2d_radius: f64,
    pub eps2d_satisfied: bool,
    /// Last step-norm ratio; zero when fewer than two iterations ran.
    pub final_ratio: f64,
    pub ratio_series: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline: Option<BaselineReport>,
}

/// In-memory result of a run: the file payload plus the measured wall time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub summary: FileSummary,
    pub wall_time_seconds: f64,
}

pub fn write_summary(path: &Path, summary: &FileSummary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    write_atomic(path, &text)
}

pub fn read_summary(path: &Path) -> Result<FileSummary> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Malformed {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}
