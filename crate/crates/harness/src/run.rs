//! Executing a run specification end to end: solve, diagnose, write trace
//! and summary.

use std::time::Instant;

use steklov_core::corpus::ObjectiveSpec;
use steklov_core::linalg;
use steklov_core::smoothing::AveragingDomain;
use steklov_core::solver::{
    check_eps_stationarity, run_stationary_search, run_superlinear, Algorithm, SolverConfig,
    SolverResult,
};

use crate::baseline::run_baseline_subgradient;
use crate::rate::ratios_from_step_norms;
use crate::report::{BaselineReport, FileSummary, ReportSummary, StopKind};
use crate::runspec::{DomainKind, RunSpec};
use crate::trace::TraceRow;
use crate::{HarnessError, Result};

/// Distance in the norm induced by the domain shape: Euclidean for balls,
/// max-coordinate for cubes, so containment in `x + 2D` is exactly
/// `distance <= 2 * radius`.
pub fn domain_distance(domain: DomainKind, a: &[f64], b: &[f64]) -> f64 {
    let diff = linalg::sub(a, b);
    match domain {
        DomainKind::Ball => linalg::norm(&diff),
        DomainKind::Cube => linalg::norm_inf(&diff),
    }
}

pub fn solve(spec: &ObjectiveSpec, cfg: &SolverConfig) -> Result<SolverResult> {
    match cfg.algorithm {
        Algorithm::Stationary => run_stationary_search(spec, cfg),
        Algorithm::Superlinear => run_superlinear(spec, cfg),
    }
    .map_err(HarnessError::Core)
}

fn build_summary(
    rs: &RunSpec,
    spec: &ObjectiveSpec,
    cfg: &SolverConfig,
    result: &SolverResult,
) -> Result<FileSummary> {
    let last = result.records.last().expect("non-empty trace");
    let final_domain = AveragingDomain::new(cfg.domain_shape, last.radius, spec.dim())
        .map_err(HarnessError::Core)?;
    let distance = domain_distance(rs.domain, spec.minimizer(), &result.x_final);
    let eps2d_satisfied = check_eps_stationarity(&result.x_final, &final_domain, spec, 2.0);
    let norms: Vec<f64> = result.records.iter().map(|r| r.step_norm).collect();
    let ratio_series = ratios_from_step_norms(&norms);
    let final_ratio = ratio_series.last().copied().unwrap_or(0.0);
    let mut summary = FileSummary {
        problem: spec.name().to_string(),
        dim: spec.dim(),
        algorithm: rs.algorithm,
        domain: rs.domain,
        stop_reason: result.stop_reason.into(),
        iterations: result.records.len() as u64,
        x_final: result.x_final.clone(),
        distance_to_known_minimizer: distance,
        eps2d_radius: result.eps2d_radius,
        eps2d_satisfied,
        final_ratio,
        ratio_series,
        baseline: None,
    };
    if rs.baseline {
        let x0 = cfg.x0.clone();
        let target = linalg::norm(&linalg::sub(spec.minimizer(), &result.x_final));
        let outcome =
            run_baseline_subgradient(spec, &x0, rs.baseline_a0, rs.baseline_max_iters, target)?;
        summary.baseline = Some(BaselineReport {
            a0: rs.baseline_a0,
            target_distance: target,
            max_iters: rs.baseline_max_iters,
            iterations: outcome.iterations_to_target,
        });
    }
    Ok(summary)
}

/// Run the configured solver, write the trace and summary files, and return
/// the summary with the measured wall time.
pub fn run_from_spec(rs: &RunSpec) -> Result<ReportSummary> {
    let (spec, cfg) = rs.resolve()?;
    let started = Instant::now();
    let result = solve(&spec, &cfg)?;
    let summary = build_summary(rs, &spec, &cfg, &result)?;
    let wall_time_seconds = started.elapsed().as_secs_f64();
    crate::trace::write_trace(&rs.trace, &result.records, spec.dim())?;
    crate::report::write_summary(&rs.summary, &summary)?;
    Ok(ReportSummary {
        summary,
        wall_time_seconds,
    })
}

/// Recompute a summary from a parsed trace plus its run specification;
/// used to check that emitted summaries carry no information beyond the
/// trace. The baseline section is not recomputable and is left empty.
pub fn summary_from_trace(rs: &RunSpec, rows: &[TraceRow]) -> Result<FileSummary> {
    let (spec, cfg) = rs.resolve()?;
    let last = rows.last().ok_or_else(|| HarnessError::Malformed {
        path: rs.trace.display().to_string(),
        reason: "empty trace".into(),
    })?;
    let stop_reason = if last.step_norm < rs.tol {
        StopKind::StepTol
    } else if rows.len() as u32 == rs.max_iters {
        StopKind::MaxIters
    } else {
        StopKind::LineSearchExhausted
    };
    let final_domain = AveragingDomain::new(cfg.domain_shape, last.radius, spec.dim())
        .map_err(HarnessError::Core)?;
    let distance = domain_distance(rs.domain, spec.minimizer(), &last.x);
    let norms: Vec<f64> = rows.iter().map(|r| r.step_norm).collect();
    let ratio_series = ratios_from_step_norms(&norms);
    Ok(FileSummary {
        problem: spec.name().to_string(),
        dim: spec.dim(),
        algorithm: rs.algorithm,
        domain: rs.domain,
        stop_reason,
        iterations: rows.len() as u64,
        x_final: last.x.clone(),
        distance_to_known_minimizer: distance,
        eps2d_radius: 2.0 * last.radius,
        eps2d_satisfied: check_eps_stationarity(&last.x, &final_domain, &spec, 2.0),
        final_ratio: ratio_series.last().copied().unwrap_or(0.0),
        ratio_series,
        baseline: None,
    })
}
