//! Acceptance gate: every criterion below runs at its pinned tolerance and
//! prints one pass/fail line. Run with
//! `cargo test -p steklov-harness --test acceptance -- --nocapture`.
//!
//! The criteria run sequentially inside one test so the per-criterion
//! runtime budgets are measured without interference.

use std::time::Instant;

use steklov_core::corpus;
use steklov_harness::checks::{
    baseline_contrast, convexity_preservation_for, full_step_tail, gradient_consistency_for,
    lipschitz_preservation_for, oracle_equivalence_for, sandwich_for, stationarity_correspondence,
    superlinear_diagnostic, Audit, OracleEquivalenceParams,
};
use steklov_harness::runspec::{AlgorithmKind, DomainKind, EstimatorKind, RunSpec};
use steklov_harness::{run_from_spec, HarnessError};

struct Criterion {
    number: u32,
    title: &'static str,
    budget_seconds: f64,
}

struct Outcome {
    passed: bool,
    details: String,
    elapsed: f64,
    within_budget: bool,
}

fn run_criterion(c: &Criterion, body: impl FnOnce(&mut Audit) -> String) -> Outcome {
    let start = Instant::now();
    let mut audit = Audit::new();
    let extra = body(&mut audit);
    let elapsed = start.elapsed().as_secs_f64();
    let result = audit.finish("criterion", &extra);
    let within_budget = elapsed < c.budget_seconds;
    Outcome {
        passed: result.passed && within_budget,
        details: result.details,
        elapsed,
        within_budget,
    }
}

fn criterion_1(audit: &mut Audit) -> String {
    let params = OracleEquivalenceParams::acceptance();
    let mut worst: f64 = 0.0;
    for (name, dim, q) in [
        ("abs1d", None, 2048u32),
        ("l1", Some(2), 512),
        ("l1", Some(3), 160),
    ] {
        let spec = corpus::get(name, dim).expect("shipped");
        worst = worst.max(oracle_equivalence_for(&spec, q, &params, audit));
    }
    format!("worst quadrature rel err {worst:.2e} (tolerance 1e-4), mc within 3 stderr")
}

fn criterion_2(audit: &mut Audit) -> String {
    gradient_consistency_for(&corpus::get("abs1d", None).unwrap(), 8192, 7, audit);
    gradient_consistency_for(&corpus::get("l1", Some(2)).unwrap(), 2048, 7, audit);
    gradient_consistency_for(&corpus::get("huber-l1", Some(2)).unwrap(), 512, 6, audit);
    "20 points across 3 objectives, h = 1e-4 r, rel tol 1e-3".into()
}

fn criterion_3(audit: &mut Audit) -> String {
    for d in corpus::list_corpus() {
        let spec = corpus::get(d.name, None).unwrap();
        lipschitz_preservation_for(&spec, 100, audit);
    }
    for d in corpus::list_corpus().iter().filter(|d| d.is_convex) {
        let spec = if d.default_dim > 4 {
            corpus::get(d.name, Some(3)).unwrap()
        } else {
            corpus::get(d.name, None).unwrap()
        };
        convexity_preservation_for(&spec, 20, audit);
    }
    "100 pairs and 20 eigenvalue points per objective".into()
}

fn criterion_4(audit: &mut Audit) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (name, dim, pts) in [
        ("abs1d", None, 3usize),
        ("l1", Some(2), 3),
        ("l1", Some(3), 3),
        ("maxlin", Some(2), 3),
        ("linf", Some(2), 3),
        ("quad", Some(2), 3),
        ("huber-l1", Some(2), 2),
    ] {
        let spec = corpus::get(name, dim).unwrap();
        let (l, h) = sandwich_for(&spec, pts, audit);
        lo = lo.min(l);
        hi = hi.max(h);
    }
    format!("20 points, spectrum/L_s within [{lo:.4}, {hi:.4}] of [1, 3]")
}

fn criterion_5(audit: &mut Audit) -> String {
    let lines = stationarity_correspondence(audit);
    format!(
        "{} converged runs, all inside x_final + 2 D_final",
        lines.len()
    )
}

fn criterion_6(audit: &mut Audit) -> String {
    full_step_tail(audit);
    "no halvings beyond iteration 3 on the smooth control case".into()
}

fn criterion_7(audit: &mut Audit) -> String {
    superlinear_diagnostic(audit).join("; ")
}

fn criterion_8(audit: &mut Audit) -> String {
    let (method, baseline) = baseline_contrast(audit);
    format!("method {method} vs subgradient baseline {baseline} iterations to 1e-3")
}

fn criterion_9(audit: &mut Audit) -> String {
    let dir = std::env::temp_dir().join(format!("steklov-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    let rs = RunSpec {
        problem: "l1".into(),
        dim: Some(3),
        algorithm: AlgorithmKind::Superlinear,
        domain: DomainKind::Cube,
        estimator: EstimatorKind::MonteCarlo,
        samples_outer: 256,
        samples_inner: 256,
        seed: 90210,
        max_iters: 8,
        tol: 1e-4,
        trace: dir.join("trace.csv"),
        summary: dir.join("summary.json"),
        ..RunSpec::default()
    };
    let first = run_from_spec(&rs).map_err(|e: HarnessError| e.to_string());
    audit.require(first.is_ok(), || format!("first run failed: {first:?}"));
    let trace_a = std::fs::read(&rs.trace).expect("trace bytes");
    let summary_a = std::fs::read(&rs.summary).expect("summary bytes");
    let second = run_from_spec(&rs).map_err(|e: HarnessError| e.to_string());
    audit.require(second.is_ok(), || format!("second run failed: {second:?}"));
    let trace_b = std::fs::read(&rs.trace).expect("trace bytes");
    let summary_b = std::fs::read(&rs.summary).expect("summary bytes");
    audit.require(trace_a == trace_b, || {
        "trace files differ between runs".into()
    });
    audit.require(summary_a == summary_b, || {
        "summary files differ between runs".into()
    });
    let _ = std::fs::remove_dir_all(&dir);
    format!(
        "{} trace bytes, {} summary bytes, byte-identical",
        trace_a.len(),
        summary_a.len()
    )
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        Criterion {
            number: 1,
            title: "smoothing oracle equivalence",
            budget_seconds: 30.0,
        },
        Criterion {
            number: 2,
            title: "gradient vs value differences",
            budget_seconds: 30.0,
        },
        Criterion {
            number: 3,
            title: "lipschitz and convexity preservation",
            budget_seconds: 30.0,
        },
        Criterion {
            number: 4,
            title: "regularized hessian spectral sandwich",
            budget_seconds: 20.0,
        },
        Criterion {
            number: 5,
            title: "stationarity correspondence",
            budget_seconds: 180.0,
        },
        Criterion {
            number: 6,
            title: "full-step tail",
            budget_seconds: 20.0,
        },
        Criterion {
            number: 7,
            title: "superlinear diagnostic",
            budget_seconds: 60.0,
        },
        Criterion {
            number: 8,
            title: "baseline contrast",
            budget_seconds: 30.0,
        },
        Criterion {
            number: 9,
            title: "determinism",
            budget_seconds: 20.0,
        },
    ];
    let bodies: [fn(&mut Audit) -> String; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut all_passed = true;
    for (c, body) in criteria.iter().zip(bodies) {
        let outcome = run_criterion(c, body);
        all_passed &= outcome.passed;
        println!(
            "criterion {} ({}): {} [{:.1}s / {:.0}s budget]{} - {}",
            c.number,
            c.title,
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.elapsed,
            c.budget_seconds,
            if outcome.within_budget {
                ""
            } else {
                " OVER BUDGET"
            },
            outcome.details
        );
    }
    assert!(all_passed, "at least one acceptance criterion failed");
}
