use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use steklov_harness::checks::{run_property_suite, suite_passed};
use steklov_harness::{
    run_from_spec, AlgorithmKind, DomainKind, EstimatorKind, HarnessError, RunSpec,
};

/// Nonsmooth convex minimization by integral-averaging smoothing and
/// regularized Newton steps.
#[derive(Parser)]
#[command(name = "steklov", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one solver run and write its trace and summary files.
    Run(Box<RunArgs>),
    /// Run the property suite across all modules.
    Suite {
        /// Restrict to one module (corpus, smoothing, model, solver,
        /// harness) or a full check name.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Inspect the shipped objective corpus.
    Corpus {
        #[command(subcommand)]
        command: CorpusCommand,
    },
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// List the shipped objectives.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run specification; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_enum)]
    algorithm: Option<AlgorithmKind>,
    /// Start point as comma-separated values, e.g. `--x0 2,2,2`.
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, value_enum)]
    domain: Option<DomainKind>,
    #[arg(long)]
    r0: Option<f64>,
    #[arg(long)]
    shrink: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    eps_decay: Option<f64>,
    #[arg(long)]
    reg0: Option<f64>,
    #[arg(long)]
    reg_decay: Option<f64>,
    #[arg(long, value_enum)]
    estimator: Option<EstimatorKind>,
    #[arg(long)]
    samples_outer: Option<u64>,
    #[arg(long)]
    samples_inner: Option<u64>,
    #[arg(long)]
    quadrature_points: Option<u32>,
    #[arg(long)]
    fd_step_factor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<u32>,
    #[arg(long)]
    max_halvings: Option<u32>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also run the subgradient-descent baseline to the achieved distance.
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    baseline_a0: Option<f64>,
    #[arg(long)]
    baseline_max_iters: Option<u64>,
}

fn parse_x0(text: &str) -> Result<Vec<f64>, HarnessError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::Config(format!("bad x0 component `{t}`")))
        })
        .collect()
}

fn assemble_runspec(args: &RunArgs) -> Result<RunSpec, HarnessError> {
    let mut rs = match &args.config {
        Some(path) => RunSpec::load(path)?,
        None => RunSpec::default(),
    };
    if let Some(v) = &args.problem {
        rs.problem = v.clone();
    }
    if let Some(v) = args.dim {
        rs.dim = Some(v);
    }
    if let Some(v) = args.algorithm {
        rs.algorithm = v;
    }
    if let Some(v) = &args.x0 {
        rs.x0 = Some(parse_x0(v)?);
    }
    if let Some(v) = args.domain {
        rs.domain = v;
    }
    if let Some(v) = args.r0 {
        rs.r0 = v;
    }
    if let Some(v) = args.shrink {
        rs.shrink = v;
    }
    if let Some(v) = args.eps0 {
        rs.eps0 = v;
    }
    if let Some(v) = args.eps_decay {
        rs.eps_decay = v;
    }
    if let Some(v) = args.reg0 {
        rs.reg0 = Some(v);
    }
    if let Some(v) = args.reg_decay {
        rs.reg_decay = v;
    }
    if let Some(v) = args.estimator {
        rs.estimator = v;
    }
    if let Some(v) = args.samples_outer {
        rs.samples_outer = v;
    }
    if let Some(v) = args.samples_inner {
        rs.samples_inner = v;
    }
    if let Some(v) = args.quadrature_points {
        rs.quadrature_points = v;
    }
    if let Some(v) = args.fd_step_factor {
        rs.fd_step_factor = v;
    }
    if let Some(v) = args.seed {
        rs.seed = v;
    }
    if let Some(v) = args.tol {
        rs.tol = v;
    }
    if let Some(v) = args.max_iters {
        rs.max_iters = v;
    }
    if let Some(v) = args.max_halvings {
        rs.max_halvings = v;
    }
    if let Some(v) = &args.trace {
        rs.trace = v.clone();
    }
    if let Some(v) = &args.summary {
        rs.summary = v.clone();
    }
    if args.baseline {
        rs.baseline = true;
    }
    if let Some(v) = args.baseline_a0 {
        rs.baseline_a0 = v;
    }
    if let Some(v) = args.baseline_max_iters {
        rs.baseline_max_iters = v;
    }
    Ok(rs)
}

fn cmd_run(args: &RunArgs) -> Result<(), HarnessError> {
    let rs = assemble_runspec(args)?;
    let report = run_from_spec(&rs)?;
    let s = &report.summary;
    println!(
        "{} dim={} {:?}: {} iterations, stop={:?}",
        s.problem, s.dim, s.algorithm, s.iterations, s.stop_reason
    );
    println!(
        "  distance to minimizer {:.6e}, eps(2D) radius {:.6e}, satisfied: {}",
        s.distance_to_known_minimizer, s.eps2d_radius, s.eps2d_satisfied
    );
    println!("  final step ratio {:.6e}", s.final_ratio);
    if let Some(b) = &s.baseline {
        match b.iterations {
            Some(n) => println!(
                "  baseline subgradient descent: {n} iterations to distance {:.3e}",
                b.target_distance
            ),
            None => println!(
                "  baseline subgradient descent: target {:.3e} not reached in {} iterations",
                b.target_distance, b.max_iters
            ),
        }
    }
    println!("  wall time {:.3} s", report.wall_time_seconds);
    println!("  trace: {}", rs.trace.display());
    println!("  summary: {}", rs.summary.display());
    Ok(())
}

fn cmd_suite(filter: Option<&str>) -> ExitCode {
    match run_property_suite(filter) {
        Ok(results) => {
            for r in &results {
                println!(
                    "[{}] {} ({:.1}s) - {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.elapsed_seconds,
                    r.details
                );
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {} failed", results.len(), failed);
            if suite_passed(&results) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_corpus_list() {
    println!(
        "{:<14} {:>4} {:>9} {:>7} {:>12}  description",
        "name", "dims", "default", "convex", "closed-form"
    );
    for d in steklov_core::corpus::list_corpus() {
        println!(
            "{:<14} {:>1}-{:<2} {:>9} {:>7} {:>12}  {}",
            d.name,
            d.min_dim,
            d.max_dim,
            d.default_dim,
            if d.is_convex { "yes" } else { "no" },
            if d.has_closed_form_smoothing {
                "yes"
            } else {
                "no"
            },
            d.summary
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match cmd_run(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Suite { filter } => cmd_suite(filter.as_deref()),
        Command::Corpus {
            command: CorpusCommand::List,
        } => {
            cmd_corpus_list();
            ExitCode::SUCCESS
        }
    }
}
