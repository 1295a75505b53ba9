//! End-to-end checks of the `steklov` binary: subcommands, exit codes, file
//! outputs, and config-file/flag precedence.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("steklov-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

#[test]
fn corpus_list_names_the_shipped_objectives() {
    let out = bin().args(["corpus", "list"]).output().expect("spawn");
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["abs1d", "l1", "maxlin", "linf", "quad", "huber-l1"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = scratch("run");
    let trace = dir.join("trace.csv");
    let summary = dir.join("summary.json");
    let out = bin()
        .args([
            "run",
            "--problem",
            "abs1d",
            "--algorithm",
            "superlinear",
            "--x0",
            "2",
            "--trace",
        ])
        .arg(&trace)
        .arg("--summary")
        .arg(&summary)
        .output()
        .expect("spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(trace.exists() && summary.exists());
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.contains("\"eps2d_satisfied\": true"), "{text}");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_problem_exits_with_config_error() {
    let out = bin()
        .args(["run", "--problem", "nothere"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_x0_exits_with_config_error() {
    let out = bin()
        .args(["run", "--problem", "abs1d", "--x0", "1,zap"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_with_config_error() {
    // clap's own parse failures share the config exit code
    let out = bin()
        .args(["run", "--no-such-flag"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_drives_the_run_and_flags_override_it() {
    let dir = scratch("config");
    let config = dir.join("run.json");
    let trace = dir.join("t.csv");
    let summary = dir.join("s.json");
    std::fs::write(
        &config,
        format!(
            "{{\"problem\": \"l1\", \"dim\": 2, \"algorithm\": \"stationary\", \
             \"domain\": \"cube\", \"max_iters\": 150, \
             \"trace\": {:?}, \"summary\": {:?}}}",
            trace.display().to_string(),
            summary.display().to_string()
        ),
    )
    .unwrap();
    // override the dimension from the command line
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--dim", "3", "--max-iters", "300"])
        .output()
        .expect("spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary_text = std::fs::read_to_string(&summary).unwrap();
    assert!(summary_text.contains("\"dim\": 3"), "{summary_text}");
    assert!(summary_text.contains("\"stationary\""));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bad_config_file_exits_with_config_error() {
    let dir = scratch("badconfig");
    let config = dir.join("bad.json");
    std::fs::write(&config, "{\"problm\": \"abs1d\"}").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(&config)
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn suite_rejects_unknown_filters() {
    let out = bin()
        .args(["suite", "--filter", "nope"])
        .output()
        .expect("spawn");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn suite_passes_on_a_fast_module() {
    let out = bin()
        .args(["suite", "--filter", "corpus"])
        .output()
        .expect("spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[PASS] corpus/lipschitz-bound"));
}

#[test]
fn baseline_flag_adds_the_comparison_to_the_summary() {
    let dir = scratch("baseline");
    let trace = dir.join("t.csv");
    let summary = dir.join("s.json");
    let out = bin()
        .args([
            "run",
            "--problem",
            "abs1d",
            "--x0",
            "2",
            "--baseline",
            "--trace",
        ])
        .arg(&trace)
        .arg("--summary")
        .arg(&summary)
        .output()
        .expect("spawn");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.contains("\"baseline\""), "{text}");
    assert!(text.contains("\"iterations\""));
    let _ = std::fs::remove_dir_all(&dir);
}
