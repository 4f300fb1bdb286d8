//! Behavioral tests driving the compiled binary against the bundled corpus.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_oddspeech")
}

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_cli(args: &[&str], out_dir: &Path) -> Output {
    let root = repo_root();
    Command::new(binary())
        .arg("--corpus")
        .arg(root.join("data/synthetic/sessions.jsonl"))
        .arg("--labels")
        .arg(root.join("data/synthetic/labels.jsonl"))
        .arg("--out")
        .arg(out_dir)
        .args(args)
        .env_remove("ODDSPEECH_OUT_DIR")
        .env_remove("ODDSPEECH_SERVICE_ENDPOINT")
        .output()
        .expect("binary runs")
}

#[test]
fn validate_bundled_corpus_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(&["validate"], dir.path());
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("0 rejects"), "{stdout}");
    assert!(stdout.contains("216 sessions"), "{stdout}");
}

#[test]
fn validate_rejects_bad_rows_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let bad_labels = dir.path().join("labels.jsonl");
    std::fs::write(
        &bad_labels,
        r#"{"participant_id":"p1","spq_total":75,"spq_odd_speech":4,"srs_total":73}
"#,
    )
    .unwrap();
    let bad_sessions = dir.path().join("sessions.jsonl");
    std::fs::write(
        &bad_sessions,
        r#"{"participant_id":"p1","session_id":"s1","task":"dream","duration_limit_s":30,"transcript":"x"}
"#,
    )
    .unwrap();
    let output = Command::new(binary())
        .args(["--corpus"])
        .arg(&bad_sessions)
        .arg("--labels")
        .arg(&bad_labels)
        .arg("--out")
        .arg(dir.path())
        .arg("validate")
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("spq_total"), "{stderr}");
}

#[test]
fn summarize_writes_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(&["summarize"], dir.path());
    assert!(output.status.success(), "{output:?}");
    assert!(dir.path().join("summary.md").exists());
    assert!(dir.path().join("summary.csv").exists());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("24 participants, 216 sessions"), "{stdout}");
}

#[test]
fn features_exports_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(&["--embed-dim", "8", "features"], dir.path());
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.path().join("features.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 216);
    assert!(csv.lines().next().unwrap().contains("cdij"));
}

#[test]
fn correlate_labels_writes_table2() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(&["correlate-labels"], dir.path());
    assert!(output.status.success(), "{output:?}");
    assert!(dir.path().join("table2_label_corr.csv").exists());
    assert!(dir.path().join("table2_label_corr.md").exists());
    assert!(dir.path().join("manifest.json").exists());
    let md = std::fs::read_to_string(dir.path().join("table2_label_corr.md")).unwrap();
    // Self-correlation renders as significant 1.00.
    assert!(md.contains("**1.00**"), "{md}");
}

#[test]
fn tasks_table_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(&["--embed-dim", "8", "--jobs", "2", "tasks"], dir.path());
    assert!(output.status.success(), "{output:?}");
    let csv = std::fs::read_to_string(dir.path().join("table3_tasks.csv")).unwrap();
    // Header + 4 tasks x 3 targets.
    assert_eq!(csv.lines().count(), 1 + 12);
    for task in ["dream", "favorite", "negative", "mistake"] {
        assert!(csv.contains(&format!("\n{task},")) || csv.starts_with(&format!("{task},")));
    }
}

#[test]
fn predict_single_cell() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(
        &[
            "--embed-dim",
            "8",
            "predict",
            "--target",
            "odd_speech",
            "--task",
            "negative",
            "--duration",
            "180",
        ],
        dir.path(),
    );
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("rho="), "{stdout}");
    assert!(dir
        .path()
        .join("predictions_odd_speech_negative_180s.csv")
        .exists());
}

#[test]
fn unknown_target_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_cli(&["predict", "--target", "iq"], dir.path());
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown target 'iq'"));
}

#[test]
fn help_enumerates_every_subcommand_and_documented_flag() {
    let output = Command::new(binary()).arg("--help").output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    for subcommand in [
        "validate",
        "summarize",
        "features",
        "correlate-labels",
        "predict",
        "tasks",
        "durations",
        "phases",
        "ablate",
        "all",
    ] {
        assert!(
            stdout.contains(subcommand),
            "missing {subcommand}\n{stdout}"
        );
    }
    for flag in [
        "--corpus",
        "--labels",
        "--provider",
        "--seed",
        "--alpha",
        "--jobs",
        "--format",
        "--out",
        "--tagset",
        "--negation-lexicon",
        "--embedding-file",
        "--service-endpoint",
        "--config",
    ] {
        assert!(stdout.contains(flag), "missing {flag}\n{stdout}");
    }
}

#[test]
fn config_file_supplies_paths() {
    let dir = tempfile::tempdir().unwrap();
    let root = repo_root();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!(
            "corpus = {:?}\nlabels = {:?}\nout = {:?}\nembed_dim = 8\n",
            root.join("data/synthetic/sessions.jsonl"),
            root.join("data/synthetic/labels.jsonl"),
            dir.path().join("reports")
        ),
    )
    .unwrap();
    let output = Command::new(binary())
        .arg("--config")
        .arg(&config)
        .arg("validate")
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
}

#[test]
fn custom_tagset_and_lexicon_paths_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let root = repo_root();
    let output = Command::new(binary())
        .arg("--corpus")
        .arg(root.join("data/synthetic/sessions.jsonl"))
        .arg("--labels")
        .arg(root.join("data/synthetic/labels.jsonl"))
        .arg("--tagset")
        .arg(root.join("configs/tagset_default.tsv"))
        .arg("--negation-lexicon")
        .arg(root.join("configs/negation_lexicon.txt"))
        .arg("--out")
        .arg(dir.path())
        .args(["--embed-dim", "8", "--jobs", "2", "durations"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert!(dir.path().join("table4_duration.csv").exists());
}
