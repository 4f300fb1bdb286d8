//! Provider-substitution invariants: swapping the embedding backend never
//! changes the feature schema, and a precomputed file exported from the test
//! embedder reproduces its features exactly.

use std::path::PathBuf;
use std::process::Command;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn precomputed_file_reproduces_test_embedder_features_through_the_cli() {
    let root = repo_root();
    let dir = tempfile::tempdir().unwrap();
    let out_test = dir.path().join("out_test");
    let out_file = dir.path().join("out_file");
    let vectors = dir.path().join("vectors.jsonl");

    let base = |out: &std::path::Path| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_oddspeech"));
        cmd.arg("--corpus")
            .arg(root.join("data/synthetic/sessions.jsonl"))
            .arg("--labels")
            .arg(root.join("data/synthetic/labels.jsonl"))
            .arg("--out")
            .arg(out)
            .args(["--embed-dim", "8", "--jobs", "2"]);
        cmd
    };

    let export = base(&out_test)
        .arg("features")
        .arg("--export-embeddings")
        .arg(&vectors)
        .output()
        .unwrap();
    assert!(
        export.status.success(),
        "{}",
        String::from_utf8_lossy(&export.stderr)
    );
    assert!(vectors.exists());

    let reload = base(&out_file)
        .args(["--provider", "file", "--embedding-file"])
        .arg(&vectors)
        .arg("features")
        .output()
        .unwrap();
    assert!(
        reload.status.success(),
        "{}",
        String::from_utf8_lossy(&reload.stderr)
    );

    let a = std::fs::read(out_test.join("features.csv")).unwrap();
    let b = std::fs::read(out_file.join("features.csv")).unwrap();
    assert_eq!(a, b, "file-backed features must match the test embedder's");
}

#[test]
fn prediction_table_identical_across_backends() {
    let root = repo_root();
    let dir = tempfile::tempdir().unwrap();
    let vectors = dir.path().join("vectors.jsonl");

    let run = |out: &std::path::Path, extra: &[&str]| {
        let output = Command::new(env!("CARGO_BIN_EXE_oddspeech"))
            .arg("--corpus")
            .arg(root.join("data/synthetic/sessions.jsonl"))
            .arg("--labels")
            .arg(root.join("data/synthetic/labels.jsonl"))
            .arg("--out")
            .arg(out)
            .args(["--embed-dim", "8", "--jobs", "2"])
            .args(extra)
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "{}",
            String::from_utf8_lossy(&output.stderr)
        );
    };

    let out_export = dir.path().join("export");
    run(
        &out_export,
        &["features", "--export-embeddings", vectors.to_str().unwrap()],
    );
    let out_test = dir.path().join("tasks_test");
    run(&out_test, &["tasks"]);
    let out_file = dir.path().join("tasks_file");
    run(
        &out_file,
        &[
            "--provider",
            "file",
            "--embedding-file",
            vectors.to_str().unwrap(),
            "tasks",
        ],
    );

    let a = std::fs::read_to_string(out_test.join("table3_tasks.csv")).unwrap();
    let b = std::fs::read_to_string(out_file.join("table3_tasks.csv")).unwrap();
    assert_eq!(a, b, "table cells must not depend on the backend kind");
}
