//! End-to-end checks of the binary: artifact layout, determinism, and
//! the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use enginekgi::synth::{generate, SynthConfig};

fn corpus(dir: &Path) {
    let data = generate(&SynthConfig {
        block_entities: [8, 8, 8],
        chain_edges: 26,
        filler_edges: 10,
        held_out_test: 5,
        held_out_valid: 5,
        ..SynthConfig::default()
    });
    data.write_dir(dir).unwrap();
}

fn enginekgi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_enginekgi"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn assert_code(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

const FAST: &[&str] = &[
    "--d", "8", "--epochs", "10", "--batch-size", "256", "--st", "0", "--threads", "1",
];

#[test]
fn run_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let out = enginekgi(
        tmp.path(),
        &[
            &[
                "run",
                "--train",
                "train.tsv",
                "--valid",
                "valid.tsv",
                "--test",
                "test.tsv",
                "--concepts",
                "concepts.tsv",
                "--out",
                "out",
                "--max-iterations",
                "2",
            ],
            FAST,
        ]
        .concat(),
    );
    assert_code(&out, 0);
    for artifact in [
        "config.txt",
        "snapshots.tsv",
        "embeddings.tsv",
        "rules.tsv",
        "metrics.txt",
    ] {
        assert!(
            tmp.path().join("out").join(artifact).is_file(),
            "missing {artifact}"
        );
    }
    let snapshots = fs::read_to_string(tmp.path().join("out/snapshots.tsv")).unwrap();
    assert!(!snapshots.lines().next().unwrap_or("").is_empty());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("iteration 1:"), "stdout:\n{stdout}");
    assert!(stdout.contains("filtered_hits10:"), "stdout:\n{stdout}");
}

#[test]
fn identical_seeded_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let base = [
        "run",
        "--train",
        "train.tsv",
        "--valid",
        "valid.tsv",
        "--concepts",
        "concepts.tsv",
        "--max-iterations",
        "2",
        "--seed",
        "11",
    ];
    for out_dir in ["a", "b"] {
        let out = enginekgi(
            tmp.path(),
            &[&base[..], &["--out", out_dir], FAST].concat(),
        );
        assert_code(&out, 0);
    }
    for artifact in ["rules.tsv", "snapshots.tsv"] {
        let a = fs::read(tmp.path().join("a").join(artifact)).unwrap();
        let b = fs::read(tmp.path().join("b").join(artifact)).unwrap();
        assert_eq!(a, b, "{artifact} differs between identical runs");
    }
}

#[test]
fn staged_pipeline_consumes_its_own_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let data = &[
        "--train",
        "train.tsv",
        "--concepts",
        "concepts.tsv",
        "--out",
        "out",
    ][..];

    let out = enginekgi(tmp.path(), &[&["extract-paths"], data, FAST].concat());
    assert_code(&out, 0);
    let out = enginekgi(tmp.path(), &[&["mine-seed-rules"], data, FAST].concat());
    assert_code(&out, 0);
    let artifacts = &[
        "--path-index",
        "out/paths.tsv",
        "--rules",
        "out/rules.tsv",
    ][..];
    let out = enginekgi(tmp.path(), &[&["train"], data, artifacts, FAST].concat());
    assert_code(&out, 0);
    let out = enginekgi(
        tmp.path(),
        &[
            &["learn-rules"],
            data,
            artifacts,
            &["--embeddings", "out/embeddings.tsv"],
            FAST,
        ]
        .concat(),
    );
    assert_code(&out, 0);
    assert!(tmp.path().join("out/diagnostics.tsv").is_file());
    let out = enginekgi(
        tmp.path(),
        &[
            &["evaluate"],
            data,
            artifacts,
            &["--embeddings", "out/embeddings.tsv", "--test", "test.tsv"],
            FAST,
        ]
        .concat(),
    );
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("raw_mr:"), "stdout:\n{stdout}");
    assert!(tmp.path().join("out/metrics.txt").is_file());
}

#[test]
fn explain_emits_one_block_per_query() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let data = &[
        "--train",
        "train.tsv",
        "--concepts",
        "concepts.tsv",
        "--out",
        "out",
    ][..];
    let out = enginekgi(tmp.path(), &[&["train"], data, FAST].concat());
    assert_code(&out, 0);
    let query = fs::read_to_string(tmp.path().join("test.tsv"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .split('\t')
        .collect::<Vec<_>>()
        .join(",");
    let out = enginekgi(
        tmp.path(),
        &[
            &["evaluate"],
            data,
            &[
                "--embeddings",
                "out/embeddings.tsv",
                "--test",
                "test.tsv",
                "--explain",
                &query,
            ],
            FAST,
        ]
        .concat(),
    );
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("score"), "stdout:\n{stdout}");
    let blocks = fs::read_to_string(tmp.path().join("out/explanations.txt")).unwrap();
    let head = query.split(',').next().unwrap();
    assert!(blocks.contains(head), "blocks:\n{blocks}");
}

#[test]
fn flags_override_config_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    fs::write(
        tmp.path().join("run.cfg"),
        "# tiny smoke settings\ntrain = train.tsv\nconcepts = concepts.tsv\n\
         out = out\nepochs = 5\nd = 8\nbatch_size = 256\nthreads = 1\n",
    )
    .unwrap();
    let out = enginekgi(
        tmp.path(),
        &["train", "--config", "run.cfg", "--epochs", "3"],
    );
    assert_code(&out, 0);
    let echo = fs::read_to_string(tmp.path().join("out/config.txt")).unwrap();
    assert!(echo.contains("epochs = 3"), "echo:\n{echo}");
    assert!(echo.contains("d = 8"), "echo:\n{echo}");
    let loss = fs::read_to_string(tmp.path().join("out/loss.tsv")).unwrap();
    assert_eq!(loss.lines().count(), 3);
}

#[test]
fn evaluate_without_embeddings_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let out = enginekgi(
        tmp.path(),
        &["evaluate", "--train", "train.tsv", "--test", "test.tsv"],
    );
    assert_code(&out, 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--embeddings"), "stderr:\n{stderr}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = enginekgi(tmp.path(), &["run", "--bogus"]);
    assert_code(&out, 1);
}

#[test]
fn missing_input_file_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = enginekgi(
        tmp.path(),
        &["mine-seed-rules", "--train", "no-such-file.tsv"],
    );
    assert_code(&out, 2);
}

#[test]
fn unknown_config_key_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "epocs = 5\n").unwrap();
    let out = enginekgi(tmp.path(), &["train", "--config", "bad.cfg"]);
    assert_code(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.cfg:1"), "stderr:\n{stderr}");
}

#[test]
fn diverging_training_is_a_numeric_error() {
    let tmp = tempfile::tempdir().unwrap();
    corpus(tmp.path());
    let out = enginekgi(
        tmp.path(),
        &[
            &[
                "train",
                "--train",
                "train.tsv",
                "--learning-rate",
                "1e300",
                "--norm",
                "2",
            ],
            FAST,
        ]
        .concat(),
    );
    assert_code(&out, 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("non-finite"), "stderr:\n{stderr}");
}
