//! End-to-end CLI checks: argument handling, exit codes, output formats,
//! and worker-count-independent determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimorelay"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process exited")
}

const SMALL: &str = "experiment = \"rate-vs-snr\"\nN = 32\nK = 2\ntrials = 10\n";

#[test]
fn list_enumerates_experiments() {
    let out = bin().arg("list").output().unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names.len(), 11);
    for expected in ["rate-vs-snr", "quantization", "ee-vs-L", "green-points"] {
        assert!(names.contains(&expected), "missing {expected}");
    }
}

#[test]
fn run_writes_csv_and_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for workers in ["1", "8"] {
        let out_path = dir.path().join(format!("out{workers}.csv"));
        let out = bin()
            .args(["rate-vs-snr", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_path)
            .env("RAYON_NUM_THREADS", workers)
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push(std::fs::read(&out_path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "worker count changed output bytes");
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,snr_db,mc_rate,mc_stderr,closed_form,full_digital"
    );
    assert!(lines.next().unwrap().starts_with("32,"));
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let to_stdout = bin().args(["rate-vs-snr", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&to_stdout), 0);
    let out_path = dir.path().join("out.csv");
    let to_file = bin()
        .args(["rate-vs-snr", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(code(&to_file), 0);
    assert_eq!(to_stdout.stdout, std::fs::read(&out_path).unwrap());
}

#[test]
fn seed_and_trials_overrides_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let base = bin().args(["rate-vs-snr", "--config"]).arg(&cfg).output().unwrap();
    let reseeded = bin()
        .args(["rate-vs-snr", "--config"])
        .arg(&cfg)
        .args(["--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(code(&base), 0);
    assert_eq!(code(&reseeded), 0);
    assert_ne!(base.stdout, reseeded.stdout);
    let repeat = bin()
        .args(["rate-vs-snr", "--config"])
        .arg(&cfg)
        .args(["--seed", "7"])
        .output()
        .unwrap();
    assert_eq!(repeat.stdout, reseeded.stdout);
}

#[test]
fn json_format_carries_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = bin()
        .args(["rate-vs-snr", "--config"])
        .arg(&cfg)
        .args(["--format", "json", "--seed", "99", "--trials", "7"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["metadata"]["seed"], 99);
    assert_eq!(doc["metadata"]["trials"], 7);
    assert_eq!(doc["metadata"]["experiment"], "rate-vs-snr");
    assert!(doc["rows"].as_array().unwrap().len() >= 2);
    assert!(doc["rows"][0]["mc_rate"].is_number());
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();

    // no --config
    let out = bin().arg("rate-vs-snr").output().unwrap();
    assert_eq!(code(&out), 1);

    // unknown experiment
    let cfg = write_config(dir.path(), "trials = 5\n");
    let out = bin().args(["fig-99", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig-99"));

    // invalid config key
    let cfg = write_config(dir.path(), "experiment = \"rate-vs-snr\"\nbogus = 1\n");
    let out = bin().args(["rate-vs-snr", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    // RF-chain count decoupled from pairs
    let cfg = write_config(dir.path(), "experiment = \"rate-vs-snr\"\nK = 5\nL = 12\n");
    let out = bin().args(["rate-vs-snr", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();

    // unreadable config path
    let out = bin()
        .args(["rate-vs-snr", "--config"])
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);

    // unwritable output path
    let cfg = write_config(dir.path(), SMALL);
    let out = bin()
        .args(["rate-vs-snr", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("no-such-dir").join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-dir"));
}
