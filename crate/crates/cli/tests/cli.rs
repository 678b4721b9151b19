//! End-to-end tests of the `blowup-lab` binary: exit codes, artifact
//! discipline, output-directory resolution, and rerun determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blowup-lab"));
    // Keep the ambient environment from leaking into resolution tests.
    cmd.env_remove("BLOWUP_LAB_OUT");
    cmd
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("binary terminated by signal")
}

const EXPONENTS_CONFIG: &str = r#"{
  "experiment": "exponents",
  "profile": { "family": "gkw", "r0": 1.0 },
  "p": 1.5
}"#;

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("exponents"));
    assert!(text.contains("duality"));
}

#[test]
fn missing_config_file_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["exponents", "--config"])
        .arg(tmp.path().join("does_not_exist.json"))
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(!out_dir.exists(), "no artifacts on a config error");
}

#[test]
fn malformed_json_exits_one_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.json", "{ this is not json");
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["exponents", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(!out_dir.exists(), "no artifacts on a config error");
}

#[test]
fn unknown_key_exits_one_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "extra.json",
        r#"{
          "experiment": "exponents",
          "profile": { "family": "gkw", "r0": 1.0 },
          "p": 1.5,
          "surprise": 7
        }"#,
    );
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["exponents", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(!out_dir.exists(), "no artifacts on a config error");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("surprise"), "error names the offending key: {err}");
}

#[test]
fn subcommand_mismatch_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.json", EXPONENTS_CONFIG);
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["eigen", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(!out_dir.exists());
}

#[test]
fn zero_jobs_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.json", EXPONENTS_CONFIG);
    let out = bin()
        .args(["exponents", "--config"])
        .arg(&cfg)
        .args(["--jobs", "0"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn env_out_dir_overrides_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.json", EXPONENTS_CONFIG);
    let flag_dir = tmp.path().join("by_flag");
    let env_dir = tmp.path().join("by_env");
    let out = bin()
        .args(["exponents", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag_dir)
        .env("BLOWUP_LAB_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(env_dir.join("exponents").join("summary.json").is_file());
    assert!(!flag_dir.exists(), "--out must lose to BLOWUP_LAB_OUT");
}

#[test]
fn successful_run_writes_expected_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.json", EXPONENTS_CONFIG);
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["exponents", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let exp = out_dir.join("exponents");
    for name in ["summary.json", "thresholds.csv", "gamma_roots.csv", "classification.csv"] {
        assert!(exp.join(name).is_file(), "missing artifact {name}");
    }
    let summary = fs::read_to_string(exp.join("summary.json")).unwrap();
    assert!(summary.contains("\"passed\": true"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "exp.json", EXPONENTS_CONFIG);
    let dirs = [tmp.path().join("run_a"), tmp.path().join("run_b")];
    for dir in &dirs {
        let out = bin()
            .args(["exponents", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0);
    }
    let mut names: Vec<String> = fs::read_dir(dirs[0].join("exponents"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let a = fs::read(dirs[0].join("exponents").join(&name)).unwrap();
        let b = fs::read(dirs[1].join("exponents").join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical reruns");
    }
}

#[test]
fn failed_check_exits_three_and_keeps_artifacts() {
    // Kernel moments under strong decaying damping (mu = 2) approach their
    // scaling limit slower than the 2% drift window allows at t = 1e3, so
    // this run completes but fails the drift check.
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "testfn.json",
        r#"{
          "experiment": "testfn",
          "profile": { "family": "scattering", "n": 3, "mu": 2.0, "beta": 2.0 },
          "p": 1.8
        }"#,
    );
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["testfn", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary_path = out_dir.join("testfn").join("summary.json");
    assert!(summary_path.is_file(), "check failures still write artifacts");
    let summary = fs::read_to_string(summary_path).unwrap();
    assert!(summary.contains("\"passed\": false"));
}
