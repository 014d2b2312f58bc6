use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ds2d(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ds2d"))
        .args(args)
        .env("DS2D_OUTDIR", dir)
        .output()
        .expect("binary runs")
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr has a record");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn manifest(dir: &Path) -> Vec<String> {
    let text = fs::read_to_string(dir.join("MANIFEST")).unwrap();
    let mut lines = text.lines().map(str::to_string);
    assert_eq!(lines.next().as_deref(), Some("status: complete"));
    lines.collect()
}

#[test]
fn help_and_version_succeed() {
    let tmp = TempDir::new().unwrap();
    for args in [&["--help"][..], &["--version"], &["evolve", "--help"]] {
        let out = ds2d(tmp.path(), args);
        assert!(out.status.success(), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_one_with_json() {
    let tmp = TempDir::new().unwrap();
    let out = ds2d(tmp.path(), &["nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "usage");

    let out = ds2d(tmp.path(), &["groundstate", "--no-such-key", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let j = stderr_json(&out);
    assert_eq!(j["exit"], 1);
    assert!(j["message"].as_str().unwrap().contains("no_such_key"));
}

#[test]
fn invalid_values_are_validation_errors() {
    let tmp = TempDir::new().unwrap();
    for args in [
        &["groundstate", "--omega", "-0.3", "--dj", "10.5"][..],
        &["groundstate", "--omega", "0.3", "--mass", "4", "--dj", "10.5"],
        &["groundstate", "--omega", "0.3", "--p", "3.5", "--dj", "10.5"],
        &["groundstate", "--omega", "abc"],
        &["evolve", "--t", "1", "--dt", "0.3", "--dj", "10.5"],
    ] {
        let out = ds2d(tmp.path(), args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let j = stderr_json(&out);
        assert!(j["message"].is_string() && j["error"].is_string());
    }
}

#[test]
fn groundstate_writes_artifacts() {
    let tmp = TempDir::new().unwrap();
    let out = ds2d(tmp.path(), &["groundstate", "--omega=0.3", "--points", "128", "--dj", "10.532436662326"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("groundstate");
    let files = manifest(&dir);
    assert!(files.iter().any(|f| f == "groundstate.csv"));
    for f in &files {
        assert!(dir.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(dir.join("groundstate.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("# config:") && l.contains(" omega=0.3 ")));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("omega,mass,energy,residual_l2"));
}

#[test]
fn config_file_with_override() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# short run\nt = 0.05\ndt = 0.01\nomega = 0.3\npoints = 64\ndj = 10.532436662326\n").unwrap();
    let out = ds2d(tmp.path(), &["evolve", "--config", cfg.to_str().unwrap(), "--dt", "0.005"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("evolve");
    let files = manifest(&dir);
    assert!(files.iter().any(|f| f == "conservation.csv"));
    let csv = fs::read_to_string(dir.join("conservation.csv")).unwrap();
    let config = csv.lines().find(|l| l.starts_with("# config:")).unwrap();
    assert!(config.contains(" dt=0.005 "), "{config}");
    assert!(config.contains(" seed=1 "));
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert!(rows >= 2);
}

#[test]
fn missing_config_file_fails() {
    let tmp = TempDir::new().unwrap();
    let out = ds2d(tmp.path(), &["evolve", "--config", tmp.path().join("absent.cfg").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr_json(&out)["message"].is_string());
}

#[test]
fn verify_reports_pass_lines() {
    let tmp = TempDir::new().unwrap();
    let out = ds2d(tmp.path(), &["verify", "--points", "128", "--dj", "10.532436662326"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines.iter().all(|l| l.starts_with("PASS ")), "{text}");
    assert!(manifest(&tmp.path().join("verify")).contains(&"verify.csv".to_string()));
}
