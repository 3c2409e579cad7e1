//! End-to-end tests of the `semibeam` binary: exit-code contract, output
//! files, manifests and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn semibeam(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_semibeam"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary should run")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL: &str = r#"
modes = 6
seed = 3

[model]
variant = "system02"

[time]
t_end = 2.0
samples = 40

[lambda]
count = 8
"#;

#[test]
fn check_command_exits_zero_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let prefix = dir.path().join("out/run");
    let out = semibeam(&["check", "--config", &cfg, "--out", prefix.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] dissipation_identity"), "stdout: {stdout}");
    let manifest_path = dir.path().join("out/run.manifest.toml");
    let manifest = std::fs::read_to_string(&manifest_path).unwrap();
    assert!(manifest.contains("command = \"check\""));
    assert!(manifest.contains("sha256"));
    // every output file referenced by the manifest exists
    let csv = dir.path().join("out/run.check.csv");
    assert!(csv.exists());
    assert!(manifest.contains("run.check.csv"));
}

#[test]
fn usage_and_config_errors_exit_one() {
    // missing config file
    let out = semibeam(&["check", "--config", "/nonexistent/x.toml"], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
    // invariant violation names the key
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[model]\nvariant = \"system02\"\ngamma1 = -2.0\n");
    let out = semibeam(&["check", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma1"));
    // unknown key
    let cfg = write_config(dir.path(), "typo.toml", "[model]\nvariant = \"system02\"\nvdv = 1.0\n");
    let out = semibeam(&["check", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vdv"));
    // unknown flag is a usage error
    let out = semibeam(&["check", "--nope"], &[]);
    assert_eq!(out.status.code(), Some(1));
    // --help is not an error
    let out = semibeam(&["--help"], &[]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn failed_assertion_exits_two() {
    // an impossible fit target forces the scaling assertion to fail
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[fit]\ntarget = 50.0\nwindow_min = 0.5\nwindow_max = 400.0\n");
    let cfg = write_config(dir.path(), "g.toml", &body);
    let prefix = dir.path().join("g");
    let out = semibeam(
        &["gevrey", "--config", &cfg, "--modes", "12", "--out", prefix.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] scaling_exponent"));
}

#[test]
fn identical_seed_reproduces_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let p1 = dir.path().join("a");
    let p2 = dir.path().join("b");
    for p in [&p1, &p2] {
        let out = semibeam(&["resolvent", "--config", &cfg, "--out", p.to_str().unwrap()], &[]);
        assert_eq!(out.status.code(), Some(0));
    }
    let b1 = std::fs::read(dir.path().join("a.resolvent.csv")).unwrap();
    let b2 = std::fs::read(dir.path().join("b.resolvent.csv")).unwrap();
    assert_eq!(b1, b2);
    // a different seed changes only the residual column at most, but the
    // file is regenerated deterministically either way; just confirm the
    // seeded rerun with an explicit seed also matches itself
    let p3 = dir.path().join("c");
    let p4 = dir.path().join("d");
    for p in [&p3, &p4] {
        let out = semibeam(
            &["resolvent", "--config", &cfg, "--seed", "99", "--out", p.to_str().unwrap()],
            &[],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let b3 = std::fs::read(dir.path().join("c.resolvent.csv")).unwrap();
    let b4 = std::fs::read(dir.path().join("d.resolvent.csv")).unwrap();
    assert_eq!(b3, b4);
}

#[test]
fn csv_values_round_trip_through_17_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let prefix = dir.path().join("s");
    let out = semibeam(&["simulate", "--config", &cfg, "--out", prefix.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("s.simulate.csv")).unwrap();
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), field, "field must be the canonical 17-digit form");
        }
    }
}

#[test]
fn out_dir_env_var_provides_default_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let out = semibeam(
        &["spectrum", "--config", &cfg],
        &[("SEMIBEAM_OUT_DIR", dir.path().to_str().unwrap())],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("spectrum.spectrum.csv").exists());
    assert!(dir.path().join("spectrum.manifest.toml").exists());
}

#[test]
fn audit_and_sweep_subcommands_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL}\n[audit]\nprobes = 2\n\n[sweep]\nrandom = 1\n");
    let cfg = write_config(dir.path(), "c.toml", &body);
    let pa = dir.path().join("a");
    let out = semibeam(&["audit", "--config", &cfg, "--out", pa.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let ps = dir.path().join("s");
    let out = semibeam(
        &["sweep", "--config", &cfg, "--workers", "2", "--out", ps.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let (header, rows) = {
        let mut rdr = csv::Reader::from_path(dir.path().join("s.sweep.csv")).unwrap();
        let h: Vec<String> = rdr.headers().unwrap().iter().map(|s| s.to_owned()).collect();
        let r: Vec<Vec<String>> =
            rdr.records().map(|r| r.unwrap().iter().map(|s| s.to_owned()).collect()).collect();
        (h, r)
    };
    assert_eq!(header, vec!["e1", "e2", "e3", "abscissa", "norm_sup"]);
    assert_eq!(rows.len(), 9); // 8 corners + 1 random triple
    for row in &rows {
        let abscissa: f64 = row[3].parse().unwrap();
        assert!(abscissa < 0.0);
    }
}
