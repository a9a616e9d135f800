use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kglab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kglab"))
        .args(args)
        .current_dir(dir)
        .env_remove("KGLAB_CACHE")
        .env_remove("KGLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn empty_ensemble_writes_manifest_and_empty_summary() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "e.toml",
        "kind = \"dichotomy_ensemble\"\noutput_dir = \"out\"\n[dichotomy_ensemble]\ncount = 0\n",
    );
    let o = kglab(d.path(), &["run", "e.toml"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let m = json(&d.path().join("out/manifest.json"));
    assert_eq!(m["kind"], "dichotomy_ensemble");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    let s = json(&d.path().join("out/summary.json"));
    assert_eq!(s["passed"], true);
    let csv = fs::read_to_string(d.path().join("out/ensemble.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "comment and header only");
    assert!(csv.starts_with("# config_sha256="));
    assert!(!d.path().join("out/FAILED").exists());
}

#[test]
fn unknown_key_is_a_config_error_without_outputs() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "bad.toml",
        "kind = \"single_run\"\noutput_dir = \"out\"\n[single_run]\nwidht = 2\n",
    );
    let o = kglab(d.path(), &["run", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("widht") && err.contains("line 4"), "{err}");
    assert!(!d.path().join("out").exists());
}

#[test]
fn single_run_is_reproducible_byte_for_byte() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "s.toml",
        "kind = \"single_run\"\noutput_dir = \"a\"\n[single_run]\nhorizon = 2\nmax_energy_drift = 1e-6\n",
    );
    assert_eq!(kglab(d.path(), &["run", "s.toml"]).status.code(), Some(0));
    assert_eq!(
        kglab(d.path(), &["run", "s.toml", "--output-dir", "b"])
            .status
            .code(),
        Some(0)
    );
    let a = fs::read(d.path().join("a/trajectory.csv")).unwrap();
    let b = fs::read(d.path().join("b/trajectory.csv")).unwrap();
    assert_eq!(a, b);
    // Ten significant digits in every float cell.
    let text = String::from_utf8(a).unwrap();
    let row = text.lines().nth(2).unwrap();
    for cell in row.split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 11, "{cell}");
    }
}

#[test]
fn failed_check_exits_one() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "s.toml",
        "kind = \"single_run\"\noutput_dir = \"out\"\n[single_run]\nhorizon = 1\nmax_energy_drift = 1e-30\n",
    );
    let o = kglab(d.path(), &["run", "s.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&d.path().join("out/summary.json"))["passed"], false);
    assert!(!d.path().join("out/FAILED").exists());
}

#[test]
fn runtime_error_leaves_failed_sentinel() {
    let d = tempfile::tempdir().unwrap();
    // Planted shifts need a box of half-length 192; this one is far too small.
    write(
        d.path(),
        "p.toml",
        "kind = \"profile_test\"\noutput_dir = \"out\"\n[grid]\npoints = 256\nhalf_length = 20\n",
    );
    let o = kglab(d.path(), &["run", "p.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(d.path().join("out/manifest.json").exists());
    let msg = fs::read_to_string(d.path().join("out/FAILED")).unwrap();
    assert!(msg.contains("leaves the box"), "{msg}");
}

#[test]
fn groundstate_sweep_matches_candidate_levels() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "g.toml",
        "kind = \"groundstate_sweep\"\noutput_dir = \"out\"\n[groundstate_sweep]\nbetas = [0, 1, 2]\n",
    );
    let o = kglab(d.path(), &["run", "g.toml"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = json(&d.path().join("out/groundstates.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let level = |i: usize| rows[i]["level"].as_f64().unwrap();
    // Scalar level at beta = 0 and beta = 1, synchronized level 2/(1 + beta) of it at beta = 2.
    assert!((level(1) / level(0) - 1.0).abs() < 1e-6);
    assert!((level(2) / level(0) - 2.0 / 3.0).abs() < 1e-6);
}

#[test]
fn corrupt_cache_is_recomputed_and_rewritten() {
    let d = tempfile::tempdir().unwrap();
    let gs = kglab(
        d.path(),
        &["groundstate", "--beta", "1", "--snapshot", "q.bin"],
    );
    assert_eq!(gs.status.code(), Some(0));
    write(d.path(), "cache.json", "not json");
    let o = kglab(d.path(), &["--cache", "cache.json", "classify", "q.bin"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("corrupt"));
    let out: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // The ground state sits on the threshold, so it is not strictly below it.
    assert_eq!(out["verdict"]["region"], "above_threshold");
    assert_eq!(out["verdict"]["borderline"], true);
    let cache = json(&d.path().join("cache.json"));
    assert_eq!(cache.as_array().unwrap().len(), 1);
    // A healthy cache is reused.
    let again = kglab(d.path(), &["--cache", "cache.json", "classify", "q.bin"]);
    assert!(!String::from_utf8_lossy(&again.stderr).contains("corrupt"));
}

#[test]
fn bad_worker_count_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_kglab"))
        .args(["groundstate", "--beta", "0"])
        .current_dir(d.path())
        .env("KGLAB_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_reports_json_per_criterion() {
    let d = tempfile::tempdir().unwrap();
    let o = kglab(
        d.path(),
        &["validate", "--criteria", "3", "--report", "r.json"],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = json(&d.path().join("r.json"));
    assert_eq!(r["outcomes"][0]["id"], 3);
    assert_eq!(r["outcomes"][0]["passed"], true);
    assert_eq!(
        kglab(d.path(), &["validate", "--criteria", "42"])
            .status
            .code(),
        Some(2)
    );
}
