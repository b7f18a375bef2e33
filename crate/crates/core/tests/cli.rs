use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kernel-bounds"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], config_name: &str, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config(config_name))
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn kernel_scan_writes_all_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["kernel-scan"], "quartic.json", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["kernel-scan.csv", "kernel-scan_summary.json", "kernel-scan.log"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("kernel-scan.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("t,kappa_lower,kappa_upper,"), "{header}");
    assert!(header.ends_with(",status"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn summary_json_has_hash_seeds_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["metric-scan", "--seed", "7"], "quartic_tangential.json", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("metric-scan_summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "metric-scan");
    assert_eq!(v["seeds"]["seed"], 7);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let verdicts = v["verdicts"].as_object().unwrap();
    assert!(!verdicts.is_empty());
    assert!(verdicts.values().all(|x| x["status"] == "pass"));
    // the embedded config round-trips through the same loader
    let reparsed = kernel_bounds::cli::RunConfig::from_json(&v["config"].to_string()).unwrap();
    assert_eq!(reparsed.seed, 7);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&["kernel-scan"], "expflat.json", d.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["kernel-scan.csv", "kernel-scan_summary.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn szego_scan_without_convex_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["szego-scan"], "expflat.json", dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("convex"), "{err}");
    assert!(!dir.path().join("szego-scan.csv").exists());
}

#[test]
fn convex_flag_enables_szego_upper() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["szego-scan", "--convex", "--points", "12"], "expflat.json", dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unwritable_output_exits_two_and_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, b"x").unwrap();
    let out = run(&["kernel-scan"], "quartic.json", &blocker.join("sub"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocker"));
}

#[test]
fn bad_override_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["kernel-scan", "--t-min", "1e-2", "--t-max", "1e-3"], "quartic.json", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_m"));
}

#[test]
fn missing_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("kernel-scan").arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_check_command_passes() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, cfg) in [
        ("profile-check", "expflat_p2.json"),
        ("integral-check", "quartic.json"),
        ("oracle-validate", "quartic.json"),
        ("extended-scan", "extended.json"),
    ] {
        let out = run(&[cmd], cfg, dir.path());
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stdout));
    }
}
