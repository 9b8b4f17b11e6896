use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::fs;
use std::process::{Command, Output};

use qwork_cli::commands::{single_report, theta_file_name, FIG1_HEADER};
use qwork_cli::config::{Format, Overrides, RunConfig};

fn qwork(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qwork"));
    cmd.args(args).env_remove("QWORK_THREADS");
    if let Some(n) = threads {
        cmd.env("QWORK_THREADS", n);
    }
    cmd.output().expect("spawn qwork")
}

fn column(text: &str, idx: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn fig1_defaults_write_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = qwork(&["fig1", "--out", dir.path().to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csvs: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(csvs.len(), 3);
    for e in csvs {
        let text = fs::read_to_string(e.path()).unwrap();
        assert_eq!(text.lines().next().unwrap(), FIG1_HEADER);
        assert_eq!(text.lines().count(), 61);
        assert!(column(&text, 3).iter().all(|&x| x <= 1.0 + 1e-9));
    }
    let quarter = fs::read_to_string(dir.path().join(theta_file_name(FRAC_PI_4, Format::Csv))).unwrap();
    assert!(column(&quarter, 4).iter().all(|&x| x.abs() < 1e-12));
    assert!(column(&quarter, 5).iter().all(|&x| (x - 1.0).abs() < 1e-12));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig1_metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["columns"], FIG1_HEADER);
}

#[test]
fn report_matches_library_call() {
    let out = qwork(&["report", "--theta", &FRAC_PI_8.to_string(), "--sigma", "0.5", "--format", "json"], None);
    assert!(out.status.success());
    let cfg = RunConfig::resolve(Overrides {
        theta: Some(vec![FRAC_PI_8]),
        sigma: Some(0.5),
        ..Default::default()
    })
    .unwrap();
    let lib = serde_json::to_string_pretty(&single_report(&cfg, FRAC_PI_8).unwrap()).unwrap() + "\n";
    assert_eq!(String::from_utf8(out.stdout).unwrap(), lib);
}

#[test]
fn report_special_cases() {
    let out = qwork(&["report", "--scheme", "projective", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["v_w"], 0.0);
    let out = qwork(&["report", "--theta", "0", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["c"], 0.0);
}

#[test]
fn verify_passes_on_defaults_and_fails_on_fault() {
    let ok = qwork(&["verify"], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = qwork(&["verify", "--tol-propagator", "1.0"], None);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL propagator"));
}

#[test]
fn verify_degenerate_profile_checks_survived_coherence() {
    let out = qwork(&["verify", "--omega0", "0", "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0));
    let checks: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let sc = checks.as_array().unwrap().iter().find(|c| c["name"] == "survived_coherence").unwrap();
    assert_eq!(sc["passed"], true);
    assert_eq!(sc["residual"], 0.0);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "theta = [0.0]\nsigma = 0.3\nformat = \"json\"\n").unwrap();
    let out = qwork(&["--config", cfg.to_str().unwrap(), "report", "--theta", "0.5"], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["c"].as_f64().unwrap() > 0.0);
    assert_eq!(v["provenance"]["scheme"]["sigma"], 0.3);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["report", "--tol-quadrature", "0"],
        vec!["fig1", "--sigma-min", "1", "--sigma-max", "0.1"],
        vec!["report", "--theta", "-0.1"],
    ] {
        let out = qwork(&args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(qwork(&["report"], Some("zero")).status.code(), Some(2));
    let missing = qwork(&["--config", "/nonexistent/run.toml", "report"], None);
    assert_eq!(missing.status.code(), Some(2));
    let file = tempfile::NamedTempFile::new().unwrap();
    let blocked = file.path().join("fig1");
    let out = qwork(&["fig1", "--out", blocked.to_str().unwrap(), "--sigma-points", "2"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_is_independent_of_thread_count() {
    let args = ["scan", "--theta", "0.2,0.4,0.6", "--sigma-points", "12"];
    let one = qwork(&args, Some("1"));
    let many = qwork(&args, Some("7"));
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
}
