use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_surface-nls"));
    c.env_remove("SURFACE_NLS_OUTPUT_DIR").env_remove("SURFACE_NLS_WORKERS");
    c
}

fn run_with(sub: &str, config: &str, dir: &Path) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    bin()
        .arg(sub)
        .arg(&path)
        .env("SURFACE_NLS_OUTPUT_DIR", dir.join("out"))
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn selftest_passes() {
    let out = bin().arg("selftest").output().unwrap();
    let stdout = text(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().count() >= 4);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")), "{stdout}");
}

#[test]
fn empty_sweep_is_a_config_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("almost-conservation", "s = 0.7\nn_list = []\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains(":2:") && err.contains("n_list"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_and_misplaced_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("locality", "quadruples = 10\nbogus = 1\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("bogus"));
    let out = run_with("locality", "quadruples = 10\ndt = 0.1\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains(":2: dt"), "{}", text(&out.stderr));
    let out = run_with("locality", "experiment = \"evolve\"\n", dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_refusal_exits_3_and_names_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_with("tensorize", "mode_cap = 51\n", dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("required budget"));
}

#[test]
fn runs_are_deterministic_and_write_artifacts() {
    let config = "quadruples = 20\nn_max = 2\ncutoff = 5.0\nseed = 7\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run_with("an-identity", config, d.path());
        assert!(out.status.success(), "{}", text(&out.stderr));
        assert!(text(&out.stdout).contains("overall: PASS"));
    }
    let csv_a = fs::read_to_string(a.path().join("out/an-identity.csv")).unwrap();
    let csv_b = fs::read_to_string(b.path().join("out/an-identity.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert!(csv_a.starts_with("quadruple,xi1_x,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "an-identity");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["quadruples"], 20);
    assert_eq!(manifest["passed"], true);
    assert!(a.path().join("out/summary.txt").exists());
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        let src = surface_nls::config::ConfigSource::load(&path).unwrap();
        let exp = src.config.experiment.expect("configs name their experiment");
        src.check_for(exp).unwrap();
    }
}
