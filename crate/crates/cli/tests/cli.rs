use std::fs;
use std::path::Path;

use assert_cmd::Command;

fn qmemlab() -> Command {
    Command::cargo_bin("qmemlab").unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bath_audit_defaults_report_inverse_square_tail() {
    let dir = tempfile::tempdir().unwrap();
    qmemlab().args(["bath-audit", "--out"]).arg(dir.path()).assert().code(0);
    let audit = json(&dir.path().join("bath_audit.json"));
    let p = audit["tail_exponent"].as_f64().unwrap();
    assert!((p - 2.0).abs() < 0.05, "{p}");
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "bath-audit");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(manifest["versions"]["qmemlab"].is_string());
}

#[test]
fn unknown_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[params]\nsizes = [2]\ntemperature = 3\n").unwrap();
    let out = qmemlab().args(["kitaev-gap", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).assert().code(2);
    let stderr = String::from_utf8(out.get_output().stderr.clone()).unwrap();
    assert!(stderr.contains("temperature"), "{stderr}");
}

#[test]
fn domain_error_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[params]\nsizes = [2]\nbeta = -1.0\n").unwrap();
    let out = qmemlab().args(["kitaev-gap", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).assert().code(2);
    let stderr = String::from_utf8(out.get_output().stderr.clone()).unwrap();
    assert!(stderr.contains("beta"), "{stderr}");
}

#[test]
fn failed_property_check_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[params]\nising_sizes = [3]\nkitaev_sizes = []\nbetas = [1.0]\nrelax_factor = 0.01\n").unwrap();
    qmemlab().args(["davies-properties", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("o")).assert().code(3);
    assert!(dir.path().join("o/manifest.json").exists());
}

#[test]
fn kitaev_gap_small_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "experiment = \"kitaev-gap\"\n[params]\nsizes = [2]\n").unwrap();
    qmemlab().args(["kitaev-gap", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).assert().code(0);
    let csv = fs::read_to_string(dir.path().join("kitaev_gap.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let gap: f64 = row[2].parse().unwrap();
    assert!((gap - 0.121675).abs() < 1e-5, "{gap}");
}

#[test]
fn davies_properties_small_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[params]\nising_sizes = [3, 4]\nkitaev_sizes = [2]\nbetas = [0.5]\n").unwrap();
    qmemlab().args(["davies-properties", "--seed", "7", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).assert().code(0);
    let report = json(&dir.path().join("davies_properties.json"));
    assert_eq!(report["all_pass"], true);
    assert_eq!(json(&dir.path().join("manifest.json"))["seed"], 7);
    let written = fs::read_to_string(dir.path().join("config.toml")).unwrap();
    assert!(written.contains("seed = 7"));
}

#[test]
fn lifetime_runs_and_rerun_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "seed = 11\nformats = [\"csv\", \"json\", \"gnuplot\"]\n[params]\nmodel = \"ising1d\"\nsizes = [5]\nbetas = [0.3]\nn_trajectories = 24\nsamples = 200\nt_initial = 20.0\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    qmemlab().args(["ising-lifetime", "--config"]).arg(&cfg).arg("--out").arg(&a).assert().code(0);
    qmemlab().args(["ising-lifetime", "--config"]).arg(a.join("config.toml")).arg("--out").arg(&b).assert().code(0);
    let csv_a = fs::read_to_string(a.join("lifetime.csv")).unwrap();
    assert!(csv_a.starts_with("model,N_or_L,beta,observable,decoder,gamma,stderr,mode\n"));
    assert_eq!(csv_a, fs::read_to_string(b.join("lifetime.csv")).unwrap());
    assert!(a.join("lifetime.dat").exists());
    assert_eq!(json(&a.join("manifest.json"))["config_hash"], json(&b.join("manifest.json"))["config_hash"]);
}

#[test]
fn lifetime_model_must_match_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[params]\nmodel = \"ising2d\"\n").unwrap();
    qmemlab().args(["kitaev-lifetime", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).assert().code(2);
}

#[test]
fn kitaev_lifetime_small() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "formats = [\"csv\"]\n[params]\nsizes = [3]\nn_trajectories = 20\nsamples = 200\n").unwrap();
    qmemlab().args(["kitaev-lifetime", "--threads", "1", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).assert().code(0);
    let csv = fs::read_to_string(dir.path().join("lifetime.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.contains("kitaev_sector,3,1,dressed,min_weight_matching"));
    assert!(!dir.path().join("lifetime.json").exists());
}

#[test]
fn errormap_audit_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[params]\ntime_points = 151\n[params.chain]\nn_qubits = 6\ncoupling = 1.0\nfield = 1.0\n").unwrap();
    qmemlab().args(["errormap-audit", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).assert().code(0);
    let report = json(&dir.path().join("errormap.json"));
    assert!(report["unitarity_error"].as_f64().unwrap() < 1e-10);
    assert!(dir.path().join("support_spectra.csv").exists());
    assert!(dir.path().join("error_weights.csv").exists());
}

#[test]
fn missing_config_file_exits_2() {
    qmemlab().args(["bath-audit", "--config", "/nonexistent/x.toml"]).assert().code(2);
}
