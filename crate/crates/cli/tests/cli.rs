//! CLI smoke tests: determinism contracts, flag validation, formats.

use std::fs;
use std::path::Path;

fn run_in(dir: &Path, args: &[&str]) -> i32 {
    let mut argv: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    argv.extend(["--output-dir".to_string(), dir.display().to_string()]);
    kpp_cli::run(argv)
}

fn read_run_file(root: &Path, run: &str, file: &str) -> String {
    fs::read_to_string(root.join(run).join(file)).unwrap()
}

#[test]
fn simulate_same_seed_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--seed", "7", "--origin-y", "1", "--horizon", "1.5",
        "--replicas", "20"];
    assert_eq!(run_in(tmp.path(), &args), 0);
    assert_eq!(run_in(tmp.path(), &args), 0);
    let a = read_run_file(tmp.path(), "run-000-simulate", "snapshots.csv");
    let b = read_run_file(tmp.path(), "run-001-simulate", "snapshots.csv");
    assert!(!a.is_empty() && a.lines().count() > 10);
    assert_eq!(a, b, "same seed must give byte-identical snapshot CSVs");
    // Different seed changes the bytes.
    let args2 = ["simulate", "--seed", "8", "--origin-y", "1", "--horizon", "1.5",
        "--replicas", "20"];
    assert_eq!(run_in(tmp.path(), &args2), 0);
    let c = read_run_file(tmp.path(), "run-002-simulate", "snapshots.csv");
    assert_ne!(a, c);
    // Manifests exist beside every output.
    for run in ["run-000-simulate", "run-001-simulate", "run-002-simulate"] {
        let manifest = read_run_file(tmp.path(), run, "manifest.json");
        assert!(manifest.contains("\"command\": \"simulate\""));
        assert!(manifest.contains("wall_time_secs"));
    }
}

#[test]
fn unknown_flags_give_usage_and_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    assert_ne!(run_in(tmp.path(), &["simulate", "--no-such-flag"]), 0);
    assert_ne!(run_in(tmp.path(), &["frobnicate"]), 0);
}

#[test]
fn pde_wave_speed_guard() {
    let tmp = tempfile::tempdir().unwrap();
    // Rounded-down sqrt(2) is accepted (1e-6 tolerance); run a tiny grid.
    let ok = run_in(
        tmp.path(),
        &["pde-wave", "--c", "1.4142135", "--x-lo", "-4", "--Lx", "6", "--Ly", "8",
            "--h", "0.2", "--tol", "1e-5"],
    );
    assert_eq!(ok, 0);
    let sidecar = read_run_file(tmp.path(), "run-000-pde-wave", "field.json");
    assert!(sidecar.contains("\"converged\": true"));
    // c = 1.0 has no wave.
    assert_ne!(run_in(tmp.path(), &["pde-wave", "--c", "1.0"]), 0);
    // Plain supercritical c needs the martingale parameters.
    assert_ne!(run_in(tmp.path(), &["pde-wave", "--c", "1.7"]), 0);
}

#[test]
fn config_file_overrides_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    fs::write(&cfg, "seed = 123\nreplicas = 5\n").unwrap();
    let args = [
        "simulate", "--seed", "1", "--replicas", "50", "--horizon", "1.0",
        "--config", cfg.to_str().unwrap(),
    ];
    assert_eq!(run_in(tmp.path(), &args), 0);
    let manifest = read_run_file(tmp.path(), "run-000-simulate", "manifest.json");
    assert!(manifest.contains("\"seed\": 123"), "file seed must win: {manifest}");
    let csv = read_run_file(tmp.path(), "run-000-simulate", "snapshots.csv");
    let max_replica = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse::<u64>().unwrap())
        .max()
        .unwrap();
    assert_eq!(max_replica, 4, "file replicas=5 must win over flag 50");
}

#[test]
fn mc_wave_probe_csv_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let code = run_in(
        tmp.path(),
        &["mc-wave", "--x", "-1", "--x", "0", "--x", "1", "--y", "1", "--T", "1",
            "--replicas", "300", "--extinction"],
    );
    assert_eq!(code, 0);
    let csv = read_run_file(tmp.path(), "run-000-mc-wave", "probes.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "x,y,estimate,std_error,replicas,T,alpha");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    // Common random numbers: strictly decreasing in x.
    assert!(rows[0][2] > rows[1][2] && rows[1][2] > rows[2][2]);
    for row in &rows {
        assert!((0.0..=1.0).contains(&row[2]), "estimates are probabilities");
    }
}

#[test]
fn ode_and_fit_tail_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["ode-1d", "--phi", "--y-max", "25"]), 0);
    let csv = read_run_file(tmp.path(), "run-000-ode-1d", "phi.csv");
    assert!(csv.starts_with("x,value\n0,0\n"));
    assert_eq!(run_in(tmp.path(), &["fit-tail"]), 0);
    let fit = read_run_file(tmp.path(), "run-001-fit-tail", "tail_fit.csv");
    let row: Vec<&str> = fit.lines().nth(1).unwrap().split(',').collect();
    let k_star: f64 = row[2].parse().unwrap();
    assert!(k_star > 0.0 && k_star < 10.0, "K* = {k_star}");
}

#[test]
fn potential_checks_pass_and_write_reports() {
    let tmp = tempfile::tempdir().unwrap();
    for check in ["green", "eta", "harmonicity"] {
        let code = run_in(tmp.path(), &["potential", "--check", check]);
        assert_eq!(code, 0, "potential --check {check} failed");
    }
    let report = read_run_file(tmp.path(), "run-000-potential", "report.csv");
    assert!(report.starts_with("check,param,y,value,tolerance,pass"));
    assert!(report.contains("green-hand-value"));
}

#[test]
fn plot_flag_writes_svg() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_in(tmp.path(), &["ode-1d", "--c", "2.0", "--plot"]), 0);
    let svg = read_run_file(tmp.path(), "run-000-ode-1d", "wave.svg");
    assert!(svg.starts_with("<svg xmlns"));
    assert!(svg.contains("<polyline"));
}
