use std::path::Path;
use std::process::{Command, Output};

fn wgauss(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgauss")).arg("-o").arg(out).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

const SMALL: [&str; 6] = ["--set", "mc.n_samples=2000", "--set", "verify.cases=20", "--set", "invariance.draws=1000"];

fn small<'a>(rest: &[&'a str]) -> Vec<&'a str> {
    SMALL.iter().copied().chain(rest.iter().copied()).collect()
}

#[test]
fn chain_rule_suite_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgauss(dir.path(), &["verify", "chain-rule"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(dir.path(), "verify_chain-rule.csv");
    assert!(csv.starts_with("quantity,value,reference,std_error,tolerance,holds,seed\n"));
    assert_eq!(csv.lines().count(), 1 + 200);
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary.json")).unwrap();
    assert_eq!(summary["failed"], 0);
    assert_eq!(summary["seed"], 0);
}

#[test]
fn every_suite_passes_on_a_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgauss(dir.path(), &small(&["verify", "all"]));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("all: "));
}

#[test]
fn heat_bound_dominates_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgauss(dir.path(), &["--set", "basis.M=50", "--set", "heat.t=1", "heat-bound"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(dir.path(), "heat_bound.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 51);
    for r in &rows {
        let (exact, bound): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!(exact <= bound, "{r:?}");
    }
}

#[test]
fn heat_bound_outside_the_tail_regime_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgauss(dir.path(), &["--set", "heat.t=0.001", "heat-bound"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).starts_with("error kind=config code=2 "));
}

#[test]
fn simulate_then_distance_to_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgauss(dir.path(), &["--set", "simulate.paths=200", "simulate"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["path.csv", "snapshot.csv", "summary.csv", "report.csv", "config.txt"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let snap = dir.path().join("snapshot.csv");
    let snap = snap.to_str().unwrap();
    let o = wgauss(dir.path(), &["wasserstein", snap, snap]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = read(dir.path(), "wasserstein.csv");
    let d: f64 = csv.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(d.abs() <= 1e-12, "{csv}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        assert_eq!(code(&wgauss(dir.path(), &small(&["verify", "ibp"]))), 0);
        assert_eq!(code(&wgauss(dir.path(), &["--set", "simulate.paths=100", "simulate"])), 0);
    }
    for f in ["verify_ibp.csv", "summary.json", "path.csv", "summary.csv", "report.csv", "snapshot.csv"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
}

#[test]
fn config_file_must_set_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "basis.M = 4\n").unwrap();
    let o = wgauss(dir.path(), &["-c", cfg.to_str().unwrap(), "heat-bound"]);
    assert_eq!(code(&o), 2);
    std::fs::write(&cfg, "mc.seed = 11\nbasis.M = 4\n").unwrap();
    let o = wgauss(dir.path(), &["-c", cfg.to_str().unwrap(), "heat-bound"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(read(dir.path(), "heat_bound.csv").lines().skip(1).all(|l| l.ends_with(",11")));
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--set", "functions=median", "verify", "c1"][..],
        &["--set", "tol.chain_rule=0", "verify", "chain-rule"],
        &["--set", "no.such.key=1", "heat-bound"],
        &["--set", "simulate.init=bogus", "simulate"],
    ] {
        let o = wgauss(dir.path(), args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unreadable_or_malformed_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x_1,weight\n0.5,not-a-number\n").unwrap();
    let missing = dir.path().join("missing.csv");
    for (mu, nu) in [(&bad, &bad), (&missing, &bad)] {
        let o = wgauss(dir.path(), &["wasserstein", mu.to_str().unwrap(), nu.to_str().unwrap()]);
        assert_eq!(code(&o), 3, "{}", stderr(&o));
        assert!(stderr(&o).starts_with("error kind=io code=3 "));
    }
}

#[test]
fn failed_checks_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = wgauss(dir.path(), &small(&["--set", "c1.constant=1e-6", "verify", "c1"]));
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(read(dir.path(), "verify_c1.csv").contains(",false,"));
}

#[test]
fn sinkhorn_out_of_iterations_exits_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let (mu, nu) = (dir.path().join("mu.csv"), dir.path().join("nu.csv"));
    std::fs::write(&mu, "x_1,weight\n0,0.5\n1,0.5\n").unwrap();
    std::fs::write(&nu, "x_1,weight\n0.3,0.25\n2,0.75\n").unwrap();
    let args = ["--set", "solver.method=sinkhorn", "--set", "solver.max_iter=2", "wasserstein", mu.to_str().unwrap(), nu.to_str().unwrap()];
    let o = wgauss(dir.path(), &args);
    assert_eq!(code(&o), 5, "{}", stderr(&o));
    assert!(dir.path().join("wasserstein.csv").exists());
}
