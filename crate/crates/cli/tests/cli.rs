use std::fs;
use std::path::Path;

use hetnet_coop_cli::output::CSV_HEADER;
use hetnet_coop_cli::run;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hetnet-coop").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn records(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    r.records().map(Result::unwrap).collect()
}

const SYMMETRIC: &str = r#"
[macro]
density_per_m2 = 0.01
power_dbm = 40.0
antennas = 1
users = 1
bias = 1.0

[small]
density_per_m2 = 0.01
power_dbm = 40.0
antennas = 1
users = 1
bias = 1.0

[scenario]
cluster_size = 1
"#;

#[test]
fn threshold_sweep_writes_full_grid_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cov.csv");
    let o = cli(&[
        "coverage-sweep",
        "--strategies",
        "SISO,SDMA",
        "--trials",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = records(&out);
    assert_eq!(rows.len(), 7 * 2 * 2 * 2);
    assert!(rows.iter().all(|r| &r[10] == ""));
    let sidecar = dir.path().join("cov.csv.resolved.toml");
    assert!(sidecar.exists());

    // The sidecar alone reproduces the run byte for byte.
    let again = dir.path().join("again.csv");
    let o = cli(&[
        "coverage-sweep",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn analytic_only_bias_sweep_runs_no_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bias.csv");
    let o = cli(&[
        "bias-sweep",
        "--engines",
        "analytic",
        "--strategies",
        "SISO",
        "--grid",
        "0.5,1,2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let rows = records(&out);
    assert_eq!(rows.len(), 3 * 2);
    for r in &rows {
        assert_eq!(&r[0], "bias_ratio");
        assert_eq!(&r[4], "analytic");
        assert_eq!(&r[8], "");
        let v: f64 = r[6].parse().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let out = out.to_str().unwrap();
    assert_eq!(cli(&["coverage-sweep", "--grid", "5:1:1", "--out", out]).code, 2);
    assert_eq!(cli(&["coverage-sweep", "--trials", "0", "--out", out]).code, 2);
    assert_eq!(cli(&["bias-sweep", "--variable", "threshold_db", "--out", out]).code, 2);
    assert_eq!(cli(&["no-such-command"]).code, 2);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[small]\ndensity_per_m2 = -1.0\n").unwrap();
    let o = cli(&["validate", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("configuration"), "{}", o.stderr);

    fs::write(&bad, "[small]\ndensity = 0.1\n").unwrap();
    assert_eq!(cli(&["validate", "--config", bad.to_str().unwrap(), "--out", out]).code, 2);
    assert_eq!(cli(&["validate", "--config", "/nonexistent/x.toml", "--out", out]).code, 2);
}

#[test]
fn symmetric_association_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sym.toml");
    fs::write(&cfg, SYMMETRIC).unwrap();
    let out = dir.path().join("v.csv");
    let o = cli(&[
        "validate",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "4000",
        "--out",
        out.to_str().unwrap(),
    ]);
    let assoc: Vec<&str> = o.stdout.lines().filter(|l| l.contains("association/")).collect();
    assert_eq!(assoc.len(), 2, "{}", o.stdout);
    for line in assoc {
        assert!(line.starts_with("PASS"), "{line}");
        assert!(line.contains("analytic=0.50000"), "{line}");
    }
}

#[test]
fn corrupted_delta_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    let o = cli(&[
        "validate",
        "--trials",
        "4000",
        "--corrupt-delta",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 1, "{}", o.stdout);
    assert!(o.stdout.lines().any(|l| l.starts_with("FAIL")));
    // Two rows per check: 2 association, 6 coverage, 2 rate.
    assert_eq!(records(&out).len(), 2 * 10);
}
