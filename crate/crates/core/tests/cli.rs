//! End-to-end runs of the `bwave` binary.

use std::path::Path;
use std::process::{Command, Output};

use bwave::io_cli::{read_field, Expect};

fn bwave(dir: &Path, args: &[&str], config: &str, env: &[(&str, &str)]) -> Output {
    let cfg = dir.join("run.ini");
    std::fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bwave"));
    cmd.current_dir(dir).args(args).arg(&cfg).env_remove("BWAVE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

const ORACLE: &str = "[params]\nn = 1\np = 2\nc = 0.4\n[grid]\nN = 1024\nL = 60\n[solver]\ntol = 1e-10\n[output]\ndir = out\n";

#[test]
fn solve_oracle_case() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bwave(tmp.path(), &["solve"], ORACLE, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(tmp.path().join("out/summary.csv")).unwrap();
    let residual: f64 = column(&summary, "residual")[0].parse().unwrap();
    assert!(residual <= 1e-10);
    assert_eq!(column(&summary, "verdict")[0], "exponential");
    let expect = Expect { sizes: Some(vec![1024]), c: Some(vec![0.4]), p: Some(2.0), ..Default::default() };
    let f = read_field(&tmp.path().join("out/profile.bwf"), Some(&expect)).unwrap();
    assert!((f.field.max_abs() - 1.26).abs() < 1e-6);
    assert!(!tmp.path().join("out/.bwave.lock").exists());
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[params]\nn = 2\np = 2\nc = 0.3 0.1\n[grid]\nN = 32 32\nL = 10 10\n[evolve]\nT = 0.2\ndt = 0.01\nmonitor_every = 5\nmembership = on\n[output]\ndir = out\n";
    let mut seen = Vec::new();
    for _ in 0..2 {
        let o = bwave(tmp.path(), &["--deterministic", "evolve"], cfg, &[("BWAVE_THREADS", "4")]);
        assert!(o.status.success(), "{}", stderr(&o));
        seen.push(std::fs::read(tmp.path().join("out/monitor.csv")).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
    let text = String::from_utf8(seen.pop().unwrap()).unwrap();
    assert!(text.starts_with("t,E,F1,F2,h1,I,I1,I2,orbdist,gap,membership\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn stuck_dcurve_keeps_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[params]\nn = 2\np = 2\ndirection = 1 0\nzeta = 0:0.1:0.5\n[grid]\nN = 32 32\nL = 12 12\n[solver]\nfault_speed_limit = 0.25\n[output]\ndir = out\n";
    let o = bwave(tmp.path(), &["dcurve"], cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ERROR CONTINUATION_STUCK:"), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("out/dcurve.csv")).unwrap();
    assert_eq!(column(&csv, "zeta").len(), 3);
    assert!(csv.starts_with("zeta,d,Lhalf_norm2,d1_fd,d1_formula,d2_fd,classification\n"));
}

#[test]
fn numerical_failures_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ORACLE.replace("tol = 1e-10", "tol = 1e-10\nmax_iter = 2");
    let o = bwave(tmp.path(), &["solve"], &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ERROR NO_CONVERGENCE:"));
}

#[test]
fn configuration_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (ORACLE.replace("c = 0.4", "c = 1.2"), "ERROR RANGE_VIOLATION: params.c"),
        (ORACLE.replace("[output]", "[solver]\ngama = 1\n[output]"), "ERROR UNKNOWN_KEY: solver.gama"),
        (ORACLE.replace("p = 2\n", ""), "ERROR MISSING_KEY: params.p"),
        (ORACLE.replace("N = 1024", "N = 1023"), "ERROR RANGE_VIOLATION: grid.N"),
    ];
    for (cfg, prefix) in cases {
        let o = bwave(tmp.path(), &["solve"], &cfg, &[]);
        assert_eq!(o.status.code(), Some(1), "{prefix}");
        assert!(stderr(&o).starts_with(prefix), "{} vs {prefix}", stderr(&o));
    }
    let o = bwave(tmp.path(), &["solve"], ORACLE, &[("BWAVE_THREADS", "0")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR RANGE_VIOLATION: BWAVE_THREADS"));
}

#[test]
fn locked_directory_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(tmp.path().join("out")).unwrap();
    std::fs::write(tmp.path().join("out/.bwave.lock"), "").unwrap();
    let o = bwave(tmp.path(), &["regions"], "[output]\ndir = out\n", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR LOCKED:"));
}

#[test]
fn regions_for_three_dimensions() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bwave(tmp.path(), &["regions"], "[regions]\nn = 2 5 8\n[output]\ndir = out\nprefix = fig_\n", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for n in [2, 5, 8] {
        let csv = std::fs::read_to_string(tmp.path().join(format!("out/fig_regions_n{n}.csv"))).unwrap();
        assert!(csv.starts_with("n,p,c,orbital_unstable,strong_unstable\n"));
        let ps: Vec<f64> = column(&csv, "p").iter().map(|s| s.parse().unwrap()).collect();
        let cs: Vec<f64> = column(&csv, "c").iter().map(|s| s.parse().unwrap()).collect();
        let strong = column(&csv, "strong_unstable");
        for k in 0..ps.len() {
            assert_eq!(strong[k] == "true", cs[k] * cs[k] < (ps[k] - 1.0) / (ps[k] + 3.0));
        }
    }
}

#[test]
fn evolve_with_snapshots_and_field_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "[params]\nn = 1\np = 3\nc = 0.2\n[grid]\nN = 64\nL = 16\n[evolve]\ninitial = random\namplitude = 0.3\nseed = 9\nT = 0.5\ndt = 0.01\nband = 4\nsnapshots = on\n[output]\ndir = a\n";
    let o = bwave(tmp.path(), &["evolve"], cfg, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["u0.bwf", "v0.bwf", "u_final.bwf", "v_final.bwf", "monitor.csv"] {
        assert!(tmp.path().join("a").join(f).exists(), "{f}");
    }
    // restart from the written snapshot: the continued run starts where the first ended
    let again = "[params]\nn = 1\np = 3\nc = 0.2\n[grid]\nN = 64\nL = 16\n[evolve]\ninitial = fields\nu_field = a/u_final.bwf\nv_field = a/v_final.bwf\nT = 0.5\ndt = 0.01\nband = 4\n[output]\ndir = b\n";
    let o = bwave(tmp.path(), &["evolve"], again, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let first = std::fs::read_to_string(tmp.path().join("a/monitor.csv")).unwrap();
    let second = std::fs::read_to_string(tmp.path().join("b/monitor.csv")).unwrap();
    let e1: f64 = column(&first, "E").last().unwrap().parse().unwrap();
    let e2: f64 = column(&second, "E")[0].parse().unwrap();
    assert!((e1 - e2).abs() < 1e-12 * e1.abs());
    let bad = again.replace("N = 64", "N = 32");
    let o = bwave(tmp.path(), &["evolve"], &bad, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR HEADER_MISMATCH:"));
}
