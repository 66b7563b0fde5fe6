use std::path::Path;
use std::process::{Command, Output};

use ncqpt::sweep::{parse_csv, Flag};

const CONFIG: &str = "\
[model]
n = 2

[curve]
delta = lambda*sin(pi/4)
h = lambda*cos(pi/4)

[grid]
lambda_min = 0.5
lambda_max = 1.5
points = 101

[measures]
list = coherence_l1, geometric_entanglement, berry_phase, order_parameter
";

fn ncqpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncqpt"))
        .args(args)
        .env_remove(ncqpt::cli::CACHE_ENV)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("sweep.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn scan_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("run");
    let o = ncqpt(&["scan", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let rows = parse_csv(&std::fs::read_to_string(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 101 * 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let cps = report["critical_points"].as_array().unwrap();
    assert_eq!(cps.len(), 1);
    assert!((cps[0]["lambda_c"].as_f64().unwrap() - 1.0).abs() < 0.01);
    assert_eq!(cps[0]["classification"], "divergent");
    let berry = cps[0]["berry_jump"].as_f64().unwrap().abs();
    let expected = 2.0 * std::f64::consts::PI * std::f64::consts::FRAC_1_SQRT_2;
    assert!((berry - expected).abs() < 0.05 * expected);
    assert!(out.join("cache").is_dir());
}

#[test]
fn report_rerenders_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("run");
    assert_eq!(ncqpt(&["scan", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let o = ncqpt(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), std::fs::read_to_string(out.join("report.json")).unwrap());
}

#[test]
fn unreadable_config_exits_2() {
    let o = ncqpt(&["scan", "/nonexistent/sweep.cfg", "--out", "/tmp/unused-ncqpt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("n = 2", "n = 2\nflavor = up"));
    let o = ncqpt(&["scan", &cfg, "--no-cache", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.flavor"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ncqpt(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ncqpt(&["measure"]).status.code(), Some(2));
}

#[test]
fn measure_at_the_crossing_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let o = ncqpt(&["measure", &cfg, "--lambda", "1.0", "--no-cache"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.has(Flag::Crossing)));

    let o = ncqpt(&["measure", &cfg, "--lambda", "0.7", "--no-cache"]);
    let rows = parse_csv(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let c = rows.iter().find(|r| r.measure == "coherence_l1[computational]").unwrap();
    assert!((c.value.unwrap() - 1.0).abs() < 1e-10);
    assert!(!c.has(Flag::Crossing));
}

#[test]
fn measure_outside_the_range_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    assert_eq!(ncqpt(&["measure", &cfg, "--lambda", "-3", "--no-cache"]).status.code(), Some(2));
}

#[test]
fn cached_and_uncached_scans_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let cache = dir.path().join("shared-cache");
    let mut outputs = Vec::new();
    for (name, extra) in [("a", vec!["--no-cache"]), ("b", vec!["--cache", cache.to_str().unwrap()]), ("c", vec!["--cache", cache.to_str().unwrap(), "--parallelism", "3"])] {
        let out = dir.path().join(name);
        let mut args = vec!["scan", cfg.as_str(), "--out", out.to_str().unwrap()];
        args.extend(extra);
        let o = ncqpt(&args);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn cache_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let cache = dir.path().join("env-cache");
    let o = Command::new(env!("CARGO_BIN_EXE_ncqpt"))
        .args(["scan", &cfg, "--out", dir.path().join("o").to_str().unwrap()])
        .env(ncqpt::cli::CACHE_ENV, &cache)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);
}
