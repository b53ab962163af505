use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use edqueue::cli::report::KvReport;

fn edqueue(args: &[&str]) -> i32 {
    let out = Command::new(env!("CARGO_BIN_EXE_edqueue"))
        .args(args)
        .output()
        .expect("binary runs");
    out.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const SMALL_CONFIG: &str = "\
lambda_per_period = 10
capacity_per_meeting = 10
period_days = 30
queue_cap = 50
selection_policy = random
rejection_policy = random
horizon_periods = 400
warmup_periods = 20
seed = 8
";

fn kv(path: &Path) -> KvReport {
    KvReport::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.cfg", SMALL_CONFIG);
    let out = dir.path().join("run");
    assert_eq!(edqueue(&["simulate", "--config", p(&cfg), "--out", p(&out)]), 0);
    for name in [
        "config.txt",
        "waiting_times.txt",
        "trace_summary.txt",
        "histogram.csv",
        "manifest.txt",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let hist = fs::read_to_string(out.join("histogram.csv")).unwrap();
    let integral: f64 = hist
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[1] - f[0]) * f[3]
        })
        .sum();
    assert!((integral - 1.0).abs() < 1e-9, "{integral}");
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.cfg", SMALL_CONFIG);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(edqueue(&["simulate", "--config", p(&cfg), "--out", p(&a)]), 0);
    assert_eq!(edqueue(&["simulate", "--config", p(&cfg), "--out", p(&b)]), 0);
    for name in ["waiting_times.txt", "histogram.csv", "config.txt"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn simulate_replicas_concatenate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.cfg", SMALL_CONFIG);
    let (one, three) = (dir.path().join("one"), dir.path().join("three"));
    assert_eq!(edqueue(&["simulate", "--config", p(&cfg), "--out", p(&one)]), 0);
    assert_eq!(
        edqueue(&["simulate", "--config", p(&cfg), "--out", p(&three), "--replicas", "3"]),
        0
    );
    let lines = |d: &Path| fs::read_to_string(d.join("waiting_times.txt")).unwrap();
    let (l1, l3) = (lines(&one), lines(&three));
    assert!(l3.starts_with(&l1));
    assert!(l3.lines().count() > 2 * l1.lines().count());
    assert_eq!(edqueue(&["simulate", "--config", p(&cfg), "--out", p(&three), "--replicas", "0"]), 2);
}

#[test]
fn simulate_bad_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "period_days = -1\n");
    let out = dir.path().join("run");
    assert_eq!(edqueue(&["simulate", "--config", p(&cfg), "--out", p(&out)]), 2);
    let missing = dir.path().join("nope.cfg");
    assert_eq!(edqueue(&["simulate", "--config", p(&missing), "--out", p(&out)]), 3);
}

#[test]
fn analyze_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("an");
    let missing = dir.path().join("missing.csv");
    assert_eq!(edqueue(&["analyze", "--records", p(&missing), "--out", p(&out)]), 3);

    let junk = write(
        dir.path(),
        "junk.csv",
        "id,submitted,accepted\nx,yesterday,today\ny,2001-13-01,2001-01-01\n",
    );
    assert_eq!(edqueue(&["analyze", "--records", p(&junk), "--out", p(&out)]), 4);
    assert_eq!(kv(&out.join("report.txt")).get("excluded.malformed_date"), Some("2"));

    let wrong = write(dir.path(), "wrong.csv", "a,b,c\n1,2,3\n");
    assert_eq!(edqueue(&["analyze", "--records", p(&wrong), "--out", p(&out)]), 2);
}

#[test]
fn analyze_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let recs = write(
        dir.path(),
        "r.csv",
        "id,submitted,accepted\n1,2000-01-01,2000-01-11\n2,2000-01-01,2000-01-31\n3,2000-01-05,2000-01-01\n",
    );
    let out = dir.path().join("an");
    assert_eq!(edqueue(&["analyze", "--records", p(&recs), "--out", p(&out)]), 0);
    let r = kv(&out.join("report.txt"));
    assert_eq!(r.get("admitted"), Some("2"));
    assert_eq!(r.get("excluded.negative_interval"), Some("1"));
    assert_eq!(r.get("max_tw"), Some("30"));
    assert_eq!(r.get("mean_tw"), Some("20"));
    let excl = fs::read_to_string(out.join("exclusions.csv")).unwrap();
    assert!(excl.contains("4,3,negative_interval"), "{excl}");
}

/// Histogram CSV with densities taken exactly from the cutoff power law.
fn exact_histogram_csv(dir: &Path) -> PathBuf {
    let (a, t0) = (0.05, 200.0);
    let mut text = String::from("bin_left,bin_right,count,density\n");
    for i in 0..100 {
        let (l, r) = (10.0 * i as f64, 10.0 * (i + 1) as f64);
        let t = 0.5 * (l + r);
        let d: f64 = a / t * (-t / t0).exp();
        text.push_str(&format!("{l},{r},{},{d:e}\n", (d * 1e5).round() as u64));
    }
    write(dir, "hist.csv", &text)
}

#[test]
fn fit_exact_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let input = exact_histogram_csv(dir.path());
    let out = dir.path().join("fit");
    let code = edqueue(&[
        "fit", "--input", p(&input), "--model", "plcutoff", "--alpha", "1", "--out", p(&out),
    ]);
    assert_eq!(code, 0);
    let r = kv(&out.join("fit_plcutoff_alpha1.txt"));
    let t0: f64 = r.get("t0").unwrap().parse().unwrap();
    assert!((t0 - 200.0).abs() < 1e-6, "{t0}");
    assert_eq!(r.get("converged"), Some("true"));
    assert!(out.join("curve_plcutoff_alpha1.csv").is_file());
}

#[test]
fn fit_argument_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = exact_histogram_csv(dir.path());
    let out = dir.path().join("fit");
    let base = ["fit", "--input", p(&input), "--out", p(&out)];
    let with = |extra: &[&str]| edqueue(&[&base[..], extra].concat());
    assert_eq!(with(&["--model", "plcutoff", "--alpha", "2"]), 2);
    assert_eq!(with(&["--model", "plcutoff"]), 2);
    assert_eq!(with(&["--model", "weibull"]), 2);
    assert_eq!(with(&[]), 2);
    assert_eq!(with(&["--model", "lognormal"]), 0);
    let missing = dir.path().join("none.txt");
    assert_eq!(
        edqueue(&["fit", "--input", p(&missing), "--model", "lognormal", "--out", p(&out)]),
        3
    );
}

#[test]
fn fit_all_writes_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let input = exact_histogram_csv(dir.path());
    let out = dir.path().join("fit");
    assert_eq!(
        edqueue(&["fit", "--input", p(&input), "--all", "--alpha", "1.5", "--out", p(&out)]),
        0
    );
    let c = kv(&out.join("comparison.txt"));
    assert_eq!(c.get("first.model"), Some("lognormal"));
    assert_eq!(c.get("second.model"), Some("plcutoff"));
    assert!(c.get("relative_sse_difference").is_some());
    assert!(out.join("fit_plcutoff_alpha1.5.txt").is_file());
}
