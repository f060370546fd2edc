use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairtime"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn pairtime")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn error_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr line");
    serde_json::from_str(line).expect("json error on stderr")
}

#[test]
fn simulate_is_reproducible_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("set1.toml");
    let cfg = cfg.to_str().unwrap();
    let mut bodies = Vec::new();
    for out in ["a", "b"] {
        let o = run(dir.path(), &["--config", cfg, "--out", out, "--set", "sampler.n=5000", "--seed", "7", "simulate"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        bodies.push(std::fs::read_to_string(dir.path().join(out).join("events.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    assert!(bodies[0].contains("# count=5000"));
    assert!(bodies[0].contains("# seed=7"));
}

#[test]
fn optimize_prints_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--config", config("fig4.toml").to_str().unwrap(), "optimize"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("15.2 ps"), "{s}");
    assert!(s.contains("132 GHz"), "{s}");
    assert!(dir.path().join("out/optimum.json").exists());
}

#[test]
fn fit_and_herald_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("set1.toml");
    let cfg = cfg.to_str().unwrap();
    let common = ["--config", cfg, "--set", "sampler.n=20000", "--set", "herald.width_points=7"];
    let sim = run(dir.path(), &[&common[..], &["simulate"]].concat());
    assert!(sim.status.success());

    let fit = run(dir.path(), &[&common[..], &["--format", "json", "fit", "out/events.csv"]].concat());
    assert_eq!(fit.status.code(), Some(0), "{}", String::from_utf8_lossy(&fit.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/fit_report.json")).unwrap()).unwrap();
    let rho = report["rho_t"]["value"].as_f64().unwrap();
    let se = report["rho_t"]["std_error"].as_f64().unwrap();
    assert!((rho - 0.9551).abs() < 0.05 && se > 0.0, "{rho} ± {se}");

    let h = run(dir.path(), &[&common[..], &["--svg", "herald", "out/events.csv"]].concat());
    assert_eq!(h.status.code(), Some(0), "{}", String::from_utf8_lossy(&h.stderr));
    let table = std::fs::read_to_string(dir.path().join("out/narrowing.csv")).unwrap();
    assert!(table.starts_with("dt,ratio,std_error,model_ratio,asymptote"));
    assert!(dir.path().join("out/narrowing.svg").exists());
    assert!(dir.path().join("out/centroid.csv").exists());
}

#[test]
fn reproduce_table1_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["reproduce", "table1"]);
    let s = stdout(&o);
    for line in s.lines().filter(|l| l.contains("_pull")) {
        assert!(line.starts_with("PASS"), "{line}");
    }
    let failed = s.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(o.status.code(), Some(if failed { 1 } else { 0 }), "{s}");
    let summary = std::fs::read_to_string(dir.path().join("out/table1/summary.txt")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.contains("ratio")).count(), 3);
}

#[test]
fn bad_override_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--set", "sampler.n=abc", "simulate"]);
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"]["kind"], "config");
    assert!(e["error"]["messages"][0].as_str().unwrap().contains("sampler.n"));

    let o = run(dir.path(), &["--set", "sampler.nope=1", "simulate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_events_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["fit", "missing.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_json(&o)["error"]["kind"], "io");
}

#[test]
fn help_lists_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["--help"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for key in ["source.sigma", "link.beta", "sampler.seed", "fit.loss", "herald.direction"] {
        assert!(s.contains(key), "{key} missing from help");
    }
}
