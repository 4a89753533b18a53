use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn couette(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_couette"));
    c.args(args);
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("spawn couette")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"
[[scenario]]
name = "small"
alpha = [1.0]
nu = [NU]
nu_decades = [1e-2, 1e-3]
seed = 4
criteria = [4, 9]

[scenario.data]
kind = "separated"
delta0 = 0.5

[scenario.times]
t_start_ed = 0.5
t_stop_ed = 2.0
count = 8
spacing = "geometric"

[[scenario.weights]]
family = "eta_p"
p = 1.0
"#;

fn write_small(dir: &Path, nu: &str) -> std::path::PathBuf {
    let p = dir.join(format!("small-{nu}.toml"));
    fs::write(&p, SMALL.replace("NU", nu)).unwrap();
    p
}

#[test]
fn empty_scenario_list_succeeds_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.toml");
    fs::write(&cfg, "scenario = []\n").unwrap();
    let out = tmp.path().join("reports");
    let o = couette(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn malformed_config_fails_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[[scenario]]\nname = \"x\"\nalpha = [1.0,\n").unwrap();
    let o = couette(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, SMALL.replace("NU", "1e-2").replace("seed = 4", "seed = 4\nreynolds = 5")).unwrap();
    let o = couette(&["run", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("reynolds"), "{}", stderr(&o));
}

#[test]
fn run_writes_deterministic_reports_and_compare_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_small(tmp.path(), "1e-2");
    let mut dirs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("r{k}"));
        let o = couette(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("COUETTE_WORKERS", "2")]);
        assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("PASS [ 4] orr-damping"));
        dirs.push(out.join("small"));
    }
    for f in ["manifest.json", "criteria.csv", "constants.csv", "norms.csv"] {
        let a = fs::read(dirs[0].join(f)).unwrap();
        let b = fs::read(dirs[1].join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
    let criteria = fs::read_to_string(dirs[0].join("criteria.csv")).unwrap();
    assert_eq!(criteria.lines().count(), 3);
    let norms = fs::read_to_string(dirs[0].join("norms.csv")).unwrap();
    assert!(norms.lines().next().unwrap().ends_with("corrector_eta_p_1"));
    assert_eq!(norms.lines().count(), 9);

    let o = couette(&["compare", dirs[0].to_str().unwrap(), dirs[1].to_str().unwrap()], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("no differences"));
}

#[test]
fn compare_across_a_decade_reports_decay_rates() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for nu in ["1e-2", "1e-3"] {
        let cfg = write_small(tmp.path(), nu);
        fs::write(&cfg, fs::read_to_string(&cfg).unwrap().replace("criteria = [4, 9]", "criteria = []")).unwrap();
        let out = tmp.path().join(nu);
        let o = couette(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
        assert!(o.status.success(), "{}", stderr(&o));
        dirs.push(out.join("small"));
    }
    let diff = tmp.path().join("diff.csv");
    let o = couette(&["compare", dirs[0].to_str().unwrap(), dirs[1].to_str().unwrap(), "--out", diff.to_str().unwrap()], &[]);
    let text = stdout(&o);
    assert!(text.contains("norms decay_rate alpha=1"), "{text}");
    let csv = fs::read_to_string(&diff).unwrap();
    assert!(csv.starts_with("source,metric,alpha,nu_a,nu_b,value_a,value_b,ratio,flagged"));
}

#[test]
fn compare_rejects_mismatched_scenarios() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dirs = Vec::new();
    for (k, data) in ["separated:0.5", "l2-boundary"].iter().enumerate() {
        let cfg = write_small(tmp.path(), "1e-2");
        fs::write(&cfg, fs::read_to_string(&cfg).unwrap().replace("criteria = [4, 9]", "criteria = []")).unwrap();
        let out = tmp.path().join(format!("m{k}"));
        let o = couette(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--data", data], &[]);
        assert!(o.status.success(), "{}", stderr(&o));
        dirs.push(out.join("small"));
    }
    let o = couette(&["compare", dirs[0].to_str().unwrap(), dirs[1].to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mismatched"), "{}", stderr(&o));
}

#[test]
fn evans_scan_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("scan");
    let o = couette(&["evans-scan", "--alpha", "1", "--nu", "1e-2", "--n-r", "9", "--n-i", "3", "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("winding 0"));
    let csv = fs::read_to_string(out.join("scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 27);
    assert!(out.join("scan.json").exists());
}

#[test]
fn verify_bounds_prints_one_line_per_criterion() {
    let o = couette(&["verify-bounds", "--criteria", "4,9"], &[]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 2);
}

#[test]
fn bad_flags_and_environment_are_errors() {
    let o = couette(&["verify-bounds", "--criteria", "4", "--data", "wavy"], &[]);
    assert!(!o.status.success());
    let o = couette(&["verify-bounds", "--criteria", "4"], &[("COUETTE_WORKERS", "lots")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("COUETTE_WORKERS"));
    let o = couette(&["run", "--bundled", "nope"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
