use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hermite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermite"))
        .args(args)
        .env_remove("HERMITE_SEED")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn simulate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let file = dir.join(name).display().to_string();
    let mut args = vec!["simulate", "--out", &file];
    args.extend_from_slice(extra);
    let out = hermite(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    file
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn simulate_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["--process", "hermite", "--hurst", "0.7", "--rank", "2", "--steps", "32", "--paths", "3", "--seed", "9"];
    let a = simulate(dir.path(), "a.csv", &args);
    let b = simulate(dir.path(), "b.csv", &args);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let header = fs::read_to_string(&a).unwrap();
    assert!(header.starts_with("t,p0,p1,p2\n"));
    let meta: Value = serde_json::from_str(&fs::read_to_string(format!("{a}.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["seed"], 9);
}

#[test]
fn replay_regenerates_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let a = simulate(dir.path(), "a.csv", &["--process", "hou", "--hurst", "0.8", "--steps", "40", "--paths", "2"]);
    let again = dir.path().join("again.csv").display().to_string();
    let out = hermite(&["replay", "--meta", &format!("{a}.json"), "--out", &again]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn environment_seed_is_overridden_by_the_flag() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, env: Option<&str>, flag: Option<&str>| {
        let file = dir.path().join(name).display().to_string();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_hermite"));
        cmd.args(["simulate", "--process", "fbm", "--hurst", "0.7", "--steps", "16", "--out", &file]);
        cmd.env_remove("HERMITE_SEED");
        if let Some(s) = env {
            cmd.env("HERMITE_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        fs::read(file).unwrap()
    };
    let env5 = run("env5.csv", Some("5"), None);
    let flag5 = run("flag5.csv", None, Some("5"));
    let both = run("both.csv", Some("6"), Some("5"));
    let default = run("default.csv", None, None);
    assert_eq!(env5, flag5);
    assert_eq!(both, flag5);
    assert_ne!(default, flag5);
}

#[test]
fn out_of_range_hurst_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("x.csv").display().to_string();
    let out = hermite(&["simulate", "--process", "fbm", "--hurst", "0.4", "--steps", "16", "--out", &file]);
    assert_eq!(code(&out), 2);
    assert!(!Path::new(&file).exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(code(&hermite(&["frobnicate"])), 2);
    assert_eq!(code(&hermite(&["--help"])), 0);
}

#[test]
fn stats_flags_non_gaussian_rosenblatt() {
    let dir = TempDir::new().unwrap();
    let f = simulate(dir.path(), "r.csv", &["--process", "hermite", "--hurst", "0.7", "--rank", "2", "--steps", "64", "--paths", "3000"]);
    let out = hermite(&["stats", "--in", &f, "--check", "normality", "--rank", "1"]);
    let report = json(&out);
    assert_eq!(report["details"]["gaussian"], false);
    assert_eq!(code(&out), 1);
    let out = hermite(&["stats", "--in", &f, "--check", "normality"]);
    assert_eq!(json(&out)["rank"], 2);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn stats_on_fbm_passes() {
    let dir = TempDir::new().unwrap();
    let f = simulate(dir.path(), "f.csv", &["--process", "fbm", "--hurst", "0.7", "--steps", "1024", "--paths", "500"]);
    for check in ["cov", "hurst", "lrd", "selfsim"] {
        let out = hermite(&["stats", "--in", &f, "--check", check]);
        assert_eq!(code(&out), 0, "{check}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn constant_paths_fail_the_checks() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("flat.csv");
    let mut text = String::from("t,p0,p1\n");
    for k in 0..=64 {
        text += &format!("{},0,0\n", k as f64 / 64.0);
    }
    fs::write(&f, text).unwrap();
    let f = f.display().to_string();
    assert_eq!(code(&hermite(&["stats", "--in", &f, "--check", "hurst"])), 2);
    let out = hermite(&["stats", "--in", &f, "--check", "qv", "--hurst", "0.7"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("bad.csv");
    fs::write(&f, "t,p0\n0,0\n0.5,abc\n1,2\n").unwrap();
    let out = hermite(&["stats", "--in", &f.display().to_string(), "--check", "hurst", "--hurst", "0.7"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn arb_demo_exit_codes_follow_the_verdict() {
    let base = ["arb-demo", "--paths", "200", "--steps", "512"];
    for case in ["shiryaev", "diffusion", "mixed"] {
        for tax in ["0", "0.5"] {
            let mut args = base.to_vec();
            args.extend(["--case", case, "--tax", tax]);
            let out = hermite(&args);
            let report = json(&out);
            assert_eq!(report["pass"], true, "{case} {tax}: {report}");
            assert_eq!(code(&out), 0);
        }
    }
    assert_eq!(code(&hermite(&["arb-demo", "--case", "shiryaev", "--tax=-1"])), 2);
}

#[test]
fn arb_demo_reads_a_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("m.toml");
    fs::write(&cfg, "[diffusion]\nmu = 0.1\nm = 0.02\nsigma = 0.3\n").unwrap();
    let cfg = cfg.display().to_string();
    let out = hermite(&["arb-demo", "--case", "diffusion", "--paths", "50", "--steps", "256", "--config", &cfg]);
    assert_eq!(json(&out)["parameters"]["sigma"], 0.3);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[diffusion]\nvolatility = 1\n").unwrap();
    assert_eq!(code(&hermite(&["arb-demo", "--case", "diffusion", "--config", &bad.display().to_string()])), 2);
}

#[test]
fn price_matches_black_scholes() {
    let out = hermite(&["price", "--payoff", "call", "--strike", "100", "--rate", "0.05", "--sigma", "0.2"]);
    assert_eq!(code(&out), 0);
    let price = json(&out)["price"].as_f64().unwrap();
    assert!((price - 10.4506).abs() / 10.4506 < 1e-3, "{price}");
}

#[test]
fn price_grows_with_tax() {
    let price = |tax: &str| {
        json(&hermite(&["price", "--payoff", "put", "--tax", tax]))["price"]
            .as_f64()
            .unwrap()
    };
    let p: Vec<f64> = ["0", "0.2", "0.4"].into_iter().map(price).collect();
    assert!(p[0] < p[1] && p[1] < p[2], "{p:?}");
}

#[test]
fn price_writes_a_surface() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("s.csv").display().to_string();
    let out = hermite(&["price", "--payoff", "power", "--exponent", "1", "--grid", "101", "--time-steps", "20", "--out", &f]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&f).unwrap();
    assert!(text.starts_with("t,s,value\n"));
    assert_eq!(text.lines().count(), 1 + 21 * 101);
}

#[test]
fn ill_posed_pricing_exits_with_one() {
    let out = hermite(&["price", "--payoff", "call", "--rate=-0.5", "--tax", "1"]);
    assert_eq!(code(&out), 1);
}
