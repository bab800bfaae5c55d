use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cirdetect"))
        .args(args)
        .output()
        .expect("spawn cirdetect")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn simulate_to(file: &Path, horizon: &str, extra: &[&str]) {
    let mut args = vec![
        "simulate", "--a", "2", "--b", "1", "--sigma", "0.5", "--t-end", horizon, "--seed", "7",
        "--out",
    ];
    let f = file.to_str().unwrap();
    args.push(f);
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    simulate_to(&p1, "200", &[]);
    simulate_to(&p2, "200", &[]);
    let text = fs::read_to_string(&p1).unwrap();
    assert_eq!(text, fs::read_to_string(&p2).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x"));
    assert_eq!(lines.count(), 20_001);
}

#[test]
fn estimate_prints_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    simulate_to(&p, "200", &[]);
    let v = stdout_json(&run(&["estimate", "--path", p.to_str().unwrap()]));
    for key in ["a_hat", "b_hat", "sigma_sq_hat", "det_q"] {
        assert!(v[key].is_f64(), "{key} missing in {v}");
    }
    assert!((v["sigma_sq_hat"].as_f64().unwrap() - 0.25).abs() < 0.02);
    assert!(v["det_q"].as_f64().unwrap() > 0.0);
}

#[test]
fn test_detects_change_and_emits_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    let traj = dir.path().join("traj.csv");
    simulate_to(&p, "1000", &["--a-post", "1"]);
    let v = stdout_json(&run(&[
        "test",
        "--path",
        p.to_str().unwrap(),
        "--param",
        "both",
        "--side",
        "two",
        "--alpha",
        "0.05",
        "--emit-trajectory",
        traj.to_str().unwrap(),
    ]));
    let decisions = v.as_array().unwrap();
    assert_eq!(decisions.len(), 2);
    assert_eq!(decisions[0]["alpha"].as_f64(), Some(0.025));
    assert_eq!(decisions[0]["reject"].as_bool(), Some(true));

    let text = fs::read_to_string(&traj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,score_a,score_b"));
    assert_eq!(lines.next(), Some("0,0,0"));
    assert_eq!(lines.count(), 100_000);
}

#[test]
fn changepoint_reports_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.csv");
    simulate_to(&p, "1000", &["--a-post", "1"]);
    let v = stdout_json(&run(&[
        "changepoint",
        "--path",
        p.to_str().unwrap(),
        "--param",
        "a",
        "--direction",
        "down",
    ]));
    let tau = v["tau_hat"].as_f64().unwrap();
    assert!((tau - 500.0).abs() < 100.0, "tau_hat = {tau}");
}

#[test]
fn experiment_from_toml_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "kind = \"size\"\nreplications = 8\nhorizon = 20.0\nmaster_seed = 3\n\n[params]\na = 1.0\nb = 1.0\nsigma = 0.5\n",
    )
    .unwrap();
    let (o1, o2) = (dir.path().join("r1.json"), dir.path().join("r2.json"));
    let c = cfg.to_str().unwrap();
    assert!(run(&["experiment", "--config", c, "--out", o1.to_str().unwrap()]).status.success());
    assert!(run(&["experiment", "--config", c, "--sequential", "--out", o2.to_str().unwrap()])
        .status
        .success());
    assert_eq!(fs::read(&o1).unwrap(), fs::read(&o2).unwrap());

    let seeded = stdout_json(&run(&["experiment", "--config", c, "--seed", "11"]));
    assert_eq!(seeded["seed"].as_u64(), Some(11));
}

#[test]
fn user_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "t,x\n0,1\n0.1,-0.5\n0.2,1\n").unwrap();
    let out = run(&["estimate", "--path", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["estimate", "--path", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["test", "--side", "sideways", "--path", "x"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        run(&["simulate", "--a", "-1", "--b", "1", "--sigma", "1", "--t-end", "1"]).status.code(),
        Some(1)
    );

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "kind = \"size\"\nreplications = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(run(&["experiment", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
