use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sphere_lp::bounds;
use sphere_lp::potentials::Potential;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-lp"))
        .args(args)
        .env_remove("SPHERE_LP_LOG")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("sphere-lp-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn ulb_example() {
    let v = json(&["ulb", "--n", "3", "--capacity", "31.9565", "--potential", "riesz:1"]);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "ulb");
    assert_eq!(v["m"], 9);
    assert!((f(&v, "value") - 0.804786).abs() < 1e-6);
    // thin adapter: the printed value is the library value at 12 digits
    let lib = bounds::ulb(3, 31.9565, &Potential::riesz(1.0).unwrap()).unwrap();
    assert_eq!(f(&v, "value"), round12(lib.value));
}

#[test]
fn uub_from_config() {
    let v = json(&["uub", "--n", "3", "--config", "pentakis", "--potential", "riesz:1"]);
    assert!((f(&v, "value") - 0.823_405_4).abs() < 1e-6);
    assert!((f(&v, "lambda_star") - 7.47994).abs() < 1e-5);
    assert!((f(&v, "capacity") - 735.0 / 23.0).abs() < 1e-9);
    assert_eq!(v["config"], "pentakis");
    assert!(v["feasible"].as_bool().unwrap());
}

#[test]
fn capacity_precondition() {
    let out = run(&["ulb", "--n", "3", "--capacity", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity must exceed 2"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["ulb", "--capacity", "3"][..],
        &["ulb", "--n", "3", "--capacity", "10", "--config", "pentakis"],
        &["ulb", "--n", "3", "--capacity", "10", "--m-override", "3"],
        &["ulb", "--n", "3", "--capacity", "10", "--potential", "riesz:-1"],
        &["energy", "--config", "nonesuch"],
        &["reproduce", "--table", "5"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn log_level_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_sphere-lp"))
        .args(["ulb", "--n", "3", "--capacity", "10"])
        .env("SPHERE_LP_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_sphere-lp"))
        .args(["ulb", "--n", "3", "--capacity", "10"])
        .env("SPHERE_LP_LOG", "debug")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("INFO"));
}

#[test]
fn infeasible_bound_exits_two() {
    let args = [
        "uub",
        "--n",
        "3",
        "--capacity",
        "10",
        "--s",
        "0.95",
        "--m-override",
        "3",
        "--potential",
        "fejes-toth",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], false);
    let failed =
        v["diagnostics"].as_array().unwrap().iter().any(|c| c["gating"] == true && c["passed"] == false);
    assert!(failed);
}

#[test]
fn energy_and_design_check() {
    let v = json(&["energy", "--config", "pentakis", "--potential", "riesz:1"]);
    assert!((f(&v, "energy") - 0.805_031_8).abs() < 1e-6);
    assert_eq!(v["size"], 32);
    let v = json(&["design-check", "--config", "cube-cross:5"]);
    assert_eq!(v["strength"], 5);
    assert!(f(&v, "next_moment") > 1e-3);
    let v = json(&["design-check", "--config", "pentakis"]);
    assert_eq!(v["strength"], 9);
}

#[test]
fn code_files() {
    let good = temp_file(
        "square.json",
        r#"{"n": 2, "points": [[1,0],[0,1],[-1,0],[0,-1]], "weights": [0.25,0.25,0.25,0.25]}"#,
    );
    let v = json(&["energy", "--weights-file", good.to_str().unwrap(), "--potential", "riesz:1"]);
    let h = |t: f64| 1.0 / (2.0 * (1.0 - t)).sqrt();
    let expect = 4.0 / 16.0 * (2.0 * h(0.0) + h(-1.0));
    assert!((f(&v, "energy") - expect).abs() < 1e-12);
    let v = json(&["energy", "--config", good.to_str().unwrap(), "--potential", "riesz:1"]);
    assert!((f(&v, "energy") - expect).abs() < 1e-12);
    let v = json(&["design-check", "--weights-file", good.to_str().unwrap()]);
    assert_eq!(v["strength"], 3);
    let v = json(&["uub", "--weights-file", good.to_str().unwrap(), "--potential", "riesz:1"]);
    assert_eq!(f(&v, "s"), 0.0);

    let weights = temp_file("weights.json", "[0.25, 0.25, 0.25, 0.25]");
    let v = json(&["ulb", "--n", "3", "--weights-file", weights.to_str().unwrap(), "--potential", "riesz:1"]);
    assert_eq!(f(&v, "capacity"), 4.0);
    assert_eq!(v["weights"]["count"], 4);

    for (name, body) in [
        ("norm.json", r#"{"n": 2, "points": [[1,0],[0,2]], "weights": [0.5,0.5]}"#),
        ("sum.json", r#"{"n": 2, "points": [[1,0],[0,1]], "weights": [0.5,0.4]}"#),
        ("syntax.json", r#"{"n": 2, "points": "#),
    ] {
        let bad = temp_file(name, body);
        let out = run(&["energy", "--weights-file", bad.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{name}");
        std::fs::remove_file(bad).ok();
    }
    std::fs::remove_file(good).ok();
    std::fs::remove_file(weights).ok();
}

#[test]
fn test_functions_command() {
    let v = json(&["test-functions", "--n", "3", "--capacity", "31.9565", "--jmax", "27"]);
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 27);
    for q in &values[..9] {
        assert!(q["value"].as_f64().unwrap().abs() < 1e-9);
        assert_eq!(q["sign"], "zero");
    }
    assert_eq!(
        run(&["test-functions", "--n", "3", "--capacity", "31.9565", "--jmax", "0"]).status.code(),
        Some(1)
    );

    let mut state = 0x2545_f491_4f6c_dd1du64;
    for i in 0..20 {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let n = 3 + i % 3;
        let capacity = 3.0 + (state % 10_000) as f64 / 100.0;
        let cap = format!("{capacity}");
        let v = json(&["test-functions", "--n", &n.to_string(), "--capacity", &cap, "--jmax", "30"]);
        let m = v["m"].as_u64().unwrap() as usize;
        let values = v["values"].as_array().unwrap();
        for q in &values[m..m + 2] {
            assert!(q["value"].as_f64().unwrap() >= -1e-9, "n={n} N={cap}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["uub", "--config", "cube-cross:4", "--potential", "newton", "--m-override", "5"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_rule_columns() {
    let out = run(&[
        "ulb",
        "--n",
        "3",
        "--capacity",
        "31.9565217391304",
        "--potential",
        "riesz:1",
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,alpha_i,rho_i"));
    assert!(lines.next().unwrap().starts_with("0,-0.941"));
    assert!(text.contains("quantity,value"));
}

#[test]
fn reproduce_tables() {
    let out = run(&["reproduce", "--table", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["cells"], 22);

    // the printed rule is truncated in four cells
    let out = run(&["reproduce", "--table", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["cells"], 10);
    assert_eq!(v["summary"]["mismatched"], 0);
    assert_eq!(v["summary"]["match_truncated"], 4);
    assert_eq!(run(&["reproduce", "--table", "2", "--accept-truncated"]).status.code(), Some(0));

    for table in ["3", "4", "examples"] {
        let out = run(&["reproduce", "--table", table, "--accept-truncated"]);
        assert_eq!(out.status.code(), Some(0), "table {table}");
    }

    let v: Value = serde_json::from_slice(&run(&["reproduce", "--table", "4"]).stdout).unwrap();
    let flagged: Vec<&str> = v["cells"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["cell"].as_str().unwrap().ends_with("N_1") && !c["note"].is_null())
        .map(|c| c["cell"].as_str().unwrap())
        .collect();
    assert!(flagged.contains(&"n=3 N_1"));
    assert!(!flagged.contains(&"n=4 N_1"));
}
