use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn snell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snell"))
        .args(args)
        .env_remove("SNELL_BUDGET")
        .output()
        .expect("spawn snell")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write_random_model(dir: &Path, seed: u64) -> PathBuf {
    let path = dir.join(format!("random{seed}.json"));
    let seed = seed.to_string();
    let out = snell(&[
        "gen", "--model", "random", "--seed", &seed, "--max-depth", "2", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn price_one_period_example() {
    let out = snell(&["price", &fixture("one_period.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["root_value"].as_f64(), Some(3.0));
    assert_eq!(v["tau_down_region"], serde_json::json!([1, 2]));
    assert_eq!(v["tool"], "snell-core");
    assert_eq!(v["model_hash"].as_str().map(str::len), Some(64));
}

#[test]
fn price_exact_reports_a_fraction() {
    let out = snell(&["price", "--exact", &fixture("one_period.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["root_value_fraction"], "3");
}

#[test]
fn price_single_member_gives_classical_value() {
    let out = snell(&["price", &fixture("one_period.json"), "--measure", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["root_value"].as_f64(), Some(7.0));
}

#[test]
fn verify_random_instance_passes() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_random_model(dir.path(), 5);
    let out = snell(&["verify", model.to_str().unwrap(), "--draws", "20", "--chains", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 8);
}

#[test]
fn verify_flags_an_unstable_family() {
    let out = snell(&["verify", &fixture("unstable_seed11.json")]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn gen_rejects_zero_steps() {
    let out = snell(&["gen", "--steps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(snell(&["bogus"]).status.code(), Some(2));
}

#[test]
fn schema_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"horizon": 1, "nodes": [
            {"id": 0, "parent": null, "r_prob": null, "payoff": 1},
            {"id": 1, "parent": 0, "r_prob": 0.5, "payoff": 1},
            {"id": 2, "parent": 0, "r_prob": 0.5, "payoff": 1}], "kernel_sets": {}}"#,
    )
    .unwrap();
    let out = snell(&["price", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kernel_sets.0"));
}

#[test]
fn negative_payoff_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("neg.json");
    let text = std::fs::read_to_string(fixture("one_period.json")).unwrap();
    std::fs::write(&path, text.replace("\"payoff\": 2", "\"payoff\": -2")).unwrap();
    assert_eq!(snell(&["price", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn missing_file_is_io_error() {
    assert_eq!(snell(&["price", "/nonexistent/model.json"]).status.code(), Some(5));
}

#[test]
fn budget_env_var_caps_enumeration() {
    let out = Command::new(env!("CARGO_BIN_EXE_snell"))
        .args(["enumerate", &fixture("one_period.json")])
        .env("SNELL_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn enumerate_lists_the_two_by_two_table() {
    let out = snell(&["enumerate", &fixture("one_period.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# snell-core 0.1.0"));
    assert_eq!(lines.next(), Some("tau_id,measure_id,value"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows, ["0,0,2.0", "0,1,2.0", "1,0,3.0", "1,1,7.0"]);
}

#[test]
fn paste_at_root_takes_the_second_member() {
    let out = snell(&["paste", &fixture("one_period.json"), "--q1", "0", "--q2", "1", "--sigma", "root"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["is_member"], true);
    assert_eq!(v["kernels"]["0"], serde_json::json!([0.7, 0.3]));
}

#[test]
fn paste_at_leaves_takes_the_first_member() {
    let out = snell(&["paste", &fixture("one_period.json"), "--q1", "0", "--q2", "1", "--sigma", "leaves"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["kernels"]["0"], serde_json::json!([0.3, 0.7]));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_random_model(dir.path(), 9);
    let b = dir.path().join("again.json");
    snell(&["gen", "--model", "random", "--seed", "9", "--max-depth", "2", "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    for args in [
        vec!["price", a.to_str().unwrap()],
        vec!["verify", a.to_str().unwrap(), "--draws", "5", "--chains", "5", "--seed", "3"],
        vec!["enumerate", a.to_str().unwrap()],
        vec!["refine", "--k", "2"],
    ] {
        let first = snell(&args);
        let second = snell(&args);
        assert_eq!(first.status.code(), Some(0), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn refine_reports_each_step_count() {
    let out = snell(&["refine", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "steps,root_value,diff");
    let steps: Vec<&str> = rows[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(steps, ["2", "4", "8"]);
}

#[test]
fn binomial_model_round_trips_through_gen_and_price() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.json");
    let out = snell(&["gen", "--steps", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let priced = json(&snell(&["price", path.to_str().unwrap()]));
    let exact = json(&snell(&["price", "--exact", path.to_str().unwrap()]));
    let f = priced["root_value"].as_f64().unwrap();
    let e = exact["root_value"].as_f64().unwrap();
    assert!((f - e).abs() < 1e-9);
}
