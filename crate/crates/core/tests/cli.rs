use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn syneval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syneval"))
        .args(args)
        .env_remove("SYNEVAL_SEED")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn base<'a>(real: &'a str, syn: &'a str, schema: &'a str) -> Vec<&'a str> {
    vec!["--real", real, "--synthetic", syn, "--schema", schema, "--deterministic"]
}

#[test]
fn evaluate_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.json");
    let (r, s, sc) = (fixture("real.csv"), fixture("synthetic.csv"), fixture("schema.json"));
    let mut args = vec!["evaluate"];
    args.extend(base(&r, &s, &sc));
    let out_s = out.display().to_string();
    args.extend(["--out", &out_s]);
    let o = syneval(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = report(&out);
    assert_eq!(v["schema_version"], "syneval_report_v1");
    assert!(v["fidelity"].is_object());
    assert!(v["text_fidelity"].is_array());
    assert_eq!(v["utility"]["runs"].as_array().unwrap().len(), 2);
    assert!(v["privacy"].is_null());
    assert_eq!(v["timestamps"]["started_at"], 0);
    let md = String::from_utf8(o.stdout).unwrap();
    assert!(md.contains("| Structure Preserving Score | 100.00% |"));
}

#[test]
fn privacy_without_members_is_a_config_error() {
    let (r, s) = (fixture("real.csv"), fixture("synthetic.csv"));
    let o = syneval(&["evaluate", "--real", &r, "--synthetic", &s, "--privacy"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[E_CONFIG]"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn missing_input_file_is_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.json").display().to_string();
    let (r, s) = (fixture("real.csv"), fixture("synthetic.csv"));
    let o = syneval(&[
        "evaluate",
        "--real",
        &r,
        "--synthetic",
        &s,
        "--members",
        &fixture("members.csv"),
        "--non-members",
        "/nonexistent/non_members.csv",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[E_INPUT]"));
    assert!(!Path::new(&out).exists());
    assert!(o.stdout.is_empty());
}

#[test]
fn fail_below_gate_exits_3_but_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.json");
    let out_s = out.display().to_string();
    let (r, s, sc) = (fixture("real.csv"), fixture("synthetic.csv"), fixture("schema.json"));
    let mut args = vec!["fidelity"];
    args.extend(base(&r, &s, &sc));
    args.extend(["--out", &out_s, "--fail-below", "fidelity.column_shapes=0.99"]);
    let o = syneval(&args);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("error[E_GATE]"));
    assert!(out.exists());

    let mut args = vec!["fidelity"];
    args.extend(base(&r, &s, &sc));
    args.extend(["--fail-below", "fidelity.column_shapes=0.5", "--fail-below", "fidelity.sps=1"]);
    assert_eq!(syneval(&args).status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("rep.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "real": fixture("real.csv"),
            "synthetic": fixture("synthetic.csv"),
            "schema": fixture("schema.json"),
            "seed": 5,
            "tolerance": 0.0,
            "deterministic": true,
            "out": "rep.json"
        })
        .to_string(),
    )
    .unwrap();
    let cfg_s = cfg.display().to_string();
    let o = syneval(&["utility", "--config", &cfg_s, "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = report(&out);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["utility"]["runs"][0]["tolerance"], 0.0);
    assert!(v["fidelity"].is_null());

    std::fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    let o = syneval(&["utility", "--config", &cfg_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("E_CONFIG"));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.json");
    let out_s = out.display().to_string();
    let (r, s, sc) = (fixture("real.csv"), fixture("synthetic.csv"), fixture("schema.json"));
    let mut args = vec!["fidelity"];
    args.extend(base(&r, &s, &sc));
    args.extend(["--out", &out_s]);
    let o = Command::new(env!("CARGO_BIN_EXE_syneval"))
        .args(&args)
        .env("SYNEVAL_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out)["seed"], 1234);
}

#[test]
fn privacy_subcommand_reports_success_rate() {
    let dir = tempfile::tempdir().unwrap();
    let md = dir.path().join("rep.md");
    let md_s = md.display().to_string();
    let o = syneval(&[
        "privacy",
        "--members",
        &fixture("members.csv"),
        "--non-members",
        &fixture("non_members.csv"),
        "--synthetic",
        &fixture("synthetic.csv"),
        "--n-trees",
        "25",
        "--drop-text",
        "--out-md",
        &md_s,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&md).unwrap();
    assert!(text.contains("| MIA Model | Successful Rate |"));
    assert!(!text.contains("## Fidelity"));
}

#[test]
fn schema_infer_prints_schema() {
    let o = syneval(&["schema-infer", &fixture("real.csv")]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let cols = v["columns"].as_array().unwrap();
    assert_eq!(cols[0]["name"], "rating");
    assert_eq!(cols[0]["kind"], "discrete");
    assert_eq!(cols[2]["kind"], "text");
}

#[test]
fn unknown_skip_axis_is_rejected() {
    let (r, s) = (fixture("real.csv"), fixture("synthetic.csv"));
    let o = syneval(&["evaluate", "--real", &r, "--synthetic", &s, "--skip", "vibes"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("E_CONFIG"));
}

#[test]
fn runs_without_a_schema() {
    let (r, s) = (fixture("real.csv"), fixture("synthetic.csv"));
    let o = syneval(&["evaluate", "--real", &r, "--synthetic", &s, "--skip", "utility"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("## Fidelity"));
}
