use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burgers-lab")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn algebra_table_text_and_json() {
    let out = run(&["algebra", "table"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("P^t") && text.contains("G^y"));
    let out = run(&["algebra", "table", "--json"]);
    let v = json(&out);
    assert_eq!(v["schema"], "1");
    assert_eq!(v["table"].as_array().unwrap().len(), 8);
    // [P^t, D] = 2P^t
    assert_eq!(v["table"][0][1], "2P^t");
}

#[test]
fn subalgebra_lists() {
    for dim in ["1", "2"] {
        let v = json(&run(&["algebra", "subalgebras", "--dim", dim]));
        assert!(!v["subalgebras"].as_array().unwrap().is_empty());
    }
    assert_eq!(code(&run(&["algebra", "subalgebras", "--dim", "3"])), 2);
}

#[test]
fn family_list_and_eval() {
    let v = json(&run(&["family", "list"]));
    assert_eq!(v["families"].as_array().unwrap().len(), 13);
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("hc.csv");
    let out = run(&[
        "family",
        "eval",
        "--id",
        "hopf_cole_2d",
        "--grid",
        "0.5:1:2,-1:1:3,-1:1:3",
        "--out",
        csv.to_str().unwrap(),
        "--residuals",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["rows"], 18);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 19);
    assert!(text.starts_with("t,x,y,u,v"));
}

#[test]
fn verify_exit_codes() {
    let out = run(&["verify", "--family", "affine_general"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["pass"], true);
    assert_eq!(code(&run(&["verify", "--family", "hopf_cole_2d", "--tol", "1e-30"])), 1);
    let bad = run(&["verify", "--family", "no_such_family"]);
    assert_eq!(code(&bad), 2);
    let err: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["kind"], "config");
    assert_eq!(code(&run(&["verify", "--family", "darboux", "--system", "euler"])), 2);
    assert_eq!(code(&run(&["verify", "--family", "darboux", "--params", "{not json"])), 2);
}

#[test]
fn verify_systems() {
    let v = json(&run(&["verify", "--family", "ns_common", "--system", "ns"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["equations"].as_array().unwrap().len(), 3);
    let v = json(&run(&["verify", "--family", "hj_family", "--system", "both"]));
    assert_eq!(v["pass"], true);
    let names: Vec<&str> = v["equations"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"I1") && names.contains(&"R1"));
    assert_eq!(code(&run(&["verify", "--family", "hopf_cole_2d", "--system", "inviscid"])), 1);
}

#[test]
fn reduce_check_verdicts() {
    let ok = run(&["reduce", "check", "--ansatz", "1.1", "--solution", r#"{"kind":"constant","value":[1,2]}"#]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["consistent"], true);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sol.json");
    std::fs::write(&path, r#"{"kind":"pullback","family":"shift_invariant"}"#).unwrap();
    let arg = format!("@{}", path.display());
    assert_eq!(code(&run(&["reduce", "check", "--ansatz", "g1.8", "--solution", &arg])), 0);
    assert_eq!(code(&run(&["reduce", "check", "--ansatz", "9.9", "--solution", "{}"])), 2);
}

#[test]
fn catalog_verify_all_default_and_injected_tolerance() {
    let out = run(&["catalog-verify-all"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["families"].as_array().unwrap().len(), 13);
    for f in v["families"].as_array().unwrap() {
        assert_eq!(f["sets"].as_array().unwrap().len(), 3, "{}", f["family"]);
    }
    let strict = run(&["catalog-verify-all", "--tol", "1e-16"]);
    assert_eq!(code(&strict), 1);
    assert!(!json(&strict)["failed"].as_array().unwrap().is_empty());
    let subset = json(&run(&["catalog-verify-all", "--family", "affine_general"]));
    assert_eq!(subset["families"].as_array().unwrap().len(), 1);
    assert_eq!(subset["pass"], true);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["group", "sweep", "--elements", "3", "--family", "darboux", "--family", "hj_family"]);
    let b = run(&["group", "sweep", "--elements", "3", "--family", "darboux", "--family", "hj_family"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["catalog-verify-all", "--family", "heun", "--family", "weierstrass"]);
    let d = Command::new(env!("CARGO_BIN_EXE_burgers-lab"))
        .args(["catalog-verify-all", "--family", "heun", "--family", "weierstrass"])
        .env("BURGERS_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn group_sweep_identity_and_masking() {
    let v = json(&run(&["group", "sweep", "--identity-only"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["elements"].as_array().unwrap().len(), 1);
    // the denominator 1 - 2t vanishes on the first time slice of the family grid
    let element = r#"{"sl2":[1,0,-2,1]}"#;
    let out = run(&["group", "sweep", "--identity-only", "--family", "hopf_cole_2d", "--element", element]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["masked_points"].as_u64().unwrap() > 0, "{v}");
}

#[test]
fn group_apply_exports_transformed_field() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let out = run(&[
        "group",
        "apply",
        "--family",
        "darboux",
        "--element",
        r#"{"sl2":[1,0.3,0,1],"angle":0.4,"reflect":true,"boost":[0.2,-0.1],"shift":[0.1,0.0]}"#,
        "--grid",
        "0.6:1:2,-0.5:0.5:3,-0.5:0.5:3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["check"]["pass"], true);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 19);
    let singular = run(&["group", "apply", "--family", "darboux", "--element", r#"{"sl2":[1,0,0,0]}"#]);
    assert_eq!(code(&singular), 2);
}

#[test]
fn evolve_reports_exactness_and_rejects_unstable_step() {
    let out = run(&["evolve", "--family", "affine_general", "--nodes", "5", "--levels", "2", "--dt-fraction", "0.02"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["order"], "exact");
    let unstable = run(&["evolve", "--family", "affine_general", "--nodes", "5", "--dt-fraction", "2.0"]);
    assert_eq!(code(&unstable), 2);
    assert_eq!(code(&run(&["evolve", "--family", "affine_general", "--box", "0:1,0:1"])), 2);
}

#[test]
fn evolve_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("snap.csv");
    let out = run(&[
        "evolve",
        "--family",
        "hj_family",
        "--box",
        "-1:1,-1:1,0.5:0.52",
        "--nodes",
        "5",
        "--levels",
        "2",
        "--dt-fraction",
        "0.02",
        "--snapshot",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // finest level has 9 x 9 nodes
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 82);
}

#[test]
fn run_config_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let report = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "schema": "1",
            "command": "catalog_verify_all",
            "families": ["affine_general", "darboux"],
            "output": report,
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved, json(&out));

    std::fs::write(&cfg, r#"{"schema":"1","command":"verify","families":["darboux"],"colour":"red"}"#).unwrap();
    assert_eq!(code(&run(&["run", "--config", cfg.to_str().unwrap()])), 2);
    std::fs::write(&cfg, r#"{"schema":"2","command":"verify","families":["darboux"]}"#).unwrap();
    assert_eq!(code(&run(&["run", "--config", cfg.to_str().unwrap()])), 2);
    std::fs::write(&cfg, r#"{"schema":"1","command":"verify","families":["darboux"],"tolerance":1e-30}"#).unwrap();
    assert_eq!(code(&run(&["run", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_burgers-lab"))
        .args(["family", "list"])
        .env("BURGERS_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
