use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mcboost(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcboost"))
        .args(args)
        .current_dir(dir)
        .env_remove("MCBOOST_BUDGET")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&ok(out)).unwrap()
}

#[test]
fn counterexample_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&mcboost(&["gen-data", "--kind", "counterexample"], dir.path()));
    assert_eq!(
        text,
        "{\"alphabet\":[1,2,3]}\n{\"x\":\"a\",\"y\":1}\n{\"x\":\"b\",\"y\":2}\n{\"x\":\"c\",\"y\":3}\n"
    );
    let text = ok(&mcboost(
        &["gen-data", "--kind", "counterexample", "--multiplicity", "2,0,1"],
        dir.path(),
    ));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn boost_model_predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&mcboost(
        &[
            "gen-data",
            "--m",
            "60",
            "--labels",
            "3",
            "--universe",
            "12",
            "--class-size",
            "8",
            "--heldout",
            "40",
            "--out",
            "train.jsonl",
            "--class-out",
            "class.json",
            "--heldout-out",
            "held.jsonl",
            "--seed",
            "2",
        ],
        d,
    ));
    let out = mcboost(
        &[
            "boost",
            "--data",
            "train.jsonl",
            "--class",
            "class.json",
            "--weak-learner",
            "oracle",
            "--m0",
            "40",
            "--gamma",
            "0.3",
            "--rounds",
            "30",
            "--p",
            "3",
            "--model-out",
            "model.json",
        ],
        d,
    );
    let summary = json(&out);
    assert!(summary["r"].as_u64().unwrap() > 0);
    let model: Value = serde_json::from_str(&fs::read_to_string(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["schema"], "mcboost-model/1");
    assert_eq!(model["config"]["pipeline"], "boost");
    let a = ok(&mcboost(
        &[
            "predict",
            "--model",
            "model.json",
            "--data",
            "train.jsonl",
            "--query",
            "held.jsonl",
        ],
        d,
    ));
    let b = ok(&mcboost(
        &[
            "predict",
            "--model",
            "model.json",
            "--data",
            "train.jsonl",
            "--query",
            "held.jsonl",
        ],
        d,
    ));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 40);
    let bound = json(&mcboost(&["compress-bound", "--model", "model.json"], d));
    assert_eq!(bound["m"], 60);
}

#[test]
fn bound_values() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&mcboost(
        &["compress-bound", "--r", "0", "--m", "100", "--delta", "0.1"],
        dir.path(),
    ));
    assert!((v["epsilon"].as_f64().unwrap() - 10f64.ln() / 100.0).abs() < 1e-12);
    let v = json(&mcboost(&["compress-bound", "--r", "100", "--m", "100"], dir.path()));
    assert_eq!(v["vacuous"], true);
    assert!(v["epsilon"].is_null());
}

#[test]
fn check_flag_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&mcboost(
        &[
            "gen-data",
            "--m",
            "40",
            "--labels",
            "3",
            "--universe",
            "10",
            "--out",
            "t.jsonl",
            "--class-out",
            "c.json",
        ],
        d,
    ));
    let pass = mcboost(
        &[
            "hint",
            "--data",
            "t.jsonl",
            "--class",
            "c.json",
            "--weak-learner",
            "erm",
            "--gamma",
            "0.3",
            "--check",
        ],
        d,
    );
    let v = json(&pass);
    assert_eq!(v["covered"], true);
    let fail = mcboost(
        &[
            "audit",
            "--data",
            "t.jsonl",
            "--weak-learner",
            "constant:0",
            "--gamma",
            "0.9",
            "--calls",
            "3",
            "--check",
        ],
        d,
    );
    assert_eq!(fail.status.code(), Some(1));
    let bad = mcboost(
        &[
            "boost",
            "--data",
            "missing.jsonl",
            "--weak-learner",
            "erm",
            "--gamma",
            "0.1",
        ],
        d,
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn oig_verbs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let class = r#"{"columns":["p","q"],"rows":[[0,0],[0,1],[1,0],[1,1]]}"#;
    fs::write(d.join("cube.json"), class).unwrap();
    let v = json(&mcboost(
        &[
            "oig",
            "--class",
            "cube.json",
            "--k",
            "1",
            "--dim",
            "--orient",
            "--check",
        ],
        d,
    ));
    assert_eq!(v["dimension"]["d"], 2);
    assert_eq!(v["orientation"]["max_out_degree"], 1);
    assert_eq!(v["orientation"]["valid"], true);
    fs::write(d.join("s.jsonl"), "{\"x\":\"p\",\"y\":1}\n").unwrap();
    let v = json(&mcboost(
        &[
            "oig",
            "--class",
            "cube.json",
            "--data",
            "s.jsonl",
            "--k",
            "1",
            "--predict",
            "p,q",
            "--listpac",
            "--check",
        ],
        d,
    ));
    assert_eq!(v["predictions"][0]["list"][0], 1);
    assert_eq!(v["listpac"]["consistent"], true);
    assert_eq!(mcboost(&["oig", "--class", "cube.json"], d).status.code(), Some(2));
}

#[test]
fn experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = r#"{"data":{"generate":{"kind":"counterexample"}},
        "pipeline":"hedge","learner":{"kind":"too-weak"},"m0":3,"gamma":0.1,"rounds":100,"seeds":[0,1,2,3]}"#;
    fs::write(d.join("exp.json"), cfg).unwrap();
    let a = ok(&mcboost(&["experiment", "--config", "exp.json"], d));
    let b = ok(&mcboost(&["experiment", "--config", "exp.json"], d));
    assert_eq!(a, b);
    let lines: Vec<Value> = a.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    for row in &lines[..4] {
        assert_eq!(row["type"], "row");
        assert!(row["plurality_accuracy"].as_f64().unwrap() <= 2.0 / 3.0);
        assert_eq!(row["elimination_ok"], true);
        assert!(row.get("audit_pass_rate").is_some());
    }
    assert_eq!(lines[4]["type"], "aggregate");
    assert_eq!(lines[4]["runs"], 4);
    let csv = ok(&mcboost(
        &["experiment", "--config", "exp.json", "--csv", "--seeds", "0..2"],
        d,
    ));
    assert_eq!(csv.lines().next().unwrap().split(',').next(), Some("seed"));
    assert_eq!(
        csv.lines()
            .filter(|l| l.starts_with(|c: char| c.is_ascii_digit()))
            .count(),
        3
    );
}
