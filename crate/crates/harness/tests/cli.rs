mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use rankpursuit_harness::points::write_points;
use rankpursuit_harness::{Method, ResultTable};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankpursuit")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["experiment", "--method", "svm"])), 1);
    assert_eq!(code(&run(&["experiment", "--beta", "2"])), 1);
    assert_eq!(code(&run(&["experiment", "--dataset", "jester"])), 1);
}

#[test]
fn fit_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let probe = dir.path().join("probe.csv");
    let model = dir.path().join("model.json");
    let preds = dir.path().join("preds.csv");
    let mut points = toy_points(1, 20, 3);
    points.extend(toy_unscored(2, 6, 3).points().iter().cloned());
    write_points(&points, std::fs::File::create(&train).unwrap()).unwrap();
    write_points(&toy_points(3, 5, 3), std::fs::File::create(&probe).unwrap()).unwrap();

    for method in ["ranking_pursuit", "rankrls", "ss_ranking_pursuit", "sparse_rankrls"] {
        let out = run(&[
            "fit", "--method", method, "--dataset", path(&train), "--out", path(&model), "--width", "0.5", "--max-basis", "5",
        ]);
        assert_eq!(code(&out), 0, "{method}: {}", String::from_utf8_lossy(&out.stderr));
        let out = run(&["predict", "--model", path(&model), "--dataset", path(&probe), "--out", path(&preds)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(&preds).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "group,item,prediction");
        assert_eq!(lines.len(), 6);
    }
    let out = run(&["predict", "--model", path(&model), "--dataset", path(&probe)]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 6);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = run(&["fit", "--method", "rls", "--dataset", path(&missing), "--out", path(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 2);

    let bad_model = dir.path().join("bad.json");
    std::fs::write(&bad_model, "{\"schema_version\": 1, \"method\": \"rls\"").unwrap();
    let probe = dir.path().join("probe.csv");
    write_points(&toy_points(3, 5, 3), std::fs::File::create(&probe).unwrap()).unwrap();
    let out = run(&["predict", "--model", path(&bad_model), "--dataset", path(&probe)]);
    assert_eq!(code(&out), 2);

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,1,2.0,0.5,0.5\n1,2,1.0,0.5\n").unwrap();
    let out = run(&["fit", "--method", "rls", "--dataset", path(&ragged), "--out", path(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_hyperparameter_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    write_points(&toy_points(1, 10, 2), std::fs::File::create(&train).unwrap()).unwrap();
    let out = run(&["fit", "--method", "rls", "--dataset", path(&train), "--out", path(&dir.path().join("m.json")), "--width", "-1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn experiment_writes_tables_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let cfg = small_config(&[Method::RankingPursuit, Method::MatchingPursuit]);
    std::fs::write(&config, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let table = dir.path().join("table.csv");
    let out = run(&["experiment", "--config", path(&config), "--format", "csv", "--out", path(&table)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(&table).unwrap();
    let parsed = ResultTable::parse_csv(std::str::from_utf8(&first).unwrap()).unwrap();
    assert_eq!(parsed.methods(), vec!["ranking_pursuit", "matching_pursuit"]);
    assert!(dir.path().join("table.csv.mse").exists());

    let records = dir.path().join("table.csv.records.json");
    let out = run(&["compare", path(&records), "--method", "ranking_pursuit,matching_pursuit"]);
    assert!(matches!(code(&out), 0 | 2), "{}", String::from_utf8_lossy(&out.stderr));
    if code(&out) == 0 {
        assert!(String::from_utf8_lossy(&out.stdout).contains("ranking_pursuit vs matching_pursuit"));
    }
    assert_eq!(code(&run(&["compare", path(&records), "--method", "rls"])), 1);

    let out = run(&["experiment", "--config", path(&config), "--format", "csv"]);
    assert_eq!(out.stdout, first);
    let out = run(&["grid", "--config", path(&config)]);
    assert_eq!(code(&out), 0);
    let choices: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(choices.as_array().unwrap().len(), 2);
}
