use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use trajlens::corpus;
use trajlens::dp::finite_values;
use trajlens::model::DpModel;
use trajlens::report::{DEVIATION_COLUMNS, REPORT_SCHEMA};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_trajlens"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn assert_schema_valid(report: &Value) {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema errors: {errors:#?}");
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn emit_then_solve_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    for (name, params) in [("ls-nonregular", vec!["K=7"]), ("two-cycles", vec![]), ("all-absorbing", vec![])] {
        let file = dir.path().join(format!("{name}.json"));
        let mut args = vec!["corpus", "emit", name];
        args.extend(params.iter().copied());
        args.extend(["--out", path_str(&file)]);
        assert_eq!(run(&args).status.code(), Some(0));

        let out = run(&["solve", "--model", path_str(&file), "--horizon", "30", "--lambda", "0.1,0.01"]);
        assert_eq!(out.status.code(), Some(0));
        let report = stdout_json(&out);
        assert_schema_valid(&report);

        let k: std::collections::BTreeMap<String, i64> = params
            .iter()
            .map(|p| {
                let (a, b) = p.split_once('=').unwrap();
                (a.to_owned(), b.parse().unwrap())
            })
            .collect();
        let entry = corpus::by_name(name, &k).unwrap();
        let m = entry.dp().unwrap();
        let reloaded = DpModel::from_json_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        assert_eq!(&reloaded, m);
        assert_eq!(report["provenance"]["model_hash"], m.content_hash());

        let table = finite_values(m, 30);
        let rows = report["result"]["finite"]["values"].as_array().unwrap();
        for n in 1..=30 {
            let got: Vec<f64> = rows[n - 1]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_f64().unwrap())
                .collect();
            let want = table.values(n);
            assert_eq!(
                got.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                want.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn solve_two_state_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("twostate.json");
    std::fs::write(
        &file,
        r#"{"type":"dp","states":[{"id":"s0","payoff":0,"successors":["s0","s1"]},
            {"id":"s1","payoff":1,"successors":["s1"]}]}"#,
    )
    .unwrap();
    let out = run(&["solve", "--model", path_str(&file), "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_eq!(r["result"]["finite"]["values"][2][0].as_f64().unwrap(), 2.0 / 3.0);
    assert_eq!(r["provenance"]["source"]["kind"], "file");
}

#[test]
fn check_p_exit_codes_and_witness() {
    let out = run(&[
        "check-p", "--corpus", "ls-nonregular", "--param", "K=50", "--epsilon", "0.05",
        "--horizons", "60,80,100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    let w = &r["result"]["report"]["verdict"]["witness"];
    assert_eq!(w["t"].as_f64().unwrap(), 0.5);
    assert_eq!(w["deviation"].as_f64().unwrap(), -0.25);
    assert_eq!(w["play_ids"][0], "a1");

    let out = run(&["check-p", "--corpus", "two-state", "--epsilon", "0.05", "--horizons", "100,200"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["result"]["report"]["verdict"]["status"], "HOLDS");
    assert_eq!(r["result"]["report"]["verdict"]["threshold"]["horizon"], 100);
}

#[test]
fn check_p_csv_columns() {
    let out = run(&[
        "check-p", "--corpus", "three-cycle", "--epsilon", "0.05", "--horizons", "30",
        "--format", "csv", "--grid-points", "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), DEVIATION_COLUMNS.join(","));
    // three start states, 31 breakpoints each
    assert_eq!(lines.count(), 3 * 31);
}

#[test]
fn check_pprime_report_validates() {
    let out = run(&[
        "check-pprime", "--corpus", "two-cycles", "--epsilon", "0.05", "--lambdas", "0.05,0.02",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["result"]["report"]["property"], "P'");
}

#[test]
fn game_commands() {
    let out = run(&["game-solve", "--corpus", "big-match", "--horizon", "100", "--lambda", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    for row in r["result"]["finite"]["values"].as_array().unwrap() {
        assert!((row[0].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    }

    let out = run(&["eval-profile", "--corpus", "gamma", "--profile", "cooperate", "--horizon", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    let cum: Vec<f64> = r["result"]["cumulative"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(cum, vec![0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.0]);
    assert!((r["result"]["extremes"]["upper"].as_f64().unwrap() - 5.0 / 11.0).abs() < 1e-15);
}

#[test]
fn eval_profile_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("sigma.json");
    let tau = dir.path().join("tau.json");
    std::fs::write(&sigma, r#"{"player":1,"stages":[{"play":[0,1]},{"play":[1,0]},{"play":[0.25,0.75]}]}"#).unwrap();
    std::fs::write(&tau, r#"{"player":2,"stationary":{"play":[0.5,0.5]}}"#).unwrap();
    let out = run(&[
        "eval-profile", "--corpus", "big-match", "--horizon", "3",
        "--sigma", path_str(&sigma), "--tau", path_str(&tau), "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,t,cumulative,deviation");
    assert!(text.lines().any(|l| l.starts_with("3,1.0,1.5,")));

    std::fs::write(&tau, r#"{"player":2,"stationary":{"nowhere":[1]}}"#).unwrap();
    let out = run(&[
        "eval-profile", "--corpus", "big-match", "--horizon", "3",
        "--sigma", path_str(&sigma), "--tau", path_str(&tau),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn enumerate_and_probe() {
    let out = run(&["enumerate", "--corpus", "two-state", "--horizon", "3", "--epsilon", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["result"]["plays"].as_array().unwrap().len(), 3);

    let out = run(&["probe-uniform", "--corpus", "two-state", "--epsilon", "0.1", "--threshold", "10", "--max-horizon", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert_schema_valid(&stdout_json(&out));
    let out = run(&[
        "probe-uniform", "--corpus", "ls-nonregular", "--param", "K=40", "--epsilon", "0.1",
        "--threshold", "20", "--max-horizon", "40",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let r = stdout_json(&out);
    assert_schema_valid(&r);
    assert_eq!(r["result"]["passes"], false);
}

#[test]
fn input_errors_exit_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"type\":\"dp\",\n \"states\": [}").unwrap();
    let out = run(&["solve", "--model", path_str(&bad), "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("bad.json") && err.contains("line 2"), "{err}");

    std::fs::write(
        &bad,
        r#"{"type":"dp","states":[{"id":"s0","payoff":0,"successors":["ghost"]}]}"#,
    )
    .unwrap();
    let out = run(&["solve", "--model", path_str(&bad), "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost"));

    assert_eq!(run(&["solve", "--corpus", "nope", "--horizon", "3"]).status.code(), Some(1));
    assert_eq!(run(&["check-p", "--corpus", "two-state", "--epsilon", "0", "--horizons", "3"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--corpus", "two-state", "--lambda", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = [
        "check-p", "--corpus", "ls-nonregular", "--param", "K=12", "--epsilon", "0.1",
        "--horizons", "10,16,24", "--start", "a1,a2,a3,sink",
    ];
    let one = bin().args(args).env("TRAJLENS_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("TRAJLENS_THREADS", "4").output().unwrap();
    let default = run(&args);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, default.stdout);
    let bad = bin().args(args).env("TRAJLENS_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn corpus_list_and_out_file() {
    let out = run(&["corpus", "list", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,params,description\n"));
    assert!(text.contains("ls-nonregular,K=50,"));

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.json");
    let out = run(&["game-solve", "--corpus", "gamma", "--param", "n_max=3", "--horizon", "7", "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_schema_valid(&r);
    assert_eq!(r["provenance"]["source"]["params"]["n_max"], 3);
}
