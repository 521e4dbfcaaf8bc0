use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nodelab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodelab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const K4: &str = "p edge 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n";

#[test]
fn solve_prints_a_labeling_record() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("k4.col"), K4).unwrap();
    let o = nodelab(&["solve", "--algorithm", "dsatur", "--input", "k4.col", "--output", "k4.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["problem"], "gc");
    assert_eq!(v["cost"], 4.0);
    assert_eq!(v["labels"].as_array().unwrap().len(), 4);
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("k4.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn oracle_on_an_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c5.txt"), "0 1\n1 2\n2 3\n3 4\n4 0\n").unwrap();
    let o = nodelab(&["oracle", "--problem", "mvc", "--input", "c5.txt"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["optimum"], 3);
    assert_eq!(v["witness"].as_array().unwrap().iter().filter(|x| **x == 1).count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(nodelab(&["frobnicate"], p).status.code(), Some(1));
    assert_eq!(nodelab(&["solve", "--no-such-flag"], p).status.code(), Some(1));
    assert_eq!(nodelab(&["--format", "xml", "generate"], p).status.code(), Some(1));
    assert_eq!(nodelab(&["evaluate"], p).status.code(), Some(1));
    assert_eq!(nodelab(&["--help"], p).status.code(), Some(0));

    fs::write(
        p.join("empty.json"),
        r#"{"dataset": {"glob": "nothing-here/*.col"}, "algorithms": ["dsatur"]}"#,
    )
    .unwrap();
    assert_eq!(nodelab(&["--config", "empty.json", "evaluate"], p).status.code(), Some(1));

    let o = nodelab(&["solve", "--algorithm", "dsatur", "--input", "missing.col"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    fs::write(p.join("bad.col"), "p edge 2 1\ne 1 7\n").unwrap();
    assert_eq!(nodelab(&["solve", "--algorithm", "dsatur", "--input", "bad.col"], p).status.code(), Some(2));
}

#[test]
fn generate_train_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = nodelab(
        &["--seed", "3", "--output", "data", "generate", "--family", "ws", "--nodes", "12,15", "--count", "6"],
        p,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(p.join("data/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["instances"].as_array().unwrap().len(), 6);

    let o = nodelab(
        &[
            "--seed", "1", "--output", "run", "train", "--epochs", "2", "--dim", "8", "--dataset-size", "40",
            "--batch-size", "8", "--nodes", "10,12", "--family", "ws",
        ],
        p,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(p.join("run/train_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 2);
    for line in log.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        for key in ["epoch", "train_cost", "challenge_cost", "baseline_cost", "p_value", "swapped"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    fs::write(
        p.join("experiment.json"),
        r#"{
            "problem": "gc",
            "dataset": {"glob": "data/*.col"},
            "algorithms": ["dsatur", "smallest-last", "greedy", "sample"],
            "checkpoints": {"m": "run/model.json"},
            "samples": 4
        }"#,
    )
    .unwrap();
    let run = |out: &str, format: &str| {
        let o = nodelab(&["--config", "experiment.json", "--output", out, "--format", format, "evaluate"], p);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("csv", "csv");
    let records = fs::read_to_string(p.join("csv/records.csv")).unwrap();
    let summary = fs::read_to_string(p.join("csv/summary.csv")).unwrap();
    assert!(records.starts_with("# nodelab "));
    assert!(summary.starts_with("# nodelab "));
    // header line plus 6 instances times 4 algorithms
    assert_eq!(records.lines().filter(|l| !l.starts_with('#')).count(), 25);

    run("a", "json");
    run("b", "json");
    let strip = |dir: &str| {
        let mut v: Value = serde_json::from_str(&fs::read_to_string(p.join(dir).join("report.json")).unwrap()).unwrap();
        for r in v["records"].as_array_mut().unwrap() {
            r.as_object_mut().unwrap().remove("wall_time");
        }
        v
    };
    let a = strip("a");
    assert_eq!(a, strip("b"));
    assert_eq!(a["format_version"], 1);
    let summary = a["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 4);
    for s in summary {
        assert_eq!(s["feasible"], 6);
    }
}
