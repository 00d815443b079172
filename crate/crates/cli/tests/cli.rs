use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn swclab(dir: &Path, args: &[&str]) -> (i32, Value) {
    swclab_env(dir, args, &[])
}

fn swclab_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_swclab"))
        .args(args)
        .current_dir(dir)
        .envs(env.iter().copied())
        .output()
        .expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let doc = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text:?}"));
    (out.status.code().expect("exit code"), doc)
}

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

#[test]
fn envelope_shape() {
    let dir = tmp();
    let (code, doc) = swclab(
        dir.path(),
        &["graph", "tree", "--n", "2", "--check-formula"],
    );
    assert_eq!(code, 0);
    assert_eq!(doc["tool"], "swclab");
    assert_eq!(doc["command"], "graph tree");
    assert!(doc["tolerances"].is_object() && doc["config"].is_object());
    let r = &doc["result"];
    assert_eq!(
        (r["vertices"].as_u64(), r["diameter"].as_u64()),
        (Some(7), Some(4))
    );
    assert_eq!(r["formula_ok"], true);
}

#[test]
fn nested_family_commands() {
    let dir = tmp();
    let (code, doc) = swclab(
        dir.path(),
        &["family", "schreier", "--n", "4", "trace", "--A", "1,2,3,4"],
    );
    assert_eq!(code, 0);
    assert_eq!(doc["command"], "family schreier trace");
    assert_eq!(doc["result"]["count"], 8);
}

#[test]
fn floats_are_decimal_strings() {
    let dir = tmp();
    let (code, doc) = swclab(dir.path(), &["embed", "bourgain", "--sb", "--n", "1"]);
    assert_eq!(code, 0);
    let report = &doc["result"]["report"];
    assert_eq!(report["sep_norm"], "0.5");
    assert_eq!(report["lip_gauge"], "1");
    assert_eq!(report["pairs"], 3);
}

#[test]
fn exit_codes() {
    let dir = tmp();
    let (code, doc) = swclab(
        dir.path(),
        &["dz", "--input", "missing.json", "--eps", "0.5"],
    );
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["kind"], "invalid_input");

    let (code, _) = swclab(dir.path(), &["--jobs", "0", "graph", "tree", "--n", "1"]);
    assert_eq!(code, 2);

    assert_eq!(swclab(dir.path(), &["fixtures", "sb(4)", "blocks(3)"]).0, 0);
    let (code, doc) = swclab_env(
        dir.path(),
        &["dz", "--input", "sb4.json", "--eps", "0.5"],
        &[("SWCLAB_CLIQUE_CAP", "1")],
    );
    assert_eq!(code, 3);
    assert_eq!(doc["error"]["kind"], "budget_exceeded");

    let (code, doc) = swclab(
        dir.path(),
        &["james", "search", "--input", "blocks3.json", "--theta", "5"],
    );
    assert_eq!(code, 3);
    assert_eq!(doc["error"]["kind"], "infeasible");
}

#[test]
fn fixtures_are_written() {
    let dir = tmp();
    let (code, doc) = swclab(
        dir.path(),
        &["fixtures", "sb(3)", "schreier(6)", "l2ball-net(2,16,7)"],
    );
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["written"].as_array().unwrap().len(), 3);
    for stem in ["sb3", "schreier6", "l2ball-net-2-16-7"] {
        let text = std::fs::read_to_string(dir.path().join(format!("{stem}.json"))).unwrap();
        serde_json::from_str::<Value>(&text).unwrap();
    }
    let (code, _) = swclab(dir.path(), &["fixtures", "nonsense(1)"]);
    assert_eq!(code, 2);
}

#[test]
fn blocks_index_from_file() {
    let dir = tmp();
    swclab(dir.path(), &["fixtures", "blocks(3)"]);
    let (code, doc) = swclab(
        dir.path(),
        &["dz", "--input", "blocks3.json", "--eps", "0.5"],
    );
    assert_eq!(code, 0);
    assert_eq!(doc["result"]["index"], 2);
}

#[test]
fn embedding_round_trip() {
    let dir = tmp();
    let (code, built) = swclab(
        dir.path(),
        &[
            "embed", "bourgain", "--sb", "--n", "2", "--output", "t2.json",
        ],
    );
    assert_eq!(code, 0);
    let (code, report) = swclab(dir.path(), &["embed", "report", "--input", "t2.json"]);
    assert_eq!(code, 0);
    assert_eq!(report["result"], built["result"]["report"]);
    assert_eq!(report["result"]["sep_norm"], "0.333333333333");
}

#[test]
fn csv_output() {
    let dir = tmp();
    let (code, _) = swclab(
        dir.path(),
        &["--csv", "out.csv", "graph", "diamond", "--n", "1"],
    );
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path,value"));
    assert!(text.lines().any(|l| l == "vertices,4"));
    assert!(text.lines().any(|l| l == "endpoint_distance,2"));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tmp();
    swclab(dir.path(), &["fixtures", "l2ball-net(2,32,3)"]);
    let args = [
        "--seed",
        "9",
        "uc-check",
        "shrink",
        "--ball",
        "l2",
        "--input",
        "l2ball-net-2-32-3.json",
        "--eps",
        "0.5",
    ];
    let (code, first) = swclab(dir.path(), &args);
    assert_eq!(code, 0, "{first}");
    for jobs in ["1", "3"] {
        let mut with_jobs = vec!["--jobs", jobs];
        with_jobs.extend(args);
        let (_, again) = swclab(dir.path(), &with_jobs);
        assert_eq!(again["result"], first["result"]);
    }
}
