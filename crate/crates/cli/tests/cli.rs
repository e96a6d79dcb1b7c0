use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run_in(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_campana"))
        .args(args)
        .env("CAMPANA_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

const COMMANDS: &[&[&str]] = &[
    &["constants", "three"],
    &["constants", "binary", "--a", "1", "--b", "5"],
    &["count", "n1", "--bmax", "10000"],
    &["count", "binary", "--a", "1", "--b", "5", "--bmax", "1000"],
    &["count", "conic", "--y", "1,1,1", "--t", "1000"],
    &["verify", "counterexample"],
    &["verify", "densities"],
    &["thinset", "--m", "5", "--b", "10000"],
];

#[test]
fn every_report_matches_the_published_schema() {
    let v = validator();
    let dir = tempfile::tempdir().unwrap();
    for args in COMMANDS {
        let out = run_in(dir.path(), args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", stderr(&out));
        let doc = json_of(&out);
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:#?}");
    }
}

#[test]
fn schema_rejects_a_malformed_report() {
    let v = validator();
    let dir = tempfile::tempdir().unwrap();
    let mut doc = json_of(&run_in(dir.path(), &["constants", "three"]));
    doc["constants"][0]["tail_kind"] = Value::from("guess");
    assert!(!v.is_valid(&doc));
    let mut doc = json_of(&run_in(dir.path(), &["constants", "three"]));
    doc.as_object_mut().unwrap().remove("checks");
    assert!(!v.is_valid(&doc));
}

#[test]
fn reruns_are_bit_identical() {
    for args in COMMANDS {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_in(a.path(), args);
        let fresh_cache = run_in(b.path(), args);
        let warm_cache = run_in(a.path(), args);
        assert_eq!(first.stdout, fresh_cache.stdout, "{args:?}");
        assert_eq!(first.stdout, warm_cache.stdout, "{args:?}");
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["count", "n1", "--bmax", "100000"];
    let computed = run_in(dir.path(), &args);
    assert!(computed.status.success());
    assert!(!stderr(&computed).contains("read from cache"));

    let csv = std::fs::read_to_string(dir.path().join("n1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("B,raw_count,divisor"));
    let rows: Vec<Vec<u64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![1_000, 10_000, 100_000]);
    for r in &rows {
        let fresh = campana::counting::count_n1(r[0]);
        assert_eq!((r[1], r[2]), (fresh.raw_count, fresh.divisor));
    }

    let read = run_in(dir.path(), &args);
    assert!(stderr(&read).contains("n1: B = 100000 read from cache"));
    assert_eq!(computed.stdout, read.stdout);

    let recomputed = run_in(dir.path(), &["--recompute", "count", "n1", "--bmax", "100000"]);
    assert!(!stderr(&recomputed).contains("read from cache"));
    assert_eq!(computed.stdout, recomputed.stdout);
}

#[test]
fn a_corrupted_cache_entry_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), &["count", "n1", "--bmax", "1000"]).status.success());
    std::fs::write(dir.path().join("n1.csv"), "B,raw_count,divisor\n1000,229,2\n").unwrap();
    let out = run_in(dir.path(), &["--recompute", "count", "n1", "--bmax", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error: "), "{}", stderr(&out));
}

#[test]
fn constants_three_values() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run_in(dir.path(), &["constants", "three"]));
    let pred = &doc["constants"][0];
    let third = pred["components"]["value_over_3"].as_f64().unwrap();
    assert!((third - 2.56785632).abs() <= 1e-8, "{third}");
    assert!((pred["value"].as_f64().unwrap() / 3.0 - third).abs() < 1e-15);
    let fiber = &doc["constants"][1];
    assert!((fiber["estimate"].as_f64().unwrap() - 2.68).abs() < 0.02);
    assert_eq!(fiber["tail_kind"], "heuristic");
    assert_eq!(doc["passed"], true);
}

#[test]
fn constants_binary_flags_the_undershoot() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run_in(dir.path(), &["constants", "binary", "--a", "1", "--b", "5"]));
    assert_eq!(doc["comparisons"][0]["relation"], "less");
    assert_eq!(doc["constants"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_parameters_name_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["constants", "binary", "--a", "4", "--b", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("error: a must be squarefree"), "{}", stderr(&out));

    let out = run_in(dir.path(), &["constants", "binary", "--a", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--count-budget", "1000", "count", "n1", "--bmax", "10000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("count budget"));
    assert!(std::fs::read_dir(dir.path()).map(|d| d.count() == 0).unwrap_or(true));
}

#[test]
fn count_examples() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run_in(dir.path(), &["count", "n1", "--bmax", "1000000"]));
    let bs: Vec<u64> = doc["counts"][0]["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["B"].as_u64().unwrap())
        .collect();
    assert_eq!(bs, vec![1_000, 10_000, 100_000, 1_000_000]);
    assert_eq!(doc["checks"].as_array().unwrap().len(), 4);
    assert_eq!(doc["passed"], true);

    let doc = json_of(&run_in(dir.path(), &["count", "binary", "--a", "1", "--b", "5", "--bmax", "10000"]));
    assert!(doc["checks"][0]["name"].as_str().unwrap().starts_with("decomposition identity"));
    assert_eq!(doc["passed"], true);

    let doc = json_of(&run_in(dir.path(), &["count", "conic", "--y", "1,1,1", "--t", "100000"]));
    let slope = &doc["counts"][0]["slope"];
    let last = slope["ratios"].as_array().unwrap().last().unwrap()[1].as_f64().unwrap();
    let four_over_pi = 4.0 / std::f64::consts::PI;
    assert!((slope["reference_value"].as_f64().unwrap() - four_over_pi).abs() < 1e-12);
    assert!((last / four_over_pi - 1.0).abs() < 1e-3, "{last}");
}

#[test]
fn verify_batteries_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    for battery in ["counterexample", "densities"] {
        let out = run_in(dir.path(), &["verify", battery]);
        assert_eq!(out.status.code(), Some(0), "{battery}: {}", stderr(&out));
    }
    let out = run_in(dir.path(), &["--count-budget", "10000", "verify", "identities"]);
    let doc = json_of(&out);
    let failed: Vec<&str> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    // only the fiber-by-fiber 3/4 relation is false; everything else holds
    assert_eq!(failed, vec!["thin fiber count = 3/4 conic count, fiber by fiber"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("check failed: thin fiber count = 3/4 conic count, fiber by fiber"));
}

#[test]
fn thinset_examples() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json_of(&run_in(dir.path(), &["thinset", "--m", "100", "--b", "100"]));
    let rows = doc["tables"][0]["rows"].as_array().unwrap();
    let last = rows.last().unwrap();
    assert_eq!(last[0], 100);
    assert_eq!(last[2], "0");

    let doc = json_of(&run_in(dir.path(), &["thinset", "--m", "40", "--b", "10000"]));
    let rows = doc["tables"][0]["rows"].as_array().unwrap();
    let squares = campana::counting::fiber_counts(10_000)[&[1, 1, 1]];
    assert_eq!(rows[0][1], num_string(squares, 2));
    let predicted: Vec<f64> = rows.iter().map(|r| r[3].as_f64().unwrap()).collect();
    assert!(predicted.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(doc["passed"], true);
}

fn num_string(raw: u64, divisor: u64) -> String {
    num_rational::Ratio::new(raw, divisor).to_string()
}

#[test]
fn other_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--format", "csv", "constants", "three"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("section,item,field,value\n"));
    assert!(text.contains("constant,c_pstva_three,component.value_over_3,2.5678563"));
    assert!(text.trim_end().ends_with("summary,constants three,passed,true"));

    let out = run_in(dir.path(), &["--format", "text", "verify", "counterexample"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS margin"));
    assert!(text.trim_end().ends_with("PASS"));
}
