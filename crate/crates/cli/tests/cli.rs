use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const F1_SCHEMA: &str = r#"{
  "format": "gz-schema/1",
  "strategy": "explicit",
  "dimensions": [
    {"name": "Y", "bits": 3, "positions": [6, 4, 2]},
    {"name": "X", "bits": 3, "positions": [5, 3, 1]}
  ]
}"#;

const GRID_SCHEMA: &str = r#"{
  "format": "gz-schema/1",
  "strategy": "interleave",
  "dimensions": [
    {"name": "a", "bits": 8},
    {"name": "b", "bits": 6},
    {"name": "c", "bits": 4}
  ]
}"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grasshopper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct F1 {
    _dir: TempDir,
    schema: PathBuf,
    data: PathBuf,
}

/// Every (X, Y) pair, so the dataset holds keys 0..64.
fn f1() -> F1 {
    let dir = TempDir::new().unwrap();
    let schema = dir.path().join("f1.json");
    fs::write(&schema, F1_SCHEMA).unwrap();
    let csv_path = dir.path().join("f1.csv");
    let mut text = String::from("X,Y\n");
    for x in 0..8 {
        for y in 0..8 {
            text += &format!("{x},{y}\n");
        }
    }
    fs::write(&csv_path, text).unwrap();
    let data = dir.path().join("f1.gz");
    ok(&[
        "ingest",
        "--schema",
        s(&schema),
        "--data",
        s(&data),
        s(&csv_path),
    ]);
    F1 {
        _dir: dir,
        schema,
        data,
    }
}

fn query_json(f: &F1, filter: &str, extra: &[&str]) -> Value {
    let mut args = vec![
        "query",
        "--schema",
        s(&f.schema),
        "--data",
        s(&f.data),
        "--r",
        "0.5",
        "--json",
        "-",
        "--limit",
        "100",
    ];
    args.extend_from_slice(extra);
    args.push(filter);
    let out = ok(&args);
    let start = out.find("\n{").map_or(0, |i| i + 1);
    serde_json::from_str(&out[start..]).unwrap()
}

#[test]
fn point_filters_on_f1() {
    let f = f1();
    for strategy in ["crawler", "frog", "hopper", "auto"] {
        let v = query_json(&f, "X=5", &["--strategy", strategy]);
        assert_eq!(v["result_count"], 8, "{strategy}");
        let v = query_json(&f, "X=5 AND Y=3", &["--strategy", strategy]);
        assert_eq!(v["result_count"], 1, "{strategy}");
        assert_eq!(v["keys"][0].to_string(), "27");
        assert_eq!(v["sample"][0]["X"], 5);
        assert_eq!(v["sample"][0]["Y"], 3);
    }
}

#[test]
fn full_range_and_sets() {
    let f = f1();
    assert_eq!(query_json(&f, "X IN [0,7]", &[])["result_count"], 64);
    assert_eq!(
        query_json(&f, "X in {1,6} and Y in [2,3]", &[])["result_count"],
        4
    );
    let v = query_json(&f, "X IN [2,5]", &["--partitions", "4", "--parallel", "0"]);
    assert_eq!(v["result_count"], 32);
}

#[test]
fn count_only_collects_nothing() {
    let f = f1();
    let v = query_json(&f, "Y=1", &["--count-only"]);
    assert_eq!(v["result_count"], 8);
    assert_eq!(v["sample"].as_array().unwrap().len(), 0);
}

#[test]
fn parse_and_value_errors_exit_2() {
    let f = f1();
    for filter in ["X==5", "X IN [3", "Q=1", "X=8"] {
        let out = bin(&[
            "query",
            "--schema",
            s(&f.schema),
            "--data",
            s(&f.data),
            filter,
        ]);
        assert_eq!(out.status.code(), Some(2), "{filter}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn generate_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let schema = dir.path().join("grid.json");
    fs::write(&schema, GRID_SCHEMA).unwrap();
    let gen = |name: &str, seed: &str| {
        let data = dir.path().join(name);
        ok(&[
            "generate",
            "--schema",
            s(&schema),
            "--data",
            s(&data),
            "--rows",
            "5000",
            "--distribution",
            "zipf:1.1",
            "--seed",
            seed,
        ]);
        fs::read(data).unwrap()
    };
    let a = gen("a.gz", "7");
    assert_eq!(a, gen("b.gz", "7"));
    assert_ne!(a, gen("c.gz", "8"));

    let empty = dir.path().join("empty.gz");
    ok(&[
        "generate",
        "--schema",
        s(&schema),
        "--data",
        s(&empty),
        "--rows",
        "0",
    ]);
    let v: Value = serde_json::from_str(
        &ok(&[
            "query",
            "--schema",
            s(&schema),
            "--data",
            s(&empty),
            "--r",
            "0.5",
            "--json",
            "-",
            "a=3",
        ])
        .lines()
        .skip_while(|l| !l.starts_with('{'))
        .collect::<Vec<_>>()
        .join("\n"),
    )
    .unwrap();
    assert_eq!(v["result_count"], 0);
}

#[test]
fn ingest_dictionaries_round_trip() {
    let dir = TempDir::new().unwrap();
    let schema = dir.path().join("s.json");
    fs::write(
        &schema,
        r#"{"format":"gz-schema/1","strategy":"odometer","dimensions":[{"name":"city","bits":2},{"name":"n","bits":4}]}"#,
    )
    .unwrap();
    let input = dir.path().join("in.csv");
    fs::write(&input, "city,n\nparis,3\nlima,3\nparis,9\noslo,1\n").unwrap();
    let data = dir.path().join("d.gz");
    ok(&[
        "ingest",
        "--schema",
        s(&schema),
        "--data",
        s(&data),
        s(&input),
    ]);
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.gz.meta.json")).unwrap())
            .unwrap();
    assert_eq!(
        meta["dictionaries"]["city"],
        serde_json::json!(["paris", "lima", "oslo"])
    );

    let out = ok(&[
        "query",
        "--schema",
        s(&schema),
        "--data",
        s(&data),
        "--r",
        "0.5",
        "--json",
        "-",
        "city=0",
    ]);
    let v: Value = serde_json::from_str(&out[out.find("\n{").unwrap() + 1..]).unwrap();
    assert_eq!(v["result_count"], 2);
    let cities: Vec<&str> = v["sample"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["city"].as_str().unwrap())
        .collect();
    assert_eq!(cities, ["paris", "paris"]);

    fs::write(&input, "city,n\na,1\nb,1\nc,1\nd,1\ne,1\n").unwrap();
    let out = bin(&[
        "ingest",
        "--schema",
        s(&schema),
        "--data",
        s(&data),
        s(&input),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("city"));
}

#[test]
fn measure_r_persists() {
    let f = f1();
    let out = ok(&[
        "measure-r",
        "--data",
        s(&f.data),
        "--ops",
        "200",
        "--trials",
        "3",
    ]);
    assert!(out.starts_with("R = "));
    let meta_path = f.data.with_file_name("f1.gz.meta.json");
    let meta: Value = serde_json::from_str(&fs::read_to_string(&meta_path).unwrap()).unwrap();
    assert_eq!(meta["ratio"]["source"], "measured");
    assert_eq!(meta["ratio"]["samples"].as_array().unwrap().len(), 3);
    assert!(meta["ratio"]["r"].as_f64().unwrap() > 0.0);

    ok(&["measure-r", "--data", s(&f.data), "--r", "1.0"]);
    let meta: Value = serde_json::from_str(&fs::read_to_string(&meta_path).unwrap()).unwrap();
    assert_eq!(meta["ratio"]["source"], "override");
    assert_eq!(meta["ratio"]["r"], 1.0);
    // the dictionaries survive the rewrite
    assert!(meta.get("dictionaries").is_some());

    let out = bin(&["measure-r", "--data", s(&f.data), "--r", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_agrees_across_strategies() {
    let f = f1();
    let json = f.data.with_file_name("bench.json");
    let csv_path = f.data.with_file_name("bench.csv");
    ok(&[
        "bench",
        "--schema",
        s(&f.schema),
        "--data",
        s(&f.data),
        "--r",
        "0.5",
        "--reps",
        "3",
        "--json",
        s(&json),
        "--csv",
        s(&csv_path),
    ]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert!(v["divergences"].as_array().unwrap().is_empty());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 4);
    for dim in ["point:Y", "point:X"] {
        let counts: Vec<&Value> = rows
            .iter()
            .filter(|r| r["template"] == dim)
            .map(|r| &r["result_count"])
            .collect();
        assert_eq!(counts.len(), 4);
        assert!(counts.iter().all(|c| *c == counts[0]));
    }
    let csv_text = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv_text.lines().count(), 1 + rows.len());
    assert!(csv_text.starts_with("template,strategy,"));

    let out = bin(&[
        "bench",
        "--schema",
        s(&f.schema),
        "--data",
        s(&f.data),
        "--reps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_matrix_file() {
    let f = f1();
    let matrix = f.data.with_file_name("m.json");
    fs::write(
        &matrix,
        r#"{"cells":[{"template":"range:X:3","strategies":["crawler","hopper"],"repetitions":3},
                     {"template":"X=2 AND Y IN {1,5}","strategies":["frog","auto"],"repetitions":4}]}"#,
    )
    .unwrap();
    let out = ok(&[
        "bench",
        "--schema",
        s(&f.schema),
        "--data",
        s(&f.data),
        "--r",
        "0.5",
        "--matrix",
        s(&matrix),
    ]);
    assert_eq!(out.lines().count(), 1 + 4);
}

#[test]
fn analyze_reports_json() {
    let f = f1();
    let out = ok(&["analyze", "--schema", s(&f.schema), "X=5 AND Y IN [2,5]"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["width"], 6);
    assert_eq!(v["restrictions"].as_array().unwrap().len(), 2);
    assert!(v.get("dataset").is_none_or(Value::is_null));

    let out = ok(&[
        "analyze",
        "--schema",
        s(&f.schema),
        "--data",
        s(&f.data),
        "--r",
        "0.5",
        "X=5",
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["dataset"]["threshold"].is_number());
    assert_eq!(v["dataset"]["r"], 0.5);
}
