use std::path::Path;
use std::process::{Command, Output};

use regex::Regex;
use serde_json::Value;

fn nkl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nkl"))
        .args(args)
        .env_remove("NKL_SEED")
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["run", "--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    nkl(&all)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// The subset of JSON Schema the shipped schema uses.
fn validate(schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            other => return Err(format!("{at}: schema type {other} unsupported")),
        };
        if !ok {
            return Err(format!("{at}: expected {t}, got {v}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if v.as_f64().is_some_and(|x| x < min) {
            return Err(format!("{at}: {v} below {min}"));
        }
    }
    if let Some(p) = schema.get("pattern").and_then(Value::as_str) {
        if !Regex::new(p).unwrap().is_match(v.as_str().unwrap_or_default()) {
            return Err(format!("{at}: {v} does not match {p}"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        for (key, val) in obj {
            match (props.and_then(|p| p.get(key)), schema.get("additionalProperties")) {
                (Some(sub), _) => validate(sub, val, &format!("{at}.{key}"))?,
                (None, Some(Value::Bool(false))) => return Err(format!("{at}: unexpected key {key}")),
                (None, Some(sub @ Value::Object(_))) => validate(sub, val, &format!("{at}.{key}"))?,
                (None, _) => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(items, x, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

fn schema() -> Value {
    read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/summary.schema.json"))
}

#[test]
fn repeat_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "--experiment",
        "davies-inconsistency",
        "--seed",
        "7",
        "--n",
        "2000",
        "--k",
        "40",
        "--trials",
        "300",
    ];
    let (ra, rb) = (run_in(a.path(), &args), run_in(b.path(), &args));
    assert_eq!(ra.status.code(), rb.status.code());
    let read = |d: &Path| std::fs::read(d.join("davies-inconsistency.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert!(!read(a.path()).is_empty());
}

#[test]
fn worker_count_does_not_change_output() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "--experiment",
        "stone-bound",
        "--k",
        "1,3",
        "--trials",
        "200",
        "--seed",
        "5",
    ];
    let ra = run_in(a.path(), &[&args[..], &["--workers", "1"]].concat());
    let rb = run_in(b.path(), &[&args[..], &["--workers", "3"]].concat());
    assert_eq!(ra.status.code(), Some(0));
    assert_eq!(rb.status.code(), Some(0));
    let read = |d: &Path| std::fs::read(d.join("stone-bound.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn harmonic_summary_has_exact_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["--experiment", "harmonic-indegree", "--n", "4", "--trials", "2000"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("harmonic-indegree.json")).unwrap();
    assert!(text.contains("\"11/6\""), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("harmonic-indegree.csv")).unwrap();
    assert!(csv.starts_with("experiment,statistic,point,kind,value,std_error,count\n"));
    assert!(csv.contains(",11/6,"));
}

#[test]
fn summaries_match_the_schema() {
    let schema = schema();
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--experiment", "harmonic-indegree", "--n", "4,6", "--trials", "500"][..],
        &["--experiment", "davies-chain", "--depth", "3", "--trials", "4"],
        &["--experiment", "cover-hart", "--n", "50,100", "--trials", "50"],
        &[
            "--experiment",
            "strong-concentration",
            "--n",
            "500",
            "--epsilon",
            "0.3",
            "--trials",
            "5",
        ],
    ] {
        let out = run_in(dir.path(), args);
        assert_ne!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
        let id = args[1];
        let v = read_json(&dir.path().join(format!("{id}.json")));
        validate(&schema, &v, id).unwrap();
    }
}

#[test]
fn validator_rejects_bad_documents() {
    let schema = schema();
    let mut v = serde_json::json!({
        "experiment": "x", "anchor": "a", "seed": 1, "config": "", "params": {},
        "all_checks_pass": true, "counted_checks": 0, "checks": [], "statistics": []
    });
    validate(&schema, &v, "doc").unwrap();
    v["checks"] = serde_json::json!([{ "name": "c", "rule": "zero", "statistics": [], "status": "maybe" }]);
    assert!(validate(&schema, &v, "doc").is_err());
    v["checks"] = serde_json::json!([]);
    v["extra"] = serde_json::json!(1);
    assert!(validate(&schema, &v, "doc").is_err());
}

#[test]
fn k_above_n_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "--experiment",
            "expected-error",
            "--n",
            "4",
            "--k",
            "10",
            "--trials",
            "10",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("k = 10 out of range: need 1 <= k <= 4"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(nkl(&["run", "--experiment", "no-such-thing"]).status.code(), Some(1));
    assert_eq!(nkl(&["run", "--not-a-flag"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["--experiment", "stone-bound", "--alpha", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_check_exits_two() {
    // constant eta = 1/2 cannot come within 0.001 of its Bayes error at n = 10
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "--experiment",
            "expected-error",
            "--distribution",
            "uniform-half",
            "--n",
            "10",
            "--k",
            "1",
            "--trials",
            "400",
            "--tolerance",
            "0.001",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "experiment = \"harmonic-indegree\"\nn = 4\ntrials = 100\nseed = 3\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["--config", cfg.to_str().unwrap(), "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("harmonic-indegree.json"));
    assert_eq!(v["params"]["trials"], "200");
    assert_eq!(v["seed"], 3);

    std::fs::write(&cfg, "experiment = \"harmonic-indegree\"\nbogus = 1\n").unwrap();
    let out = run_in(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nkl"))
        .args([
            "run",
            "--experiment",
            "harmonic-indegree",
            "--n",
            "4",
            "--trials",
            "10",
            "--out",
        ])
        .arg(dir.path())
        .env("NKL_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("harmonic-indegree.json"))["seed"], 99);
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    let out = run_in(
        &file,
        &["--experiment", "harmonic-indegree", "--n", "4", "--trials", "10"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn catalog_is_sorted_stable_and_anchored() {
    let a = nkl(&["list-experiments"]);
    let b = nkl(&["list-experiments"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let ids: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    for want in ["stone-bound", "t-set-bound", "davies-inconsistency"] {
        assert!(ids.contains(&want), "{want} missing");
    }
    let mut sorted = ids.clone();
    sorted.sort_unstable();
    assert_eq!(ids, sorted);
    assert!(
        text.lines().all(|l| l.split_whitespace().count() > 1),
        "every entry names its anchor"
    );
}
