use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hida_cli::output::PlotManifest;
use hida_cli::report::{OracleReport, TableReport, ThetaReport, ValueReport, VerifyReport};
use serde_json::Value;

fn hida(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hida"))
        .args(args)
        .env_remove("HIDA_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

fn load_schema(name: &str) -> Value {
    let text = std::fs::read_to_string(schema_dir().join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Checks the subset of JSON Schema used by the shipped schema files.
fn check(schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        return check(&load_schema(r), v, at);
    }
    if let Some(alts) = schema.get("oneOf").and_then(Value::as_array) {
        let ok = alts.iter().filter(|s| check(s, v, at).is_ok()).count();
        return if ok == 1 { Ok(()) } else { Err(format!("{at}: {ok} oneOf branches match")) };
    }
    if let Some(opts) = schema.get("enum").and_then(Value::as_array) {
        if !opts.contains(v) {
            return Err(format!("{at}: {v} not in {opts:?}"));
        }
    }
    if let Some(ty) = schema.get("type") {
        let types: Vec<&str> = match ty {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let fits = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            _ => false,
        });
        if !fits {
            return Err(format!("{at}: {v} is not {types:?}"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        for (k, x) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(s) => check(s, x, &format!("{at}.{k}"))?,
                None => match schema.get("additionalProperties") {
                    Some(Value::Bool(false)) => return Err(format!("{at}: unexpected {k}")),
                    Some(s @ Value::Object(_)) => check(s, x, &format!("{at}.{k}"))?,
                    _ => {}
                },
            }
        }
    }
    if let Some(arr) = v.as_array() {
        let min = schema.get("minItems").and_then(Value::as_u64).unwrap_or(0) as usize;
        let max = schema.get("maxItems").and_then(Value::as_u64).map_or(usize::MAX, |m| m as usize);
        if arr.len() < min || arr.len() > max {
            return Err(format!("{at}: length {} outside [{min}, {max}]", arr.len()));
        }
        let prefix = schema.get("prefixItems").and_then(Value::as_array);
        for (i, x) in arr.iter().enumerate() {
            let s = prefix.and_then(|p| p.get(i)).or_else(|| schema.get("items"));
            if let Some(s) = s {
                check(s, x, &format!("{at}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn validate(schema: &str, text: &str) -> Value {
    let v: Value = serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"));
    check(&load_schema(schema), &v, "$").unwrap_or_else(|e| panic!("{schema}: {e}\n{text}"));
    v
}

const DELTA: &str = r#"{"eta":{"indicator":[0,1]},"a":[0.2,0]}"#;
const PRODUCT: &str =
    r#"{"z":[1,0],"alpha":0,"factors":[{"f":{"indicator":[0,1]},"a":[0.2,0]},{"f":{"indicator":[0,2]},"a":[0.1,0]}]}"#;

#[test]
fn delta_at_the_origin_is_the_gaussian_density() {
    let o = hida(&["delta", "--t", "1", "--a", "0", "--xi", "zero"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("0.398942"), "{}", stdout(&o));
    let r: ValueReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((r.value[0] - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
}

#[test]
fn series_outside_the_sector_exits_with_a_domain_error() {
    let o = hida(&["series", "--z", "0.7071+0.7071i", "--t", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("outside S_0"), "{err}");
    let v = validate("error.schema.json", err.trim());
    assert_eq!(v["class"], "domain");
    assert!(o.stdout.is_empty());
}

#[test]
fn homogeneity_suite_reports_no_violations() {
    let o = hida(&["verify", "--suite", "homogeneity", "--trials", "1000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: VerifyReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((r.trials, r.seed, r.bound_violations, r.verdict), (1000, 7, 0, true));
    assert!(r.cauchy_max_gap < 1e-12);
}

#[test]
fn every_suite_passes() {
    for suite in ["growth", "round-trip", "approximant", "series-domain", "sector"] {
        let o = hida(&["verify", "--suite", suite, "--trials", "300", "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{suite}: {}{}", stdout(&o), stderr(&o));
        validate("verify-report.schema.json", &stdout(&o));
    }
}

#[test]
fn exit_codes_follow_the_error_class() {
    // Local time outside Re(a²) > 0.
    let o = hida(&["localtime", "--t", "1", "--a", "1+2i"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // Scaling outside the sector.
    let o = hida(&["scaled-delta", "--t", "1", "--z", "i"]);
    assert_eq!(o.status.code(), Some(2));
    // Linearly dependent directions give a singular Gram matrix.
    let dep = r#"{"z":[1,0],"alpha":0,"factors":[{"f":{"indicator":[0,1]},"a":[0,0]},{"f":{"indicator":[0,1]},"a":[0.1,0]}]}"#;
    let o = hida(&["product", "--input", dep]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    validate("error.schema.json", stderr(&o).trim());
    let o = hida(&["delta", "--input", "/nonexistent/payload.json"]);
    assert_eq!(o.status.code(), Some(4));
    let o = hida(&["delta", "--input", r#"{"t":1,"a":[0,0],"extra":1}"#]);
    assert_eq!(o.status.code(), Some(2));
    let o = hida(&["delta", "--t", "1", "--a", "not-a-number"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_results_match_their_schemas_and_round_trip() {
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["delta", "--t", "2", "--a", "0.3-0.1i", "--xi", "hermite:0.2,0.1i", "--transform", "t"], "value-report.schema.json"),
        (vec!["scaled-delta", "--input", DELTA, "--xi", "basis:1"], "value-report.schema.json"),
        (vec!["product", "--input", PRODUCT, "--oracle"], "value-report.schema.json"),
        (vec!["series", "--z", "1+0.2i", "--t", "1", "--a", "0.3"], "value-report.schema.json"),
        (vec!["series", "--z", "1", "--t", "1", "--partial", "1,2,4"], "table-report.schema.json"),
        (vec!["approximant", "--input", DELTA, "--n", "2,4"], "table-report.schema.json"),
        (vec!["localtime", "--t", "1", "--a", "1", "--grid", "3"], "table-report.schema.json"),
        (vec!["theta", "--rho", "0.1", "--tau", "i"], "theta-report.schema.json"),
        (vec!["circle", "--t", "1", "--phi0", "0.3", "--modes", "1:1,2:0.3"], "value-report.schema.json"),
        (vec!["circle", "--t", "1", "--mode", "residual", "--grid", "4"], "table-report.schema.json"),
        (vec!["circle", "--t", "1", "--mode", "divergence"], "divergence-report.schema.json"),
        (vec!["oracle", "--kind", "delta", "--input", DELTA, "--samples", "20000"], "oracle-report.schema.json"),
    ];
    for (args, schema) in cases {
        let o = hida(&args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let text = stdout(&o);
        let v = validate(schema, &text);
        let again = match schema {
            "value-report.schema.json" => serde_json::to_value(serde_json::from_value::<ValueReport>(v.clone()).unwrap()),
            "table-report.schema.json" => serde_json::to_value(serde_json::from_value::<TableReport>(v.clone()).unwrap()),
            "theta-report.schema.json" => serde_json::to_value(serde_json::from_value::<ThetaReport>(v.clone()).unwrap()),
            "oracle-report.schema.json" => serde_json::to_value(serde_json::from_value::<OracleReport>(v.clone()).unwrap()),
            _ => Ok(v.clone()),
        }
        .unwrap();
        assert_eq!(again, v, "{args:?}");
    }
}

#[test]
fn input_payloads_match_their_schemas() {
    for (schema, payload) in [
        ("donsker-delta.schema.json", DELTA),
        ("delta-product.schema.json", PRODUCT),
        ("delta-series.schema.json", r#"{"z":[1,0.2],"t":1,"a":[0.3,0]}"#),
        ("brownian.schema.json", r#"{"t":1,"a":[1,0]}"#),
        ("circle-state.schema.json", r#"{"phi0":0.3,"t":1,"packet":{"1":[1,0],"-2":[0,0.3]},"s":1}"#),
    ] {
        validate(schema, payload);
    }
    let bad: Value = serde_json::from_str(r#"{"t":1}"#).unwrap();
    assert!(check(&load_schema("brownian.schema.json"), &bad, "$").is_err());
}

#[test]
fn payloads_are_read_from_files_and_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(&path, PRODUCT).unwrap();
    let from_file = hida(&["product", "--input", path.to_str().unwrap()]);
    let inline = hida(&["product", "--input", PRODUCT]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, inline.stdout);

    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_hida"))
        .args(["product", "--input", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(PRODUCT.as_bytes()).unwrap();
    let piped = child.wait_with_output().unwrap();
    assert_eq!(piped.stdout, inline.stdout);
}

#[test]
fn csv_output_writes_a_plot_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.csv");
    let o = hida(&[
        "series", "--z", "1", "--t", "1", "--a", "0.3", "--partial", "1,2,4,8", "--format", "csv", "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,re,im,gap,tail_bound"));
    assert_eq!(lines.count(), 4);
    let mtext = std::fs::read_to_string(dir.path().join("partial.csv.plot.json")).unwrap();
    validate("plot-manifest.schema.json", &mtext);
    let m: PlotManifest = serde_json::from_str(&mtext).unwrap();
    assert_eq!(m.data, "partial.csv");
    assert_eq!((m.x.as_str(), m.y_scale.as_str()), ("n", "log"));
    assert!(m.y.iter().all(|c| csv.starts_with("n,") && csv.lines().next().unwrap().contains(c.as_str())));
}

#[test]
fn residual_table_has_the_documented_columns() {
    let o = hida(&["circle", "--t", "0.5", "--mode", "residual", "--grid", "5", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("phi0,t,psi_re,psi_im,residual\n"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (k, workers) in ["1", "1", "3"].iter().enumerate() {
        let path = dir.path().join(format!("o{k}.json"));
        let o = hida(&[
            "oracle", "--kind", "product", "--input", PRODUCT, "--samples", "40000", "--seed", "11", "--workers", workers,
            "--output", path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
    let env = Command::new(env!("CARGO_BIN_EXE_hida"))
        .args(["oracle", "--kind", "product", "--input", PRODUCT, "--samples", "40000", "--seed", "11"])
        .env("HIDA_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(env.stdout, files[0]);
    let other = hida(&["oracle", "--kind", "product", "--input", PRODUCT, "--samples", "40000", "--seed", "12"]);
    assert_ne!(other.stdout, files[0]);
}

#[test]
fn oracle_agrees_with_the_closed_form() {
    let o = hida(&["oracle", "--kind", "product", "--input", PRODUCT, "--samples", "400000", "--seed", "5"]);
    let r: OracleReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.z_score < 4.0, "{r:?}");
    let o = hida(&["oracle", "--kind", "localtime", "--input", r#"{"t":1,"a":[1,0]}"#, "--paths", "20000", "--steps", "1000"]);
    let r: OracleReport = serde_json::from_str(&stdout(&o)).unwrap();
    let bias = r.bias_bound.unwrap();
    assert!((r.re - r.exact[0]).abs() < 4.0 * r.stderr + bias, "{r:?}");
    let o = hida(&["oracle", "--kind", "delta", "--input", r#"{"eta":{"indicator":[0,1]},"a":[0.2,0],"z":[1,0.5]}"#]);
    assert_eq!(o.status.code(), Some(2));
}
