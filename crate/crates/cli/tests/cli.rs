use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn luka(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_luka")).args(args).current_dir(data_dir()).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn ok(args: &[&str]) -> String {
    let r = luka(args);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    r.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).expect("JSON output")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("luka-cli-{}-{name}", std::process::id()))
}

/// Validates against the schema definition named after the verb.
fn assert_schema(def: &str, instance: &Value) {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/output.schema.json")).unwrap();
    let mut schema: Value = serde_json::from_str(&text).unwrap();
    let root = schema.as_object_mut().unwrap();
    root.remove("anyOf");
    root.insert("$ref".into(), Value::String(format!("#/$defs/{def}")));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{def}: {instance} violates schema: {errors:?}");
}

const SQRT_EXAMPLE: &str = "~(delta[sqrt2_over_2] v1 + delta[sqrt2_over_2] v1)";

/// One invocation per verb, with the schema definition it must satisfy.
fn corpus() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("value", vec!["eval", "-e", "v1 + v2", "--point", "1/3,1/2"]),
        ("value", vec!["eval", "-e", "delta[sqrt2_over_2] v1", "--point", "1", "--precision", "8"]),
        ("degree", vec!["truth-degree", "-e", "v1 \\/ ~v1"]),
        ("degree", vec!["provability-degree", "-e", "eta[1/3] -> v1 \\/ ~v1"]),
        ("degree", vec!["unit-norm", "-e", "v1 . v2"]),
        ("degree", vec!["integral", "-e", "v1 + v1"]),
        ("degree", vec!["truth-degree", "-e", SQRT_EXAMPLE, "--precision", "12"]),
        ("consequence", vec!["consequence", "--premise", "v1", "-e", "v1 + v1"]),
        ("consequence", vec!["consequence", "--premise", "v1 + v1", "-e", "v1"]),
        ("consistent", vec!["consistent", "--premise", "v1", "--premise", "~v1"]),
        ("consistent", vec!["consistent", "--premise", "v1 + v2", "--premise", "~v1"]),
        ("limit_check", vec!["limit-check", "--sequence", "ramp.json", "-e", "v1", "--rate", "--upto", "8"]),
        ("limit_check", vec!["limit-check", "--sequence", "ramp.json", "-e", "v1", "--threshold", "3/4", "--upto", "6"]),
        ("sandwich", vec!["sandwich", "-e", SQRT_EXAMPLE, "--precision", "10"]),
        ("approx", vec!["approx", "-f", "square_samples.json"]),
        ("zeroset", vec!["zeroset", "-e", "~(v1 + v1)"]),
        ("zeroset", vec!["zeroset", "-f", "nonmv.json", "--precision", "10"]),
        ("presentation", vec!["present", "-f", "half_interval.json"]),
        ("mvgen", vec!["mvgen", "-f", "halving.json"]),
        ("mvgen", vec!["mvgen", "-f", "nonmv.json", "--precision", "6"]),
        ("presentation", vec!["extend", "-e", "~(v1 + v1)", "--to", "RMV"]),
        ("subst_check", vec!["subst-check", "-f", "subst_ok.json"]),
        ("subst_check", vec!["subst-check", "-f", "subst_bad.json"]),
        ("selftest", vec!["selftest", "--suite", "axioms", "--seed", "7"]),
    ]
}

#[test]
fn documented_examples() {
    assert_eq!(ok(&["truth-degree", "-e", "v1 \\/ ~v1"]), "{\"kind\":\"exact\",\"value\":\"1/2\",\"witness\":[\"1/2\"]}\n");
    assert_eq!(ok(&["integral", "-e", "v1 + v1"]), "{\"kind\":\"exact\",\"value\":\"3/4\"}\n");

    let report = json(&["selftest", "--suite", "axioms", "--seed", "7"]);
    assert_eq!(report["seed"], 7);
    assert_eq!(report["passed"], true);
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["L1", "L2", "L3", "L4", "R1", "R2", "R3", "R4"]);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["instances"] == 50));
}

#[test]
fn every_output_matches_its_schema() {
    for (def, args) in corpus() {
        assert_schema(def, &json(&args));
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (_, args) in corpus() {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
        let mut csv = args.clone();
        csv.extend(["--format", "csv"]);
        assert_eq!(ok(&csv), ok(&csv), "{csv:?}");
    }
}

#[test]
fn analysis_verbs_report_exact_values() {
    assert_eq!(json(&["eval", "-e", "v1 + v2", "--point", "1/3,1/2"])["value"], "5/6");
    assert_eq!(json(&["unit-norm", "-e", "v1 . v2"])["value"], "1");
    assert_eq!(json(&["provability-degree", "-e", "v1 \\/ ~v1"])["value"], "1/2");

    let yes = json(&["consequence", "--premise", "v1", "-e", "v1 + v1"]);
    assert_eq!((yes["verdict"].as_str(), yes["holds"].as_bool()), (Some("yes"), Some(true)));
    let no = json(&["consequence", "--premise", "v1 + v1", "-e", "v1"]);
    assert_eq!(no["verdict"], "no");
    assert_eq!(no["witness"], serde_json::json!(["1/2"]));

    assert_eq!(json(&["consistent", "--premise", "v1", "--premise", "~v1"])["consistent"], false);
    let model = json(&["consistent", "--premise", "v1 + v2", "--premise", "~v1"]);
    assert_eq!(model["model"], serde_json::json!(["0", "1"]));
}

#[test]
fn limit_check_modes() {
    let rate = json(&["limit-check", "--sequence", "ramp.json", "-e", "v1", "--rate", "--upto", "30"]);
    assert_eq!(rate["holds"], true);
    assert_eq!(rate["entries"][29]["delta"], "1/1073741824");
    let wrong = json(&["limit-check", "--sequence", "ramp.json", "-e", "~v1", "--rate", "--upto", "5"]);
    assert_eq!(wrong["holds"], false);
    assert!(wrong["entries"].as_array().unwrap().iter().all(|e| e["holds"] == false));
    let threshold = json(&["limit-check", "--sequence", "ramp.json", "-e", "v1", "--threshold", "3/4", "--upto", "6"]);
    assert_eq!(threshold["from"], 2);

    let csv = ok(&["limit-check", "--sequence", "ramp.json", "-e", "v1", "--rate", "--upto", "2", "--format", "csv"]);
    assert_eq!(csv, "n,delta,bound,holds\n1,1/2,1/2,true\n2,1/4,1/4,true\n");
}

#[test]
fn sandwich_and_enclosures_track_the_irrational_scalar() {
    let s = json(&["sandwich", "-e", SQRT_EXAMPLE, "--precision", "10"]);
    let width: Vec<i64> = s["width"].as_str().unwrap().split('/').map(|x| x.parse().unwrap()).collect();
    assert!(width[0] * 1024 <= width[1], "width {} exceeds 2^-10", s["width"]);

    let z = json(&["zeroset", "-f", "nonmv.json", "--precision", "10"]);
    assert_eq!(z["kind"], "enclosure");
    let m = json(&["mvgen", "-f", "nonmv.json", "--precision", "6"]);
    assert_eq!(m["verdict"], "unknown");
}

#[test]
fn approximation_reports_the_grid_bound() {
    let a = json(&["approx", "-f", "square_samples.json"]);
    assert_eq!(a["bound"], "1/2");
    assert_eq!(a["cells"], 4);
}

#[test]
fn duality_verbs() {
    assert_eq!(
        json(&["zeroset", "-e", "~(v1 + v1)"])["polyhedron"],
        serde_json::json!({"dim": 1, "simplices": [[["1/2"], ["1"]]]})
    );

    // present, then read the presentation back and recover the polyhedron
    let pres = ok(&["present", "-f", "half_interval.json"]);
    let path = temp_path("presentation.json");
    std::fs::write(&path, &pres).unwrap();
    let z = json(&["zeroset", "-f", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(z["polyhedron"], serde_json::json!({"dim": 1, "simplices": [[["1/2"], ["1"]]]}));

    let m = json(&["mvgen", "-f", "halving.json"]);
    assert_eq!(m["k"], "2");
    assert_eq!(m["certificate"], serde_json::json!({"below": true, "dominated": true, "integer": true}));
    assert_eq!(m["generator"]["pieces"], serde_json::json!([{"c": ["1"], "b": "0"}]));

    assert_eq!(json(&["extend", "-e", "~(v1 + v1)", "--to", "RMV"])["class"], "RMV");
    assert_eq!(json(&["subst-check", "-f", "subst_ok.json"]), serde_json::json!({"mv_preserving": true}));
    assert_eq!(json(&["subst-check", "-f", "subst_bad.json"])["offender"], "v2");
    assert_eq!(json(&["subst-check", "-e", "[\"delta[1/2] v1\"]"])["offender"], "v1");
}

#[test]
fn dump_pwl_writes_the_compiled_function() {
    let path = temp_path("dump.json");
    ok(&["truth-degree", "-e", "delta[1/2] v1", "--dump-pwl", path.to_str().unwrap()]);
    let dump: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_schema("pwl", &dump);
    assert_eq!(dump["pieces"], serde_json::json!([{"c": ["1/2"], "b": "0"}]));
}

#[test]
fn exit_codes() {
    let syntax = luka(&["truth-degree", "-e", "v1 +"]);
    assert_eq!(syntax.code, 1);
    assert!(syntax.stderr.contains("line 1, column 5"), "{}", syntax.stderr);
    assert!(syntax.stdout.is_empty());

    assert_eq!(luka(&["truth-degree", "-e", "delta[3/2] v1"]).code, 1);
    assert_eq!(luka(&["extend", "-f", "halving.json", "--to", "MV"]).code, 1);
    assert_eq!(luka(&["limit-check", "--sequence", "missing.json", "-e", "v1", "--rate"]).code, 1);
    assert_eq!(luka(&["selftest", "--suite", "nonsense"]).code, 1);
    assert_eq!(luka(&["no-such-verb"]).code, 1);
    assert_eq!(luka(&["truth-degree"]).code, 1);

    let capped = luka(&["truth-degree", "-e", "(v1 + v2 + v3) -> (delta[1/3] v1 + delta[1/5] v2)", "--cap", "10"]);
    assert_eq!(capped.code, 2, "{}", capped.stderr);
    assert!(capped.stderr.contains("cap"));

    assert_eq!(luka(&["--help"]).code, 0);
}
