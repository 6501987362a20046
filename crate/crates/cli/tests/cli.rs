use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_curvbill");

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let s = schema(schema_name);
    let v = jsonschema::validator_for(&s).unwrap();
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{}: {e}", e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

struct Run {
    code: i32,
    stderr: String,
    dir: PathBuf,
    _tmp: tempfile::TempDir,
}

fn run(cmd: &str, scene: &str, extra: &[&str]) -> Run {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("scene.json");
    std::fs::write(&spec, scene).unwrap();
    let dir = tmp.path().join("out");
    let o = Command::new(BIN)
        .arg(cmd)
        .arg("--spec")
        .arg(&spec)
        .arg("--out")
        .arg(&dir)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: o.status.code().unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
        dir,
        _tmp: tmp,
    }
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn error_json(r: &Run) -> Value {
    let e: Value = serde_json::from_str(r.stderr.trim()).unwrap();
    assert_valid("error.schema.json", &e);
    e
}

const DISK: &str = r#"{"geometry": "hyperbolic", "table": {"kind": "disk", "R": 0.1},
  "experiments": [{"kind": "simulate", "n": 0, "initial": [[0.1, 0.8]]},
                  {"kind": "bounds", "caustic": {"kind": "circle", "d": 0.05}}]}"#;

const ELLIPSE: &str = r#"{"geometry": "hyperbolic",
  "table": {"kind": "string", "caustic": {"kind": "segment", "len": 0.4}, "L": 0.2, "nodes": 2048},
  "experiments": [{"kind": "verify-caustic", "caustic": {"kind": "segment", "len": 0.4}},
                  {"kind": "portrait", "orbits": 6, "n": 50},
                  {"kind": "simulate", "n": 20, "random": 4}]}"#;

const TRIANGLE: &str = r#"{"geometry": "hyperbolic",
  "table": {"kind": "string", "caustic": {"kind": "regular-polygon", "sides": 3, "rho": 0.3}, "L": 0.2},
  "experiments": [{"kind": "hubacher", "jump": 0}]}"#;

#[test]
fn simulate_zero_steps_is_the_initial_state() {
    let r = run("simulate", DISK, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(r.dir.join("orbits.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["orbit,k,s,t,lift_s", "0,0,0.1,0.8,0.1"]);
    assert_valid("simulate.schema.json", &read_json(&r.dir.join("simulate.json")));
}

#[test]
fn bounds_on_a_disk() {
    let r = run("bounds", DISK, &["--resolution", "64"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = read_json(&r.dir.join("bounds.json"));
    assert_valid("bounds.schema.json", &doc);
    assert_eq!(doc["epsilon_infinite"], Value::Bool(false));
    assert!(doc["epsilon"]["value"].is_number());
    assert_eq!(doc["sandwich"]["holds"], Value::Bool(true));
    // ε ≈ 0.63 exceeds the inradius 0.1: nothing is deep enough
    assert!(doc["epsilon"]["value"].as_f64().unwrap() > doc["summary"]["inradius"].as_f64().unwrap());
    assert_eq!(doc["region"]["component_count"], 0);
    let pgm = std::fs::read(r.dir.join("region.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
}

#[test]
fn unit_disk_reports_infinite_sentinel() {
    let scene = r#"{"geometry": "hyperbolic", "table": {"kind": "disk", "R": 1.0}}"#;
    let r = run("bounds", scene, &["--resolution", "16"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = read_json(&r.dir.join("bounds.json"));
    assert_valid("bounds.schema.json", &doc);
    assert_eq!(doc["epsilon"]["value"], Value::Null);
    assert_eq!(doc["epsilon_infinite"], Value::Bool(true));
    assert_eq!(doc["region"]["degenerate"], "epsilon-infinite");
}

#[test]
fn large_spherical_disk_violates_hypothesis() {
    let scene = r#"{"geometry": "spherical", "table": {"kind": "disk", "R": 1.0}}"#;
    let r = run("bounds", scene, &[]);
    assert_eq!(r.code, 3);
    assert_eq!(error_json(&r)["error"], "hypothesis-violated");
}

#[test]
fn unknown_table_kind_is_a_spec_error() {
    let scene = r#"{"geometry": "hyperbolic", "table": {"kind": "ellipse", "a": 1.0}}"#;
    let r = run("simulate", scene, &[]);
    assert_eq!(r.code, 2);
    let e = error_json(&r);
    assert_eq!(e["error"], "spec");
    let ptrs: Vec<&str> = e["details"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["pointer"].as_str().unwrap())
        .collect();
    assert!(ptrs.contains(&"/table/kind"), "{ptrs:?}");
}

#[test]
fn invalid_parameter_is_a_spec_error() {
    let scene = r#"{"geometry": "spherical", "table": {"kind": "disk", "R": 2.0}}"#;
    let r = run("simulate", scene, &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(error_json(&r)["error"], "domain");
    let scene = r#"{"geometry": "hyperbolic", "table": {"kind": "string",
        "caustic": {"kind": "polygon", "vertices": [[0, 0], [0.1, 0], [0.2, 0]]}, "L": 0.1}}"#;
    let r = run("simulate", scene, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn outputs_are_deterministic() {
    let a = run("simulate", ELLIPSE, &["--seed", "7"]);
    let b = run("simulate", ELLIPSE, &["--seed", "7"]);
    let c = run("simulate", ELLIPSE, &["--seed", "8"]);
    let read = |r: &Run, f: &str| std::fs::read(r.dir.join(f)).unwrap();
    assert_eq!(read(&a, "orbits.csv"), read(&b, "orbits.csv"));
    assert_eq!(read(&a, "simulate.json"), read(&b, "simulate.json"));
    assert_ne!(read(&a, "orbits.csv"), read(&c, "orbits.csv"));
    let csv = String::from_utf8(read(&a, "orbits.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 21);
}

#[test]
fn verify_and_portrait_on_ellipse() {
    let r = run("verify-caustic", ELLIPSE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = read_json(&r.dir.join("verify-caustic.json"));
    assert_valid("caustic_report.schema.json", &doc);
    assert_eq!(doc["verified"], Value::Bool(true));

    let r = run("portrait", ELLIPSE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = std::fs::read_to_string(r.dir.join("portrait.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 6 * 51);
    let svg = std::fs::read_to_string(r.dir.join("portrait.svg")).unwrap();
    assert!(svg.contains("<!-- generator: curvbill "));
    assert_eq!(svg.matches("<circle").count(), 6 * 51);
    assert_valid("portrait.schema.json", &read_json(&r.dir.join("portrait.json")));
}

#[test]
fn tolerance_controls_the_verdict() {
    let scene = r#"{"geometry": "hyperbolic", "table": {"kind": "disk", "R": 0.5},
      "experiments": [{"kind": "verify-caustic", "caustic": {"kind": "circle", "d": 0.2}, "samples": 8}]}"#;
    let r = run("verify-caustic", scene, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = run("verify-caustic", scene, &["--tolerance", "1e-30"]);
    assert_eq!(r.code, 4);
    assert_eq!(error_json(&r)["error"], "not-verified");
}

#[test]
fn string_build_triangle() {
    let r = run("string-build", TRIANGLE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = read_json(&r.dir.join("string-build.json"));
    assert_valid("string_build.schema.json", &doc);
    assert_eq!(doc["jumps"].as_array().unwrap().len(), 6);
    let svg = std::fs::read_to_string(r.dir.join("table.svg")).unwrap();
    assert!(svg.contains("Poincare disk"));
    assert_eq!(svg.matches("<circle").count(), 6);
    let csv = std::fs::read_to_string(r.dir.join("boundary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 513);
}

#[test]
fn hubacher_on_triangle_and_disk() {
    let r = run("hubacher", TRIANGLE, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = read_json(&r.dir.join("hubacher.json"));
    assert_valid("hubacher.schema.json", &doc);
    assert_eq!(doc["status"], "evidence");
    assert!(r.dir.join("hubacher_pairs.csv").exists());

    let r = run("hubacher", DISK, &[]);
    assert_eq!(r.code, 4);
    assert_eq!(error_json(&r)["error"], "not-applicable");
    assert_valid("hubacher.schema.json", &read_json(&r.dir.join("hubacher.json")));
}

#[test]
fn bundled_scenes_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes");
    let s = schema("scene.schema.json");
    let v = jsonschema::validator_for(&s).unwrap();
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let doc = read_json(&entry.unwrap().path());
        assert!(v.is_valid(&doc));
        n += 1;
    }
    assert!(n >= 4);
}
