use std::path::{Path, PathBuf};
use std::process::Command;

use scurve_cli::plot::Plot;
use scurve_core::scurve::SCurveSolution;
use scurve_core::C64;
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: Value,
    stderr: Value,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_scurve")).args(args).output().unwrap();
    let parse = |b: &[u8]| {
        let s = String::from_utf8_lossy(b);
        serde_json::from_str(s.trim()).unwrap_or(Value::Null)
    };
    Run {
        code: out.status.code().unwrap(),
        stdout: parse(&out.stdout),
        stderr: parse(&out.stderr),
    }
}

fn put(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const QUAD: &str = r#"{"V": [[0,0],[0,0],[1,0]], "partition": [[1,2]]}"#;

fn solve_quad(dir: &TempDir, extra: &[&str]) -> (Run, PathBuf) {
    let spec = put(dir.path(), "quad.json", QUAD);
    let out = dir.path().join("out");
    let mut args = vec!["solve", "--spec", s(&spec), "--out", s(&out)];
    args.extend_from_slice(extra);
    (run(&args), out)
}

#[test]
fn solve_quadratic_is_certified() {
    let dir = TempDir::new().unwrap();
    let (r, out) = solve_quad(&dir, &["--svg"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout["status"], "certified");
    let sol: SCurveSolution = serde_json::from_str(&std::fs::read_to_string(out.join("solution.json")).unwrap()).unwrap();
    let want = [-2.0, 0.0, 1.0];
    for (k, w) in want.iter().enumerate() {
        assert!((sol.r.coeff(k) - C64::new(*w, 0.0)).norm() < 1e-6);
    }
    let svg = std::fs::read_to_string(out.join("solution.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("viewBox"));
}

#[test]
fn crossing_partition_is_a_diagnosed_input_error() {
    let dir = TempDir::new().unwrap();
    let spec = put(dir.path(), "x.json", r#"{"V": [[0,0],[0,0],[0,0],[0,0],[0.25,0]], "partition": [[1,3],[2,4]]}"#);
    let r = run(&["solve", "--spec", s(&spec), "--out", s(dir.path())]);
    assert_eq!(r.code, 1);
    assert_eq!(r.stderr["kind"], "crossing_partition");
    assert!(!dir.path().join("solution.json").exists());
}

#[test]
fn invalid_fields_and_unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    for (body, kind) in [
        (r#"{"V": [[0,0],[1,0]], "partition": [[1]]}"#, "invalid_field"),
        (r#"{"V": [[0,0],[0,0],[1,0]], "partition": [[1,2]], "bogus": 1}"#, "schema"),
        (r#"{"schema": "scurve/0", "V": [[0,0],[0,0],[1,0]], "partition": [[1,2]]}"#, "schema"),
    ] {
        let spec = put(dir.path(), "bad.json", body);
        let r = run(&["solve", "--spec", s(&spec), "--out", s(dir.path())]);
        assert_eq!(r.code, 1, "{body}");
        assert_eq!(r.stderr["kind"], kind, "{body}");
    }
    let r = run(&["solve", "--spec", s(&dir.path().join("missing.json"))]);
    assert_eq!((r.code, r.stderr["kind"].as_str()), (1, Some("io")));
}

#[test]
fn unfinished_ascent_exits_two_with_partial_output() {
    let dir = TempDir::new().unwrap();
    let spec = put(
        dir.path(),
        "cubic.json",
        r#"{"V": [[0,0],[0,0],[0,0],[0.3333333333333333,0]], "partition": [[1,2]], "params": {"max_iter": 1, "restarts": 1}}"#,
    );
    let out = dir.path().join("out");
    let r = run(&["solve", "--spec", s(&spec), "--out", s(&out)]);
    assert_eq!(r.code, 2);
    assert_eq!(r.stdout["status"], "not_converged");
    assert!(out.join("solution.json").exists());
}

#[test]
fn cubic_with_restarts_never_fails_silently() {
    let dir = TempDir::new().unwrap();
    let spec = put(
        dir.path(),
        "cubic.json",
        r#"{"V": [[0,0],[0,0],[0,0],[0.3333333333333333,0]], "partition": [[1,2]], "params": {"restarts": 3}}"#,
    );
    let out = dir.path().join("out");
    let r = run(&["solve", "--spec", s(&spec), "--out", s(&out)]);
    assert!(r.code == 0 || r.code == 2);
    let status = r.stdout["status"].as_str().unwrap();
    assert_eq!(r.code == 0, status == "certified");
    assert!(out.join("solution.json").exists());
}

#[test]
fn seeds_come_from_the_spec_hash_unless_overridden() {
    let dir = TempDir::new().unwrap();
    let (a, _) = solve_quad(&dir, &[]);
    // same spec, different formatting
    let spec = put(dir.path(), "quad2.json", "{ \"partition\": [[1, 2]],\n  \"V\": [[0,0],[0,0],[1,0]] }");
    let b = run(&["solve", "--spec", s(&spec), "--out", s(&dir.path().join("b"))]);
    assert_eq!(a.stdout["seed"], b.stdout["seed"]);
    let (c, _) = solve_quad(&dir, &["--seed", "7"]);
    assert_eq!(c.stdout["seed"], 7);
    assert_ne!(a.stdout["seed"], 7);
}

#[test]
fn check_confirms_a_fresh_solution_exactly() {
    let dir = TempDir::new().unwrap();
    let (_, out) = solve_quad(&dir, &[]);
    let r = run(&["check", "--spec", s(&out.join("solution.json"))]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout["flags"], Value::Array(vec![]));
    assert_eq!(r.stdout["within_tolerance"], true);
    for k in ["el", "criticality", "algebraic", "s_property"] {
        let a = r.stdout["stored"][k].as_f64().unwrap();
        let b = r.stdout["recomputed"][k].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-10, "{k}: {a} vs {b}");
    }
}

#[test]
fn check_flags_a_corrupted_weight_vector() {
    let dir = TempDir::new().unwrap();
    let (_, out) = solve_quad(&dir, &[]);
    let path = out.join("solution.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // move half the mass of the middle node to the first one; total unchanged
    let w = doc["mu"]["weights"].as_array_mut().unwrap();
    let (first, mid) = (0, w.len() / 2);
    let m = w[mid].as_f64().unwrap();
    w[first] = Value::from(w[first].as_f64().unwrap() + 0.5 * m);
    w[mid] = Value::from(0.5 * m);
    let bad = put(dir.path(), "bad.json", &doc.to_string());
    let r = run(&["check", "--spec", s(&bad)]);
    assert_eq!(r.code, 2, "{}", r.stdout);
    let flags: Vec<&str> = r.stdout["flags"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    assert!(flags.contains(&"el"), "{flags:?}");
}

#[test]
fn check_rejects_truncated_and_foreign_files() {
    let dir = TempDir::new().unwrap();
    let (_, out) = solve_quad(&dir, &[]);
    let text = std::fs::read_to_string(out.join("solution.json")).unwrap();
    let cut = put(dir.path(), "cut.json", &text[..text.len() / 2]);
    let r = run(&["check", "--spec", s(&cut)]);
    assert_eq!((r.code, r.stderr["kind"].as_str()), (1, Some("schema")));
    let other = put(dir.path(), "other.json", &text.replacen("scurve/1", "scurve/9", 1));
    let r = run(&["check", "--spec", s(&other)]);
    assert_eq!((r.code, r.stderr["kind"].as_str()), (1, Some("schema")));
}

#[test]
fn trace_quadratic_differential() {
    let dir = TempDir::new().unwrap();
    let spec = put(dir.path(), "r.json", r#"{"R": [[-2,0],[0,0],[1,0]]}"#);
    let r = run(&["trace", "--spec", s(&spec), "--out", s(dir.path())]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout["bounded"], 1);
    assert_eq!(r.stdout["trajectories"], 5);
    assert_eq!(r.stdout["infinity_directions"].as_array().unwrap().len(), 4);
    let svg = std::fs::read_to_string(dir.path().join("trace.svg")).unwrap();
    // two zeros marked, four directions annotated
    assert_eq!(svg.matches("<circle").count(), 2);
    assert_eq!(svg.matches("∞").count(), 4);
}

#[test]
fn trace_constant_differential_draws_vertical_lines() {
    let dir = TempDir::new().unwrap();
    let spec = put(dir.path(), "one.json", r#"{"R": [[1,0]]}"#);
    let r = run(&["trace", "--spec", s(&spec), "--out", s(dir.path())]);
    assert_eq!(r.code, 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    let trajs = doc["graph"]["trajectories"].as_array().unwrap();
    assert_eq!(trajs.len(), 9);
    for t in trajs {
        let nodes = t["nodes"].as_array().unwrap();
        let x0 = nodes[0][0].as_f64().unwrap();
        assert!(nodes.iter().all(|p| (p[0].as_f64().unwrap() - x0).abs() < 1e-9));
        let ys: Vec<f64> = nodes.iter().map(|p| p[1].as_f64().unwrap()).collect();
        assert!(ys.iter().cloned().fold(f64::INFINITY, f64::min) < -1.0);
        assert!(ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) > 1.0);
    }
}

#[test]
fn trace_rejects_malformed_json() {
    let dir = TempDir::new().unwrap();
    let spec = put(dir.path(), "r.json", r#"{"R": [[-2,0],[0,0],[1,0]"#);
    let r = run(&["trace", "--spec", s(&spec), "--out", s(dir.path())]);
    assert_eq!((r.code, r.stderr["kind"].as_str()), (1, Some("schema")));
    let zero = put(dir.path(), "z.json", r#"{"R": [[0,0]]}"#);
    let r = run(&["trace", "--spec", s(&zero), "--out", s(dir.path())]);
    assert_eq!((r.code, r.stderr["kind"].as_str()), (1, Some("validation")));
}

#[test]
fn ortho_report_on_the_quadratic() {
    let dir = TempDir::new().unwrap();
    let spec = put(dir.path(), "q.json", r#"{"V": [[0,0],[0,0],[1,0]], "partition": [[1,2]], "ortho": {"degrees": [8, 16]}}"#);
    let r = run(&["ortho", "--spec", s(&spec), "--out", s(dir.path()), "--svg"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let rep = &r.stdout["report"];
    assert_eq!(rep["decreasing"], true);
    let d = rep["degrees"].as_array().unwrap();
    assert_eq!(d[0]["precision"], "f64");
    assert_eq!(d[1]["precision"], "double-double");
    for e in d {
        assert!(e["max_zero_distance"].as_f64().unwrap() < 0.5);
    }
    assert!(dir.path().join("ortho.svg").exists());
}

#[test]
fn ortho_failures_are_reported_not_hidden() {
    let dir = TempDir::new().unwrap();
    let spec = put(
        dir.path(),
        "q.json",
        r#"{"V": [[0,0],[0,0],[1,0]], "partition": [[1,2]], "ortho": {"degrees": [22], "precision": "f64"}}"#,
    );
    let r = run(&["ortho", "--spec", s(&spec), "--out", s(dir.path())]);
    assert_eq!(r.code, 2);
    let e = &r.stdout["report"]["degrees"][0];
    assert!(e["error"].as_str().unwrap().contains("ill-conditioned"), "{e}");
}

#[test]
fn plots_pad_the_view_box_by_ten_percent() {
    let mut p = Plot::new();
    p.line(&[C64::new(0.0, 0.0), C64::new(1.0, 1.0)], "black", 1.0);
    let (x, y, w, h) = p.view_box();
    let want = (-0.1, -1.1, 1.2, 1.2);
    for (a, b) in [(x, want.0), (y, want.1), (w, want.2), (h, want.3)] {
        assert!((a - b).abs() < 1e-12, "{:?}", (x, y, w, h));
    }
}
