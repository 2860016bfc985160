//! End-to-end tests against the built binary: exit codes, JSON shapes, trace
//! replayability, and the documented failure modes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_toric-res")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join(format!("toric-res-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

/// `x1 x2 - x0^2` on the standard orthant: one blow-up resolves it.
fn e1_doc() -> String {
    json!({
        "lattice_rank": 3,
        "rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        "maximal_cones": [[0, 1, 2]],
        "charts": [{ "binomials": [{ "alpha": [0, 1, 1], "beta": [2, 0, 0] }] }]
    })
    .to_string()
}

/// The monomial curve (t^3, t^4, t^5): three generators, one chart.
fn curve_doc() -> String {
    json!({
        "lattice_rank": 3,
        "rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        "maximal_cones": [[0, 1, 2]],
        "charts": [{ "binomials": [
            { "alpha": [0, 2, 0], "beta": [1, 0, 1] },
            { "alpha": [0, 1, 1], "beta": [3, 0, 0] },
            { "alpha": [0, 0, 2], "beta": [2, 1, 0] }
        ] }]
    })
    .to_string()
}

#[test]
fn resolve_writes_a_replayable_trace() {
    let dir = workdir("resolve");
    let input = write_file(&dir, "e1.json", &e1_doc());
    let trace = dir.join("trace.json");
    let out = run(&[
        "resolve",
        "--input",
        input.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(doc["mode"], "hypersurface");
    assert_eq!(doc["steps"].as_array().unwrap().len(), 1);
    assert_eq!(doc["steps"][0]["center_ray_ids"], json!([0, 1, 2]));
    assert_eq!(doc["steps"][0]["barycentre_id"], json!(3));
    assert_eq!(doc["steps"][0]["invariant_before"]["gamma"], json!(2));
    assert_eq!(doc["final_invariant"]["gamma"], json!(1));
    assert_eq!(doc["smooth_charts"], json!([true, true, true]));
    assert_eq!(doc["steps"][0]["chart_transforms"].as_array().unwrap().len(), 3);
    assert_eq!(doc["fiber_reports"]["all_passed"], json!(true));

    // The embedded final problem must itself be a valid document.
    let final_problem = serde_json::to_string(&doc["final_problem"]).unwrap();
    let replay = write_file(&dir, "final.json", &final_problem);
    let out = run(&["validate", "--input", replay.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["valid"], json!(true));
}

#[test]
fn resolve_streams_the_trace_without_a_file() {
    let dir = workdir("stream");
    let input = write_file(&dir, "e1.json", &e1_doc());
    let out = run(&["resolve", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["steps"].as_array().unwrap().len(), 1);
    assert_eq!(doc["final_problem"]["charts"].as_array().unwrap().len(), 3);
}

#[test]
fn general_mode_is_labeled_experimental() {
    let dir = workdir("general");
    let input = write_file(&dir, "e1.json", &e1_doc());
    let out = run(&[
        "resolve",
        "--input",
        input.to_str().unwrap(),
        "--mode",
        "general",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experimental"));
    let doc = stdout_json(&out);
    assert_eq!(doc["mode"], "general");
    assert_eq!(doc["experimental"], json!(true));
    assert!(doc["smooth_charts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|s| s == &json!(true)));
}

#[test]
fn validation_failures_carry_json_pointers() {
    let dir = workdir("validate");
    let bad = json!({
        "lattice_rank": 3,
        "rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        "maximal_cones": [[0, 1, 2]],
        "charts": [{ "binomials": [{ "alpha": [0, 1, 1], "beta": [2, 1, 0] }] }]
    })
    .to_string();
    let input = write_file(&dir, "bad.json", &bad);
    let out = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let doc = stdout_json(&out);
    assert_eq!(doc["valid"], json!(false));
    assert_eq!(doc["violations"][0]["path"], json!("/charts/0/binomials/0"));
}

#[test]
fn malformed_json_fails_validation() {
    let dir = workdir("malformed");
    let input = write_file(&dir, "broken.json", "{ not json");
    let out = run(&["validate", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["valid"], json!(false));
}

#[test]
fn missing_input_is_an_io_failure() {
    let out = run(&["validate", "--input", "/nonexistent/problem.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn hasse_locus_reports_the_singular_face() {
    let dir = workdir("locus");
    let input = write_file(&dir, "e1.json", &e1_doc());
    let out = run(&["hasse-locus", "--input", input.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["gamma"], json!(2));
    assert_eq!(doc["center"], json!([0, 1, 2]));
    assert_eq!(doc["components"], json!([[0, 1, 2]]));
    assert_eq!(
        doc["chart_ideals"],
        json!([[[0, 0, 1], [0, 1, 0], [1, 0, 0]]])
    );
}

#[test]
fn standard_basis_prints_the_chart_basis() {
    let dir = workdir("basis");
    let input = write_file(&dir, "curve.json", &curve_doc());
    let out = run(&["standard-basis", "--input", input.to_str().unwrap(), "--chart", "0"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert!(!doc["nonlinear"].as_array().unwrap().is_empty());
    assert_eq!(doc["torus_rank"], json!(0));

    let out = run(&["standard-basis", "--input", input.to_str().unwrap(), "--chart", "7"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn hilbert_samuel_tabulates_the_curve() {
    let dir = workdir("hs");
    let input = write_file(&dir, "curve.json", &curve_doc());
    let out = run(&[
        "hilbert-samuel",
        "--input",
        input.to_str().unwrap(),
        "--chart",
        "0",
        "--lmax",
        "6",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["off_scheme"], json!(false));
    assert_eq!(
        doc["values"],
        json!([[0, 1], [1, 4], [2, 7], [3, 10], [4, 13], [5, 16], [6, 19]])
    );
}

#[test]
fn fiber_check_passes_on_good_inputs() {
    let dir = workdir("fiber");
    for (name, text) in [("e1.json", e1_doc()), ("curve.json", curve_doc())] {
        let input = write_file(&dir, name, &text);
        let out = run(&[
            "fiber-check",
            "--input",
            input.to_str().unwrap(),
            "--primes",
            "2,3,5",
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        let doc = stdout_json(&out);
        assert_eq!(doc["all_passed"], json!(true));
        assert_eq!(doc["reports"].as_array().unwrap().len(), 3);
    }
    let input = dir.join("e1.json");
    let out = run(&[
        "fiber-check",
        "--input",
        input.to_str().unwrap(),
        "--primes",
        "4",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exhausted_step_budget_exits_with_the_engine_code() {
    let dir = workdir("budget");
    let input = write_file(&dir, "e1.json", &e1_doc());
    let out = run(&[
        "resolve",
        "--input",
        input.to_str().unwrap(),
        "--max-steps",
        "0",
    ]);
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
