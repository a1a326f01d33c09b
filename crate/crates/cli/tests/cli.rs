use std::process::{Command, Output};

use serde_json::Value;

fn qtcyclic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtcyclic")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = qtcyclic(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn polytope_face_data() {
    let v = json(&["polytope", "4", "7"]);
    assert_eq!(v["faces"]["h_vector"], serde_json::json!([1, 3, 6, 3, 1]));
    assert_eq!(v["polytope"]["vertices"].as_array().unwrap().len(), 14);

    let v = json(&["polytope", "3", "6"]);
    assert_eq!(v["faces"]["h_vector"], serde_json::json!([1, 3, 3, 1]));
    assert_eq!(v["polytope"]["vertices"].as_array().unwrap().len(), 8);

    let text = stdout(&qtcyclic(&["polytope", "2", "5"]));
    assert!(text.starts_with("P_5: n = 2, m = 5, 5 vertices"), "{text}");
}

#[test]
fn enumerations() {
    let none = qtcyclic(&["enumerate", "real", "4", "8", "--format", "json"]);
    assert_eq!(none.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&none)).unwrap();
    assert_eq!(v["count"], 0);

    assert_eq!(json(&["enumerate", "real", "5", "8"])["count"], 2);

    // Hirzebruch-type λ_k with 0 ≤ k ≤ 3 on either pair of opposite sides,
    // and λ′ in both orientations; facet permutations are not applied.
    let v = json(&["enumerate", "int", "2", "4", "--bound", "3"]);
    assert_eq!(v["count"], 9);
}

#[test]
fn classify_c47() {
    let v = json(&["classify", "4", "7"]);
    assert_eq!(v["orbits"].as_array().unwrap().len(), 4);
    assert_eq!(v["ring_classes"].as_array().unwrap().len(), 4);
    assert!(v["distinction"]["pairs"].as_array().unwrap().iter().all(|p| p["outcome"] == "distinct"));
}

#[test]
fn classify_c36_indecomposable() {
    let v = json(&["classify", "3", "6", "--indecomposable", "--bound", "8"]);
    assert_eq!(v["classes"].as_array().unwrap().len(), 19);
    assert_eq!(v["orbits"].as_array().unwrap().len(), 9);
}

#[test]
fn output_is_independent_of_job_count() {
    let a = qtcyclic(&["classify", "4", "7", "--format", "json", "--jobs", "1"]);
    let b = qtcyclic(&["classify", "4", "7", "--format", "json", "--jobs", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reproduce_writes_report() {
    let path = std::env::temp_dir().join(format!("qtcyclic-table1-{}.json", std::process::id()));
    let o = qtcyclic(&["reproduce", "table1", "--format", "json", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(v[0]["recipe"], "table1");
    assert_eq!(v[0]["checks"][0]["actual"], "(60, 60)");
}

#[test]
fn reproduce_orbits_text() {
    let o = qtcyclic(&["reproduce", "c58-orbits"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("PASS orbits: 46"), "{text}");
    assert!(text.contains("PASS lifts: 64"), "{text}");
}

#[test]
fn failed_assertion_exits_one() {
    // λ_3 has the same ring as λ′_1, so the A_d separation check fails.
    let o = qtcyclic(&["reproduce", "c36-iso"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL A_d (d = 3..8) pairwise and against A_1, A_2"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["reproduce", "no-such-recipe"],
        vec!["polytope", "1", "3"],
        vec!["--moduli", "1,3", "reproduce", "table1"],
        vec!["--moduli", "17", "reproduce", "table1"],
        vec!["classify", "4", "7", "--indecomposable"],
        vec!["frobnicate"],
        vec!["--bound", "0", "enumerate", "int", "2", "4"],
    ] {
        let o = qtcyclic(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
