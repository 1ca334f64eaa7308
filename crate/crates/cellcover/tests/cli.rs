use std::path::Path;

use cellcover::cli::run;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("cellcover").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = call(args);
    assert!(err.is_empty(), "{err}");
    (code, serde_json::from_str(&out).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn split_candidate_is_refuted_by_a_section() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("split.json");
    assert_eq!(call(&["construct", "split", "--q", "3", "--out", path(&file)]).0, 0);
    let (code, report) = json(&["verify", path(&file)]);
    assert_eq!(code, 0);
    assert_eq!(report["overall"]["verdict"], "not-cellular");
    assert_eq!(report["overall"]["witness"]["kind"], "split");
    assert_eq!(report["overall"]["witness"]["section"], serde_json::json!([["-1"], ["1"]]));
    assert_eq!(report["config"]["bounds"]["prime_bound"], 100);
}

#[test]
fn corrected_candidate_is_cellular() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("corrected.json");
    assert_eq!(call(&["construct", "corrected", "--q", "3", "--out", path(&file)]).0, 0);
    let (code, report) = json(&["verify", path(&file)]);
    assert_eq!(code, 0);
    assert_eq!(report["overall"]["verdict"], "cellular");
    assert_eq!(report["hom_gk"]["verdict"], "zero-proven");
    let k = format!("{}#k", path(&file));
    let g = format!("{}#g", path(&file));
    assert_eq!(json(&["hom", &g, &k]).1["hom"]["verdict"], "zero-proven");
}

#[test]
fn type_queries() {
    assert_eq!(json(&["type", "ring", "--heights", "default=0;3=inf"]).1, Value::Bool(true));
    assert_eq!(json(&["type", "ring", "--heights", "default=1;3=0"]).1, Value::Bool(false));
    let (_, cmp) = json(&["type", "cmp", "--heights", "default=0;5=2", "--other", "default=0"]);
    assert_eq!(cmp["equivalent"], true);
    assert_eq!(json(&["type", "nucleus", "--heights", "default=1;3=inf"]).1, "default=0;3=inf");
}

#[test]
fn obstruct_constant_offsets_split() {
    let (code, report) = json(&["obstruct", "--kernel-rank", "1", "--zrule", "constant:2", "--H", "nonring:exclude=2"]);
    assert_eq!(code, 0);
    assert_eq!(report["conclusion"], "split");
    assert_eq!(report["section"]["image_of_1"]["z"], serde_json::json!([2]));
}

#[test]
fn obstruct_partial_table_is_inconclusive() {
    let (code, report) = json(&["obstruct", "--kernel-rank", "1", "--zrule", "table:3=0,5=2"]);
    assert_eq!(code, 1);
    assert_eq!(report["conclusion"], "inconclusive");
}

#[test]
fn obstruct_vanishing_coordinate_maps_into_the_kernel() {
    let (code, report) = json(&["obstruct", "--kernel-rank", "1", "--zrule", "table:3=0;ext=constant:2"]);
    assert_eq!(code, 0);
    assert_eq!(report["case"]["kind"], "vanishing-coordinate");
    assert_eq!(report["conclusion"], "map-into-kernel");
    assert_eq!(report["map_into_kernel"], serde_json::json!({ "a": -6, "e": [3] }));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(call(&["bogus"]).0, 2);
    assert_eq!(call(&["obstruct", "--kernel-rank", "1", "--zrule", "nonsense"]).0, 2);
    assert_eq!(call(&["construct", "split", "--q", "4"]).0, 2);
    assert_eq!(call(&["verify", "/nonexistent/file.json"]).0, 2);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for f in [&a, &b] {
        let args = ["construct", "corner", "--kappa", "2", "--seed", "7", "--out", path(f)];
        assert_eq!(call(&args).0, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let first = call(&["verify", path(&a)]);
    let again = call(&["verify", path(&a)]);
    assert_eq!(first, again);
}

#[test]
fn budget_from_environment_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("split.json");
    call(&["construct", "split", "--q", "5", "--out", path(&file)]);
    let (_, report) = json(&["verify", path(&file), "--budget", "123456"]);
    assert_eq!(report["config"]["bounds"]["budget"], 123456);
}
