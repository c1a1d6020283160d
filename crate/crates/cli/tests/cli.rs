use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deltalog"))
        .args(args)
        .env_remove("DELTALOG_BUDGET")
        .stdin(Stdio::null())
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn output_schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/output.schema.json"))
        .unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_conforms(json: &str) -> serde_json::Value {
    let value: serde_json::Value = serde_json::from_str(json).unwrap_or_else(|e| panic!("{e}\n{json}"));
    let v = output_schema();
    let errors: Vec<String> = v.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{json}");
    value
}

#[test]
fn compile_contract_prints_simplified_rule() {
    let o = run(&["compile", &path("contract.ddb"), "--variant", "simplified"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("ins_Cont(x) <- ins_Sign(x), not Fail_ex(x), not ins_Fail_ex(x)."));
}

#[test]
fn compile_empty_schema() {
    let o = run(&["compile", &path("empty.ddb"), "--emit", "generated"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "");
}

#[test]
fn compile_recursive_schema_is_an_error() {
    let o = run(&["compile", &path("recursive.ddb")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("recursive"));
}

#[test]
fn parse_errors_report_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ddb");
    std::fs::write(&bad, "rule P(x) <- Q(x)\nrule R(x) <- .\n").unwrap();
    let o = run(&["compile", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.ddb:"), "{err}");
}

#[test]
fn flawed_schema_is_unsatisfiable() {
    assert_eq!(code(&run(&["validate", &path("flawed.ddb"), "--problem", "sat"])), 1);
}

#[test]
fn emp_is_not_lively_without_app_rule() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("flawed.ddb")).unwrap();
    let text: String = text
        .lines()
        .filter(|l| !l.starts_with("ic Ic3") && !l.starts_with("ic Ic5") && !l.starts_with("rule App"))
        .map(|l| format!("{l}\n"))
        .collect();
    let file = dir.path().join("step.ddb");
    std::fs::write(&file, text).unwrap();
    let o = run(&["validate", file.to_str().unwrap(), "--problem", "liveliness", "--target", "Emp"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
}

#[test]
fn validated_schema_is_satisfiable() {
    assert_eq!(code(&run(&["validate", &path("employment.ddb"), "--problem", "sat"])), 0);
}

#[test]
fn view_update_deletes_fail_ex() {
    let o = run(&["update", &path("employment.ddb"), "--problem", "view-update", "--goal", "+Cont(John)"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("[del Fail_ex(John)]"), "{}", stdout(&o));
}

#[test]
fn claire_repair_in_json() {
    let o = run(&["update", &path("employment.ddb"), "--problem", "ic-maintain", "--txn", "+App(Claire)", "--json"]);
    assert_eq!(code(&o), 0);
    let v = assert_conforms(&stdout(&o));
    let events = &v["results"][0]["witnesses"]["items"][0]["events"];
    assert_eq!(events, &serde_json::json!(["+App(Claire)", "+Has_account(Claire)"]));
}

#[test]
fn monitor_on_empty_transaction() {
    let o = run(&["update", &path("employment.ddb"), "--problem", "monitor", "--txn", ""]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "monitor: holds\n");
}

#[test]
fn malformed_goal_exits_two() {
    let o = run(&["update", &path("employment.ddb"), "--problem", "view-update", "--goal", "+Cont(("]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_all_targets_in_json() {
    for problem in ["sat", "abs-redundancy", "liveliness", "rel-redundancy", "condition"] {
        let o = run(&["validate", &path("employment.ddb"), "--problem", problem, "--json"]);
        assert!([0, 1].contains(&code(&o)), "{problem}");
        assert_conforms(&stdout(&o));
    }
}

#[test]
fn deduce_and_abduce_conform_to_schema() {
    let o = run(&["deduce", &path("contract.ddb"), "--goal", "+Cont(x)", "--txn", "-Fail_ex(John)", "--json"]);
    assert_eq!(code(&o), 0);
    let v = assert_conforms(&stdout(&o));
    assert_eq!(v["results"][0]["witnesses"]["items"], serde_json::json!([{ "x": "John" }]));
    let o = run(&["abduce", &path("lamp.ddb"), "--goal", "+Faulty_lamp", "--json"]);
    assert_eq!(code(&o), 0);
    assert_conforms(&stdout(&o));
    let o = run(&["update", &path("employment.ddb"), "--problem", "refresh", "--txn", "-Fail_ex(John)", "--views", "Cont", "--json"]);
    assert_conforms(&stdout(&o));
}

#[test]
fn select_first_keeps_one_transaction() {
    let o = run(&["abduce", &path("lamp.ddb"), "--goal", "+Faulty_lamp", "--select", "first"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2, "{}", stdout(&o));
}

#[test]
fn interactive_without_a_terminal_lists_all() {
    let all = run(&["abduce", &path("lamp.ddb"), "--goal", "+Faulty_lamp"]);
    let interactive = run(&["abduce", &path("lamp.ddb"), "--goal", "+Faulty_lamp", "--select", "interactive"]);
    assert_eq!(all.stdout, interactive.stdout);
}

#[test]
fn budget_exhaustion_exits_three() {
    let o = run(&["validate", &path("flawed.ddb"), "--problem", "sat", "--max-depth", "1"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert_eq!(stdout(&o), "sat: unknown-budget (depth-limit)\n");
}

#[test]
fn solution_limit_still_proves_existence() {
    let o = run(&["abduce", &path("lamp.ddb"), "--goal", "+Faulty_lamp", "--max-solutions", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("solve: holds (solution-limit)"), "{}", stdout(&o));
}

#[test]
fn budget_from_environment() {
    let with_env = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_deltalog"))
            .args(["validate", &path("flawed.ddb"), "--problem", "sat"])
            .env("DELTALOG_BUDGET", value)
            .output()
            .unwrap()
    };
    assert_eq!(code(&with_env("1,32,2")), 3);
    assert_eq!(code(&with_env("64,32,2")), 1);
    assert_eq!(code(&with_env("nonsense")), 2);
}

#[test]
fn trace_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let o = run(&["abduce", &path("contract.ddb"), "--goal", "+Cont(John)", "--trace", trace.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.lines().any(|l| l.starts_with("bound")), "{text}");
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["validate", &path("employment.ddb"), "--problem", "liveliness", "--json"];
    let first = run(&args);
    for _ in 0..3 {
        assert_eq!(run(&args).stdout, first.stdout);
    }
}
