use std::path::PathBuf;

use fairwelfare::cli::{AuditReport, Checked};
use fairwelfare::core::experiments::{Comparison, DesignerOutcome, DivergenceReport, Example1Report, SweepReport};
use fairwelfare::report::{round_significant, to_json, SWEEP_COLUMNS};
use fairwelfare::run;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn suite() -> Vec<String> {
    [
        "shifted_match",
        "costly_false_positive",
        "costly_false_negative",
        "treatment_cost",
        "reversed_types",
    ]
    .iter()
    .map(|n| fixture(&format!("nontrivial_suite/{n}.scenario")))
    .collect()
}

fn ok(args: &[&str]) -> String {
    let mut argv = vec!["fairwelfare"];
    argv.extend_from_slice(args);
    let out = run(argv);
    assert_eq!(out.code, 0, "{args:?}: {}", out.stderr);
    out.stdout
}

fn code(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["fairwelfare"];
    argv.extend_from_slice(args);
    let out = run(argv);
    (out.code, out.stderr)
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

/// Parsing a rendered report and rendering it again gives the same bytes.
fn fixed_point<T: Serialize + DeserializeOwned>(text: &str) -> T {
    let report: T = serde_json::from_str(text).unwrap();
    assert_eq!(to_json(&report), text);
    report
}

#[test]
fn example1_report_values() {
    let text = ok(&["example1", "--delta", "0.75", "--phi", "power:0.5"]);
    let v = json(&text);
    for key in ["sw_welfare", "co_welfare", "jensen_bound", "gap", "violation"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["sw_welfare"].as_f64().unwrap() - 0.75f64.sqrt()).abs() < 1e-9);
    assert!((v["jensen_bound"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    assert!((v["violation"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let report: Checked<Example1Report> = fixed_point(&text);
    assert!(report.grid_checks.is_none());
}

#[test]
fn rendered_numbers_have_twelve_significant_digits() {
    let v = json(&ok(&["example1", "--delta", "0.75", "--phi", "power:0.5"]));
    let jensen = v["jensen_bound"].as_f64().unwrap();
    assert_eq!(jensen, round_significant(0.5f64.sqrt()));
    assert_eq!(jensen.to_string(), "0.707106781187");
}

#[test]
fn every_command_is_deterministic() {
    let example = fixture("example1.scenario");
    let diverge = &suite()[1];
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("policy.json");
    std::fs::write(&policy, r#"{"rows": {"0": {"0": 0.3, "1": 0.7}, "1": {"1": 1}}}"#).unwrap();
    let policy = policy.to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["example1", "--delta", "0.6", "--phi", "negpow:2"],
        vec!["compare", &example],
        vec!["audit", &example, "--policy", &policy],
        vec!["diverge", diverge],
        vec!["sweep", "--count", "4", "--seed", "3"],
    ];
    for args in commands {
        for format in ["json", "csv"] {
            let mut with_format = args.clone();
            with_format.extend(["--format", format]);
            assert_eq!(ok(&with_format), ok(&with_format), "{with_format:?}");
        }
    }
}

#[test]
fn reports_are_json_fixed_points() {
    let example = fixture("example1.scenario");
    let _: Checked<Example1Report> =
        fixed_point(&ok(&["example1", "--delta", "0.9", "--phi", "log:0.5", "--grid-check"]));
    let _: Comparison = fixed_point(&ok(&["compare", &example, "--grid-check"]));
    let _: Checked<DivergenceReport> = fixed_point(&ok(&["diverge", &suite()[4], "--grid-check"]));
    let _: SweepReport = fixed_point(&ok(&["sweep", "--count", "3", "--phi", "negpow:2"]));
}

#[test]
fn audit_of_a_constant_policy() {
    let dir = tempfile::tempdir().unwrap();
    let policy = dir.path().join("constant.json");
    std::fs::write(
        &policy,
        r#"{"rows": {"0": {"0": 0.4, "1": 0.6}, "1": {"0": 0.4, "1": 0.6}}}"#,
    )
    .unwrap();
    let text = ok(&[
        "audit",
        &fixture("example1.scenario"),
        "--policy",
        policy.to_str().unwrap(),
    ]);
    let report: AuditReport = fixed_point(&text);
    assert_eq!(report.violations.len(), 4);
    for (kind, v) in &report.violations {
        assert_eq!(*v, Some(0.0), "{kind}");
    }
    // Both groups get utility 0.75·0.4 + 0.25·0.6 and 0.75·0.6 + 0.25·0.4.
    let (u0, u1): (f64, f64) = (0.75 * 0.4 + 0.25 * 0.6, 0.75 * 0.6 + 0.25 * 0.4);
    let expected = (0.5 * u0 + 0.5 * u1).sqrt() - 0.5 * u0.sqrt() - 0.5 * u1.sqrt();
    assert!((report.jensen_gap.unwrap() - expected).abs() < 1e-11);
}

#[test]
fn diverge_with_a_trivial_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trivial.scenario");
    let text = std::fs::read_to_string(fixture("nontrivial_suite/shifted_match.scenario"))
        .unwrap()
        .replace("\"value\": 2.0", "\"value\": 1.0");
    std::fs::write(&path, text).unwrap();
    let (c, stderr) = code(&["diverge", path.to_str().unwrap()]);
    assert_eq!(c, 1);
    assert!(stderr.contains("trivial"), "{stderr}");
}

#[test]
fn grid_check_within_bound_on_every_fixture() {
    for name in ["example1.scenario", "shared_majority_agreement.scenario"] {
        let v = json(&ok(&["compare", &fixture(name), "--grid-check"]));
        for outcome in v["outcomes"].as_array().unwrap() {
            let g = &outcome["grid_check"];
            assert_eq!(g["within_bound"], Value::Bool(true), "{name}: {g}");
            assert!(g["discrepancy"].as_f64().unwrap() <= g["bound"].as_f64().unwrap() + 1e-9);
        }
    }
    for path in suite() {
        let v = json(&ok(&["diverge", &path, "--grid-check"]));
        let checks = v["grid_checks"].as_array().unwrap();
        assert_eq!(checks.len(), 2);
        for g in checks {
            assert_eq!(g["within_bound"], Value::Bool(true), "{path}: {g}");
        }
    }
}

#[test]
fn agreement_fixture_does_not_diverge() {
    let v = json(&ok(&["compare", &fixture("shared_majority_agreement.scenario")]));
    assert_eq!(v["diverged"], Value::Bool(false));
    assert!(v["tv_distance"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn solve_needs_exactly_one_designer() {
    let (c, stderr) = code(&["solve", &fixture("example1.scenario")]);
    assert_eq!(c, 1);
    assert!(stderr.contains("exactly 1 designer"), "{stderr}");
}

#[test]
fn solve_single_designer_with_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("one.scenario");
    let text = std::fs::read_to_string(fixture("example1.scenario")).unwrap();
    let mut doc = json(&text);
    doc["designers"].as_array_mut().unwrap().remove(0);
    std::fs::write(&scenario, doc.to_string()).unwrap();
    let out = dir.path().join("report.json");
    let printed = ok(&[
        "solve",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid-check",
    ]);
    assert!(printed.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    let outcome: DesignerOutcome = fixed_point(&written);
    assert!((outcome.result.objective_value - 0.75f64.sqrt()).abs() < 1e-9);
    assert!(outcome.grid_check.unwrap().within_bound);
}

#[test]
fn enumeration_over_the_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("big.scenario");
    let three = ["a", "b", "c"];
    let population: Vec<Value> = three
        .iter()
        .map(|x| serde_json::json!({"x": x, "y": "0", "g": "0", "mass": 1.0 / 3.0}))
        .collect();
    let doc = serde_json::json!({
        "alphabets": {"covariates": three, "types": ["0"], "groups": ["0"], "decisions": three},
        "population": population,
        "utility": {"default": 1.0, "entries": []},
        "designers": [{"type": "welfare", "phi": "identity"}]
    });
    std::fs::write(&scenario, doc.to_string()).unwrap();
    let path = scenario.to_str().unwrap();
    ok(&["solve", path]);
    let (c, stderr) = code(&["solve", path, "--grid-check"]);
    assert_eq!(c, 2, "{stderr}");
    assert!(stderr.contains("cap"), "{stderr}");
}

#[test]
fn invalid_scenarios_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    std::fs::write(&path, "{\"alphabets\": }").unwrap();
    let (c, stderr) = code(&["compare", path.to_str().unwrap()]);
    assert_eq!(c, 1);
    assert!(stderr.contains("line 1"), "{stderr}");
    assert_eq!(code(&["compare", "/nonexistent/file.scenario"]).0, 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&["bogus"]).0, 1);
    assert_eq!(
        code(&["example1", "--delta", "0.75", "--phi", "power:0.5", "--bogus"]).0,
        1
    );
    assert_eq!(code(&["example1", "--delta", "0.4", "--phi", "identity"]).0, 1);
    assert_eq!(code(&["sweep", "--count", "2", "--sizes", "2,2"]).0, 1);
    assert_eq!(
        code(&["example1", "--delta", "0.75", "--phi", "power:0.5", "--format", "xml"]).0,
        1
    );
}

#[test]
fn sweep_csv_layout() {
    let empty = ok(&["sweep", "--count", "0", "--format", "csv"]);
    assert_eq!(empty, format!("{}\n", SWEEP_COLUMNS.join(",")));
    let text = ok(&["sweep", "--count", "5", "--seed", "1", "--format", "csv"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1].split(',').next(), Some("0"));
    assert_ne!(text, ok(&["sweep", "--count", "5", "--seed", "2", "--format", "csv"]));
}

#[test]
fn sweep_seed_defaults_to_zero() {
    assert_eq!(
        ok(&["sweep", "--count", "3"]),
        ok(&["sweep", "--count", "3", "--seed", "0"])
    );
}

#[test]
fn key_value_csv_is_sorted() {
    let text = ok(&["example1", "--delta", "0.75", "--phi", "identity", "--format", "csv"]);
    let keys: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("\ngap,0.25\n"), "{text}");
}
