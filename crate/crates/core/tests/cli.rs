// The command-line tool driven as a subprocess: outputs, report schemas and
// exit codes.

use std::path::Path;
use std::process::{Command, Output};

use qclab::gates::GateSet;
use qclab::harness::ExperimentReport;
use qclab::mixed::MixedComplexityReport;
use serde_json::Value;
use tempfile::TempDir;

const COARSE: [&str; 6] = ["--epsilon", "0.045", "--grid", "0.3", "--budget", "400"];

fn qclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qclab"))
        .args(args)
        .env_remove("QCLAB_GATESET")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn bell_file(dir: &TempDir) -> String {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    write(
        dir,
        "bell.json",
        &format!(r#"{{"n_qubits": 2, "amplitudes": [[{s}, 0], [0, 0], [0, 0], [{s}, 0]]}}"#),
    )
}

#[test]
fn zero_state_costs_nothing() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "zero.json",
        r#"{"n_qubits": 2, "amplitudes": [[1, 0], [0, 0], [0, 0], [0, 0]]}"#,
    );
    let o = qclab(&["complexity", &f]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["complexity"], 0);
}

#[test]
fn bell_state_costs_two_under_defaults() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&["complexity", &bell_file(&dir)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["complexity"], 2);
    assert_eq!(v["parameters"]["epsilon"], 1e-4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("complexity: 2"));
}

#[test]
fn truncated_state_file_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.json", r#"{"n_qubits": 2, "amplitudes": [[1, 0], [0,"#);
    let o = qclab(&["complexity", &f]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
}

#[test]
fn unnormalized_state_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "big.json", r#"{"n_qubits": 1, "amplitudes": [[1, 0], [1, 0]]}"#);
    assert_eq!(code(&qclab(&["complexity", &f])), 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&qclab(&["frobnicate"])), 2);
    assert_eq!(code(&qclab(&["complexity"])), 2);
    assert_eq!(code(&qclab(&["--format", "xml", "experiment", "case2"])), 2);
    assert_eq!(
        code(&qclab(&["--grid", "0.9", "mixed-report", "--spectrum", "0.5,0.5"])),
        2
    );
}

#[test]
fn entry_cap_exits_four() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&["--max-entries", "3", "complexity", &bell_file(&dir)]);
    assert_eq!(code(&o), 4);
    assert_eq!(stdout_json(&o)["growth"], "capped");
    // a capped search never claims a finite value
    assert!(stdout_json(&o)["complexity"].get("exceeds_budget").is_some());
}

#[test]
fn maximally_mixed_report_has_no_uncomplexity() {
    let o = qclab(&["mixed-report", "--spectrum", "0.5,0.5"]);
    assert_eq!(code(&o), 0);
    let r: MixedComplexityReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.c_purification, qclab::oracle::Complexity::Exact(2));
    assert_eq!(r.uncomplexity, qclab::oracle::ComplexityDiff::Defined(0));
}

#[test]
fn skewed_qubit_report_is_finite_on_a_closed_table() {
    let mut args = COARSE.to_vec();
    args.extend(["mixed-report", "--spectrum", "0.7,0.3"]);
    let o = qclab(&args);
    assert_eq!(code(&o), 0);
    let r: MixedComplexityReport = serde_json::from_slice(&o.stdout).unwrap();
    for c in [r.c_purification, r.c_spectrum, r.c_basis, r.c_max_fixed_spectrum] {
        assert!(c.is_exact(), "{c}");
    }
    assert_eq!(r.checks.purification_le_c_max, Some(true));
    assert!(!r.capped);
}

#[test]
fn report_from_a_reduced_state_matches_the_density_input() {
    let dir = TempDir::new().unwrap();
    let bell = bell_file(&dir);
    let from_state = qclab(&["mixed-report", "--state", &bell, "--partition", "1,1"]);
    let mixed = write(
        &dir,
        "mixed.json",
        r#"{"n_qubits": 1, "rows": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}"#,
    );
    let from_density = qclab(&["mixed-report", "--density", &mixed]);
    assert_eq!(code(&from_state), 0);
    let (mut a, mut b) = (stdout_json(&from_state), stdout_json(&from_density));
    // the reduction carries round-off in its eigenvalues
    for (x, y) in a["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .zip(b["spectrum"].as_array().unwrap())
    {
        assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() < 1e-12);
    }
    a["spectrum"] = Value::Null;
    b["spectrum"] = Value::Null;
    assert_eq!(a, b);
}

#[test]
fn spectrum_too_large_for_partition_fails() {
    let dir = TempDir::new().unwrap();
    let s = 0.5;
    // rank-4 reduction of a 2+2 state kept on a one-qubit side
    let f = write(
        &dir,
        "wide.json",
        &format!(r#"{{"n_qubits": 2, "amplitudes": [[{s}, 0], [{s}, 0], [{s}, 0], [{s}, 0]]}}"#),
    );
    let o = qclab(&["mixed-report", "--state", &f, "--partition", "1,2"]);
    assert_ne!(code(&o), 0);
    let o = qclab(&["mixed-report", "--spectrum", "0.5,0.3,0.2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_experiment_lists_names() {
    let o = qclab(&["experiment", "nosuch"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("superadditivity-sweep") && err.contains("case1a"));
}

#[test]
fn case2_experiment_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("case2.json");
    let o = qclab(&["experiment", "case2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let line = String::from_utf8_lossy(&o.stdout);
    assert!(line.starts_with("case2: "), "{line}");
    let r: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let pair = r.records.iter().find(|x| x.label == "pairs-1-superadditivity").unwrap();
    assert_eq!(pair.values["delta_a"], 0);
    assert_eq!(pair.values["delta_b"], 0);
    let unc = r.records.iter().find(|x| x.label == "pairs-1-uncomplexity").unwrap();
    assert_eq!(unc.values["delta"], 0);
}

#[test]
fn experiment_output_is_identical_across_runs_and_workers() {
    let a = qclab(&["--workers", "1", "--seed", "5", "experiment", "case2"]);
    let b = qclab(&["--workers", "4", "--seed", "5", "experiment", "case2"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let csv = qclab(&["--seed", "5", "--format", "csv", "experiment", "case2"]);
    let text = String::from_utf8_lossy(&csv.stdout);
    assert!(text.starts_with("experiment,seed,label,verdict,gap,witness,"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn table_build_info_query() {
    let dir = TempDir::new().unwrap();
    let gs = write(
        &dir,
        "x.json",
        &GateSet::from_labels("x-only", &["X"]).unwrap().to_json(),
    );
    let table = dir.path().join("x.jsonl");
    let t = table.to_str().unwrap();

    let o = qclab(&["--gateset", &gs, "table", "build", t, "--qubits", "1"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["entries"], 2);
    assert_eq!(v["saturated"], true);

    let info = stdout_json(&qclab(&["--gateset", &gs, "table", "info", t]));
    assert_eq!(info["eccentricity"], 1);
    assert_eq!(info["entries"], 2);

    // the gate set may also come from the environment
    let env = Command::new(env!("CARGO_BIN_EXE_qclab"))
        .args(["table", "info", t])
        .env("QCLAB_GATESET", &gs)
        .output()
        .unwrap();
    assert_eq!(code(&env), 0);

    // the default gate set does not match the stored hash
    assert_eq!(code(&qclab(&["table", "info", t])), 3);
}

#[test]
fn query_bell_against_saved_default_table() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("two.jsonl");
    let t = table.to_str().unwrap();
    assert_eq!(
        code(&qclab(&["--budget", "3", "table", "build", t, "--qubits", "2"])),
        0
    );
    let o = qclab(&["--budget", "3", "table", "query", t, &bell_file(&dir)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["complexity"], 2);
    assert!(Path::new(t).exists());
}

#[test]
fn table_info_eccentricity_equals_max_pure_complexity() {
    let dir = TempDir::new().unwrap();
    let table = dir.path().join("one.jsonl");
    let t = table.to_str().unwrap();
    let mut args = COARSE.to_vec();
    args.extend(["table", "build", t, "--qubits", "1"]);
    assert_eq!(code(&qclab(&args)), 0);
    let info = stdout_json(&qclab(&["table", "info", t]));
    let loaded = qclab::oracle::ComplexityTable::load(&table, &GateSet::standard(), None).unwrap();
    assert_eq!(
        info["eccentricity"],
        serde_json::to_value(loaded.max_pure_complexity()).unwrap()
    );
    assert_eq!(info["saturated"], true);
}

#[test]
fn csv_report_for_a_single_value() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&["--format", "csv", "complexity", &bell_file(&dir)]);
    let text = String::from_utf8_lossy(&o.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "complexity,entries,growth,n_qubits,parameters");
    assert!(lines.next().unwrap().starts_with("2,"));
}
