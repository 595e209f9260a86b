use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const WORKED: &str = "\n\n1\n1\n1\n2\n1 2\n1 2\n1 2\n1 2\n";

fn tbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn help_lists_subcommands() {
    let o = tbm(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for sub in ["mine", "fit-tbm", "fit-bm", "fit-rbm", "eval", "synth", "biasvar", "compare"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = tbm(&["mine", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn bad_sigma_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", "1 2\n");
    let o = tbm(&["mine", "--input", &input, "--sigma", "1.5", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", "1 2\n1 x\n");
    let o = tbm(&["mine", "--input", &input, "--sigma", "0.1", "--k", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let missing = dir.path().join("nope.dat");
    let o = tbm(&["mine", "--input", missing.to_str().unwrap(), "--sigma", "0.1", "--k", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn mine_prints_header_and_lexicographic_patterns() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", "2 1\n1\n3\n1 2 3\n");
    let o = tbm(&["mine", "--input", &input, "--sigma", "0.25", "--k", "2", "--out", "-"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["N"], 4);
    assert_eq!(header["n"], 4);
    assert_eq!(header["k"], 2);
    let body: Vec<&str> = lines.collect();
    assert_eq!(body, ["1", "1 2", "1 3", "2", "2 3", "3"]);
    assert_eq!(header["|B|"], body.len());
}

#[test]
fn fit_then_eval_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", WORKED);
    let model = dir.path().join("m.json");
    let m = model.to_str().unwrap();
    let o = tbm(&["fit-tbm", "--input", &input, "--keep-empty", "--sigma", "0.45", "--k", "1", "--out", m]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let saved: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(saved["schema"], 1);
    assert_eq!(saved["kind"], "tbm");
    assert_eq!(saved["domain"], serde_json::json!([[1], [2]]));
    let theta = saved["theta"][0].as_f64().unwrap();
    assert!((theta - (7.0f64 / 3.0).ln()).abs() < 1e-6);

    let o = tbm(&["eval", "--model", m, "--input", &input, "--keep-empty"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ev: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((ev["kl"].as_f64().unwrap() - 0.02416).abs() < 1e-5);
    assert!((ev["entropy"].as_f64().unwrap() - 1.2799).abs() < 1e-4);
    assert!((ev["proxy_error"].as_f64().unwrap() - ev["kl"].as_f64().unwrap()).abs() < 1e-9);
    assert!((ev["loglik"].as_f64().unwrap() + 10.0 * (0.02416 + 1.2799)).abs() < 1e-3);
}

#[test]
fn tbm_rejects_patterns_outside_its_sample_space() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", "1\n2\n");
    let other = write(dir.path(), "e.dat", "1 2 3\n");
    let model = dir.path().join("m.json");
    let m = model.to_str().unwrap();
    assert!(tbm(&["fit-tbm", "--input", &input, "--sigma", "0.1", "--k", "1", "--out", m]).status.success());
    assert_eq!(tbm(&["eval", "--model", m, "--input", &other]).status.code(), Some(3));
}

#[test]
fn all_parameters_removed_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // Item 0 occurs everywhere: its target is 1.
    let input = write(dir.path(), "d.dat", "0\n0 1\n0\n");
    let o = tbm(&["fit-tbm", "--input", &input, "--sigma", "0.9", "--k", "1"]);
    assert_eq!(o.status.code(), Some(4));
    let saved: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(saved["report"]["all_removed"], true);
}

#[test]
fn bm_and_rbm_models_round_trip_through_eval() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", WORKED);
    let bm = dir.path().join("bm.json");
    let o = tbm(&["fit-bm", "--input", &input, "--keep-empty", "--sigma", "0.45", "--k", "1", "--out", bm.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ev: Value =
        serde_json::from_str(&stdout(&tbm(&["eval", "--model", bm.to_str().unwrap(), "--input", &input, "--keep-empty"])))
            .unwrap();
    // Identifiers start at 1, so variable 0 is free in 2^V and halves every
    // probability relative to the transductive fit.
    assert!((ev["kl"].as_f64().unwrap() - 0.02416 - 2f64.ln()).abs() < 1e-5);

    let rbm = dir.path().join("rbm.json");
    let args =
        ["fit-rbm", "--input", &input, "--keep-empty", "--hidden", "2", "--updates", "200", "--seed", "3", "--out", rbm.to_str().unwrap()];
    assert!(tbm(&args).status.success());
    let first = fs::read(&rbm).unwrap();
    assert!(tbm(&args).status.success());
    assert_eq!(first, fs::read(&rbm).unwrap());
    let saved: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(saved["kind"], "rbm");
    assert_eq!(saved["weights"].as_array().unwrap().len(), 3);
    let ev: Value =
        serde_json::from_str(&stdout(&tbm(&["eval", "--model", rbm.to_str().unwrap(), "--input", &input, "--keep-empty"])))
            .unwrap();
    assert!(ev["kl"].is_null());
    assert!(ev["proxy_error"].as_f64().unwrap() >= 0.0);
}

#[test]
fn rbm_size_flags_are_exclusive() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", WORKED);
    assert_eq!(tbm(&["fit-rbm", "--input", &input]).status.code(), Some(2));
    assert_eq!(tbm(&["fit-rbm", "--input", &input, "--hidden", "2", "--match-params", "9"]).status.code(), Some(2));
}

#[test]
fn synth_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.json");
    let args = ["synth", "--n-vars", "10", "--support-size", "30", "--n", "500", "--seed", "9", "--truth", truth.to_str().unwrap()];
    let a = tbm(&args);
    let b = tbm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 500);
    let t: Value = serde_json::from_str(&fs::read_to_string(&truth).unwrap()).unwrap();
    assert_eq!(t["support"].as_array().unwrap().len(), 30);
    let other = tbm(&["synth", "--n-vars", "10", "--support-size", "30", "--n", "500", "--seed", "10"]);
    assert_ne!(a.stdout, other.stdout);
    assert_eq!(tbm(&["synth", "--n-vars", "3", "--support-size", "9"]).status.code(), Some(3));
}

#[test]
fn biasvar_writes_trial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.json");
    let args = [
        "biasvar", "--space-size", "40", "--n-vars", "8", "--sigma", "0.2", "--k", "2", "--n", "1000", "--trials", "6",
        "--seed", "4", "--summary", summary.to_str().unwrap(),
    ];
    let o = tbm(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("trial,kl_true_to_fit,kl_proj_to_fit,bound"));
    assert_eq!(lines.count(), 6);
    assert_eq!(tbm(&args).stdout, o.stdout);
    let s: Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(s["trials"], 6);
}

#[test]
fn compare_marks_bm_infeasible_on_wide_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", "0 30\n1\n0 1\n30\n0\n");
    let o = tbm(&["compare", "--input", &input, "--sigma", "0.3", "--k", "2", "--updates", "50", "--chains", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["method", "param_count", "proxy_error", "wall_time", "note"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(&rows[0][0], "tbm");
    assert_eq!(&rows[1][0], "bm");
    assert_eq!(&rows[1][2], "");
    assert!(rows[1][4].starts_with("infeasible"));
    assert_eq!(&rows[2][0], "rbm");
}

#[test]
fn compare_worked_example_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "d.dat", WORKED);
    let o = tbm(&["compare", "--input", &input, "--keep-empty", "--sigma", "0.45", "--k", "1", "--methods", "tbm,bm", "--format", "json"]);
    assert!(o.status.success());
    let rows: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["param_count"], 2);
    assert!((rows[0]["proxy_error"].as_f64().unwrap() - 0.02416).abs() < 1e-5);
}
