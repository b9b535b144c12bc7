//! Black-box checks of the command-line contract: exit codes, the CSV and
//! JSON shapes, worked examples from the usage docs, and configuration
//! precedence.

use std::process::Command;

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn cfdim(args: &[&str]) -> Run {
    cfdim_with(args, &[])
}

fn cfdim_with(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cfdim"));
    cmd.args(args).env_remove("CFDIM_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).expect("utf8"),
        stderr: String::from_utf8(out.stderr).expect("utf8"),
        code: out.status.code().expect("not signalled"),
    }
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sb_emits_full_tableau_and_ordered_summaries() {
    let run = cfdim(&["--no-timestamp", "sb", "--B", "2", "--d", "1", "--t", "0", "--Mmax", "6", "--nmax", "5"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = data_rows(&run.stdout);
    let cells = rows.iter().filter(|r| r[0] == "cell").count();
    let summaries = rows.iter().filter(|r| r[0] == "summary").count();
    assert_eq!(cells, 30, "6 alphabets x 5 depths");
    assert_eq!(summaries, 1);

    let run = cfdim(&["--no-timestamp", "sb", "--B", "2,8"]);
    let values: Vec<f64> = data_rows(&run.stdout)
        .iter()
        .filter(|r| r[0] == "summary")
        .map(|r| r[5].parse().expect("value column"))
        .collect();
    assert_eq!(values.len(), 2);
    assert!(values[0] > values[1], "roots must fall as the base grows: {values:?}");
}

#[test]
fn dim_worked_examples() {
    let run = cfdim(&["--no-timestamp", "dim", "--psi", "exp(3)", "--d", "2"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = data_rows(&run.stdout);
    assert_eq!(rows[0][1], "base-finite");

    let run = cfdim(&["--no-timestamp", "dim", "--psi", "dexp(5)"]);
    let rows = data_rows(&run.stdout);
    assert_eq!(rows[0][1], "base-infinite-double-finite");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1.0 / 6.0);

    let run = cfdim(&["--no-timestamp", "dim", "--psi", "poly(1,1)"]);
    let rows = data_rows(&run.stdout);
    assert_eq!(rows[0][1], "base-one");
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn expand_matches_euclid() {
    let run = cfdim(&["--no-timestamp", "expand", "--value", "355/452"]);
    assert_eq!(run.code, 0);
    let digits: Vec<u64> = data_rows(&run.stdout)
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();
    assert_eq!(digits, vec![1, 3, 1, 1, 1, 15, 2]);
}

#[test]
fn csv_header_carries_provenance_and_timestamp_toggle() {
    let with_ts = cfdim(&["expand", "--value", "1/3"]);
    assert!(with_ts.stdout.contains("# generated_at "));
    let without = cfdim(&["--no-timestamp", "expand", "--value", "1/3"]);
    assert!(!without.stdout.contains("generated_at"));
    assert!(without.stdout.contains("# subcommand expand"));
    assert!(without.stdout.contains("# param value 1/3"));
    assert!(without.stdout.contains("# param digits 32"));
}

#[test]
fn json_embeds_config_and_result() {
    let run = cfdim(&["--no-timestamp", "--format", "json", "dim", "--psi", "dexp(5)"]);
    assert_eq!(run.code, 0);
    let doc: serde_json::Value = serde_json::from_str(&run.stdout).expect("valid json");
    assert_eq!(doc["config"]["subcommand"], "dim");
    assert_eq!(doc["config"]["parameters"]["psi"], "dexp(5)");
    assert!(doc.get("generated_at").is_none());
    assert_eq!(doc["result"]["result"]["value"].as_f64(), Some(1.0 / 6.0));
    // Infinite exponents cannot be represented as JSON numbers.
    assert!(doc["result"]["exponents"]["base"].is_null());

    let stamped = cfdim(&["--format", "json", "dim", "--psi", "dexp(5)"]);
    let doc: serde_json::Value = serde_json::from_str(&stamped.stdout).expect("valid json");
    assert!(doc["generated_at"].is_string());
}

#[test]
fn validation_failures_exit_2() {
    let missing = cfdim(&["sb"]);
    assert_eq!(missing.code, 2, "clap usage errors");

    let bad_base = cfdim(&["sb", "--B", "0.5"]);
    assert_eq!(bad_base.code, 2, "{}", bad_base.stderr);
    assert!(bad_base.stderr.contains("B > 1"), "{}", bad_base.stderr);

    let out_of_range = cfdim(&["expand", "--value", "3/2"]);
    assert_eq!(out_of_range.code, 2);

    let conflicting = cfdim(&["expand", "--value", "1/3", "--lo", "1/4", "--hi", "1/2"]);
    assert_eq!(conflicting.code, 2);

    let bad_psi = cfdim(&["dim", "--psi", "wobble(3)"]);
    assert_eq!(bad_psi.code, 2);
    let missing_table = cfdim(&["dim", "--psi", "table:/nonexistent/psi.csv"]);
    assert_eq!(missing_table.code, 2);

    let bad_env = cfdim_with(&["expand", "--value", "1/3"], &[("CFDIM_WORKERS", "soon")]);
    assert_eq!(bad_env.code, 2);
    assert!(bad_env.stderr.contains("CFDIM_WORKERS"));
}

#[test]
fn budget_failures_exit_3() {
    // 600^3 grid cells exceed the oracle's cell budget.
    let run = cfdim(&["cover", "--n", "4", "--s", "0.7", "--B", "2", "--oracle-points", "600"]);
    assert_eq!(run.code, 3, "{}", run.stderr);
    assert!(run.stderr.contains("budget"), "{}", run.stderr);
}

#[test]
fn check_suite_exit_codes() {
    let unknown = cfdim(&["check", "everything"]);
    assert_eq!(unknown.code, 2);
    assert!(unknown.stderr.contains("cf-inequalities"), "{}", unknown.stderr);

    let failing = cfdim(&["--no-timestamp", "check", "cantor-geometry"]);
    assert_eq!(failing.code, 4, "{}", failing.stderr);
    let rows = data_rows(&failing.stdout);
    assert!(rows.iter().any(|r| r[0].ends_with("gap-bound") && r[1] == "false"));
    assert!(rows.iter().any(|r| r[0].ends_with("length-sandwich") && r[1] == "true"));

    let passing = cfdim(&["--no-timestamp", "check", "sampler"]);
    assert_eq!(passing.code, 0, "{}", passing.stderr);
    assert!(data_rows(&passing.stdout).iter().all(|r| r[1] == "true"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = std::env::temp_dir().join(format!("cfdim-contract-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("defaults.toml");
    std::fs::write(&path, "seed = 9\nsamples = 30\nformat = \"json\"\n").expect("write config");
    let cfg = path.to_str().expect("utf8 path");

    let run = cfdim(&["--config", cfg, "--no-timestamp", "mc", "geomean", "--n", "40"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc: serde_json::Value = serde_json::from_str(&run.stdout).expect("config format used");
    assert_eq!(doc["config"]["parameters"]["seed"], "9");
    assert_eq!(doc["config"]["parameters"]["samples"], "30");

    let overridden = cfdim(&[
        "--config", cfg, "--no-timestamp", "--format", "csv", "mc", "geomean", "--n", "40",
        "--seed", "4",
    ]);
    assert_eq!(overridden.code, 0);
    assert!(overridden.stdout.starts_with("# cfdim"), "flag wins over config format");
    assert!(overridden.stdout.contains("# param seed 4"));

    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "wokers = 2\n").expect("write config");
    let rejected = cfdim(&["--config", bad.to_str().unwrap(), "expand", "--value", "1/3"]);
    assert_eq!(rejected.code, 2);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_flag_writes_the_report_to_disk() {
    let dir = std::env::temp_dir().join(format!("cfdim-output-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("report.csv");
    let run = cfdim(&[
        "--no-timestamp", "--output", path.to_str().unwrap(), "expand", "--value", "2/5",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(&path).expect("report written");
    assert!(text.contains("# subcommand expand"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn mc_reports_never_gate_the_exit_code() {
    // The miniature geometry report carries pass=false yet the run succeeds;
    // only check suites turn verdicts into exit codes.
    let run = cfdim(&["--no-timestamp", "mc", "cantor", "--M", "2", "--depth", "2"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("verdict,pass,false"));
}
