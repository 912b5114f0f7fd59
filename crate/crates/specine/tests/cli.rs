//! Drives the installed binary end to end: argument parsing, exit codes,
//! stdout tables, and the files a run leaves behind.

use std::path::Path;
use std::process::{Command, Output};

use specine::bench::{save_dataset, Dataset, DatasetEntry};
use specine::core::{Problem, TestCase};
use specine::llm::ScriptedScenario;

fn specine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specine"))
        .args(args)
        .output()
        .expect("binary spawns")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn sum_problem() -> Problem {
    Problem {
        id: "sum-two".into(),
        title: None,
        spec_text: "Read two integers on one line and print their sum.".into(),
        public_tests: vec![TestCase::public("1 2", "3"), TestCase::public("5 7", "12")],
        private_tests: vec![TestCase::public("100 1", "101")],
        difficulty: None,
    }
}

fn write_dataset(path: &Path) {
    let dataset = Dataset {
        entries: vec![DatasetEntry {
            problem: sum_problem(),
            canonical_solution: Some("read a b\necho $((a + b))".into()),
        }],
    };
    save_dataset(path, &dataset).unwrap();
}

fn correct_sum() -> &'static str {
    "```sh\nread a b\necho $((a + b))\n```"
}

fn broken_sum() -> &'static str {
    "```sh\nread a b\necho $((a - b))\n```"
}

fn tester_reply() -> &'static str {
    "TEST:\nINPUT:\n2 2\nOUTPUT:\n4\nTEST:\nINPUT:\n0 0\nOUTPUT:\n0\nTEST:\nINPUT:\n9 1\nOUTPUT:\n10\nTEST:\nINPUT:\n3 4\nOUTPUT:\n7\nTEST:\nINPUT:\n8 8\nOUTPUT:\n16\n"
}

/// One alignment iteration: the first program subtracts, the amended
/// statement fixes it.
fn write_aligning_scenario(path: &Path) {
    ScriptedScenario::new()
        .script("coder", 0, [broken_sum()])
        .script("tester", 0, [tester_reply()])
        .script("lifter", 1, ["PURPOSE:\nprints the difference of two integers\n"])
        .script("aligner", 1, ["INGREDIENT: Output Requirements\nPrint the sum of the two integers.\n"])
        .script("coder", 1, [correct_sum()])
        .save(path)
        .unwrap();
}

/// The first program is already right, for variants that skip agents.
fn write_immediate_scenario(path: &Path) {
    ScriptedScenario::new()
        .script("coder", 0, [correct_sum()])
        .script("tester", 0, [tester_reply()])
        .save(path)
        .unwrap();
}

fn run_fixture(dir: &Path, out_name: &str, extra: &[&str]) -> Output {
    let dataset = dir.join("problems.jsonl");
    let scenario = dir.join("scenario.json");
    write_dataset(&dataset);
    write_aligning_scenario(&scenario);
    let out = dir.join(out_name);
    let mut args = vec![
        "run",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--backend",
        "scripted",
        "--scenario",
        scenario.to_str().unwrap(),
        "--lang",
        "sh",
    ];
    args.extend_from_slice(extra);
    specine(&args)
}

#[test]
fn run_writes_a_complete_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_fixture(dir.path(), "run", &[]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    assert!(
        stdout(&output).contains("full: 1 problems, 1 solved"),
        "stdout: {}",
        stdout(&output)
    );

    let out = dir.path().join("run");
    for file in [
        "manifest.json",
        "traces/sum-two.trace.json",
        "reports/summary.json",
        "reports/per_problem.csv",
        "reports/rule_effectiveness.csv",
        "reports/timing.json",
        "cache/responses.bin",
    ] {
        assert!(out.join(file).exists(), "missing {file}");
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["backend"], "scripted");
    assert_eq!(manifest["config"]["variant"], "full");
    assert_eq!(manifest["dataset"]["problems"], 1);
    assert_eq!(manifest["dataset"]["name"], "problems");
    assert_eq!(manifest["dataset"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn run_records_the_chosen_variant_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("problems.jsonl");
    let scenario = dir.path().join("scenario.json");
    write_dataset(&dataset);
    write_immediate_scenario(&scenario);
    let out = dir.path().join("run");
    let output = specine(&[
        "run",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--backend",
        "scripted",
        "--scenario",
        scenario.to_str().unwrap(),
        "--lang",
        "sh",
        "--variant",
        "woT",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("woT: 1 problems"), "stdout: {}", stdout(&output));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["variant"], "woT");
}

#[test]
fn missing_dataset_fails_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let output = specine(&[
        "run",
        "--dataset",
        dir.path().join("absent.jsonl").to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
        "--backend",
        "scripted",
        "--scenario",
        dir.path().join("scenario.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("cannot read dataset"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn unknown_variant_fails_argument_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let output = specine(&[
        "run",
        "--dataset",
        dir.path().join("d.jsonl").to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
        "--variant",
        "nope",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!output.status.success());
}

#[test]
fn trace_renders_the_recorded_timeline() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_fixture(dir.path(), "run", &[]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));

    let output = specine(&[
        "trace",
        dir.path().join("run").to_str().unwrap(),
        "--problem",
        "sum-two",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("problem sum-two"), "stdout: {text}");
    assert!(text.contains("gate failed: entering alignment"), "stdout: {text}");
    assert!(text.contains("retained"), "stdout: {text}");

    let missing = specine(&[
        "trace",
        dir.path().join("run").to_str().unwrap(),
        "--problem",
        "absent",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("sum-two"), "stderr: {}", stderr(&missing));
}

#[test]
fn analyze_rules_prints_the_retention_table() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_fixture(dir.path(), "run", &[]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));

    let output = specine(&["analyze-rules", dir.path().join("run").to_str().unwrap()]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("analyzed 1 trace(s)"), "stdout: {text}");
    assert!(text.contains("rule"), "stdout: {text}");
    let retained_row = text
        .lines()
        .find(|line| line.starts_with("Output Requirements"))
        .unwrap_or_else(|| panic!("no Output Requirements row in:\n{text}"));
    assert!(retained_row.contains("100.00%"), "row: {retained_row}");
}

#[test]
fn ablate_compares_variants_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("problems.jsonl");
    let scenario = dir.path().join("scenario.json");
    write_dataset(&dataset);
    write_immediate_scenario(&scenario);
    let out = dir.path().join("ablation");
    let output = specine(&[
        "ablate",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--backend",
        "scripted",
        "--scenario",
        scenario.to_str().unwrap(),
        "--lang",
        "sh",
        "--variants",
        "full,woT",
    ]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("variant  problems  solved"), "stdout: {text}");
    assert!(text.lines().any(|l| l.starts_with("full")), "stdout: {text}");
    assert!(text.lines().any(|l| l.starts_with("woT")), "stdout: {text}");

    assert!(out.join("full/manifest.json").exists());
    assert!(out.join("woT/manifest.json").exists());
    let comparison = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(comparison.starts_with("variant,problems,solved"), "csv: {comparison}");
    assert_eq!(comparison.lines().count(), 3, "csv: {comparison}");
}

#[test]
fn replay_reruns_a_recorded_directory_offline() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_fixture(dir.path(), "first", &[]);
    assert!(run.status.success(), "stderr: {}", stderr(&run));

    let cache = dir.path().join("first/cache/responses.bin");
    let replay = specine(&[
        "run",
        "--dataset",
        dir.path().join("problems.jsonl").to_str().unwrap(),
        "--out",
        dir.path().join("second").to_str().unwrap(),
        "--backend",
        "replay",
        "--cache",
        cache.to_str().unwrap(),
        "--lang",
        "sh",
    ]);
    assert!(replay.status.success(), "stderr: {}", stderr(&replay));

    let first = std::fs::read(dir.path().join("first/reports/summary.json")).unwrap();
    let second = std::fs::read(dir.path().join("second/reports/summary.json")).unwrap();
    assert_eq!(first, second, "replayed summary diverged from the recorded one");
}
