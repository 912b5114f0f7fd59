//! Scoring finished runs against held-out tests.
//!
//! Two problems go through the pipeline: one ends up solved, one keeps a
//! wrong program. `evaluate` judges both against their private tests and
//! reports Pass@1 next to the average pass ratio, `rule_effectiveness`
//! tallies which amendment rules survived, and `audit_generated_tests`
//! checks the tester's tests against reference solutions.
//!
//! Run with: cargo run --example evaluate_metrics

use std::collections::BTreeMap;
use std::sync::Arc;

use specine::bench::{audit_generated_tests, evaluate, rule_effectiveness, EvalConfig};
use specine::llm::{GenerationConfig, ScriptedBackend, ScriptedScenario};
use specine::sandbox::LangConfig;
use specine::{Pipeline, PipelineConfig, Problem, TestCase};

fn sum_problem(id: &str) -> Problem {
    Problem {
        id: id.into(),
        title: None,
        spec_text: "Read two integers on one line and print their sum.".into(),
        public_tests: vec![TestCase::public("1 2", "3")],
        private_tests: vec![
            TestCase::public("10 20", "30"),
            TestCase::public("0 0", "0"),
            TestCase::public("7 8", "15"),
            TestCase::public("100 1", "101"),
        ],
        difficulty: None,
    }
}

fn main() {
    let tester = "TEST:\nINPUT:\n2 2\nOUTPUT:\n4\nTEST:\nINPUT:\n9 1\nOUTPUT:\n10\n";
    let config = PipelineConfig {
        max_iterations: 1,
        lang: LangConfig::shell(),
        generation: GenerationConfig { max_retries: 0, ..GenerationConfig::default() },
        ..PipelineConfig::default()
    };

    let solved = sum_problem("sum-solved");
    let stuck = sum_problem("sum-stuck");
    let problems = [solved, stuck];

    let mut results = Vec::new();
    for (problem, replies) in problems.iter().zip([
        ScriptedScenario::new()
            .script("coder", 0, ["```sh\nread a b\necho $((a + b))\n```"])
            .script("tester", 0, [tester]),
        ScriptedScenario::new()
            .script("coder", 0, ["```sh\nread a b\necho $((a + a))\n```"])
            .script("tester", 0, [tester])
            .script("lifter", 1, ["PURPOSE:\nDouble the first integer.\n"])
            .script(
                "aligner",
                1,
                ["INGREDIENT: Output Requirements\nPrint the sum of both integers.\n"],
            )
            .script("coder", 1, ["```sh\nread a b\necho $((a * b))\n```"]),
    ]) {
        let pipeline = Pipeline::new(Arc::new(ScriptedBackend::new(replies)), config.clone());
        results.push(pipeline.run_problem(problem));
    }

    let eval_config = EvalConfig { lang: LangConfig::shell(), ..EvalConfig::default() };
    let summary = evaluate(&problems, &results, &eval_config).expect("evaluation runs");

    println!("problems: {}", summary.problems);
    println!("solved: {}", summary.solved);
    println!("pass@1: {:.2}%", summary.pass_at_1 * 100.0);
    println!("avg pass ratio: {:.2}%", summary.avg_pass_ratio * 100.0);
    println!();
    for entry in &summary.per_problem {
        println!(
            "  {:<11} {}/{} private tests, solved: {}",
            entry.problem_id, entry.passed, entry.total, entry.solved
        );
    }

    println!();
    println!("rule effectiveness (only proposed rules shown):");
    for (rule, stats) in rule_effectiveness(&results) {
        if stats.proposed > 0 {
            println!(
                "  {:<28} proposed {}, retained {}",
                rule.display_name(),
                stats.proposed,
                stats.retained
            );
        }
    }

    let solutions: BTreeMap<String, String> = problems
        .iter()
        .map(|p| (p.id.clone(), "read a b\necho $((a + b))".to_string()))
        .collect();
    let audit = audit_generated_tests(
        &results,
        &solutions,
        &LangConfig::shell(),
        &eval_config.limits,
    )
    .expect("audit runs");
    println!();
    println!(
        "generated-test audit: {}/{} tests agree with the reference solutions ({:.1}%)",
        audit.correct_tests,
        audit.audited_tests,
        audit.accuracy * 100.0
    );
}
