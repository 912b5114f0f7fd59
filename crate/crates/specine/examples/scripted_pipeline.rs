//! One full alignment run, end to end, with canned model replies.
//!
//! The coder first misreads "sum" as "difference". The identification stage
//! catches the failing tests, the lifter reads the misperception out of the
//! code, the aligner amends the specification, and the regenerated program
//! passes everything.
//!
//! Run with: cargo run --example scripted_pipeline

use std::sync::Arc;

use specine::llm::{GenerationConfig, ScriptedBackend, ScriptedScenario};
use specine::sandbox::LangConfig;
use specine::{Pipeline, PipelineConfig, Problem, TestCase};

fn problem() -> Problem {
    Problem {
        id: "sum-two".into(),
        title: Some("Sum of two integers".into()),
        spec_text: "Read two integers on one line and print their sum.".into(),
        public_tests: vec![TestCase::public("1 2", "3"), TestCase::public("5 7", "12")],
        private_tests: vec![TestCase::public("100 1", "101")],
        difficulty: Some("easy".into()),
    }
}

fn scenario() -> ScriptedScenario {
    let tester = "TEST:\nINPUT:\n2 2\nOUTPUT:\n4\nTEST:\nINPUT:\n0 0\nOUTPUT:\n0\nTEST:\nINPUT:\n9 1\nOUTPUT:\n10\nTEST:\nINPUT:\n3 4\nOUTPUT:\n7\nTEST:\nINPUT:\n8 8\nOUTPUT:\n16\n";
    let lifted = "PURPOSE:\nPrint the difference of two integers.\nOUTPUT REQUIREMENTS:\nPrint a minus b.\n";
    let amendment = "INGREDIENT: Output Requirements\nPrint the sum a + b of the two input integers, not their difference.\n";
    ScriptedScenario::new()
        .script("coder", 0, ["```sh\nread a b\necho $((a - b))\n```"])
        .script("tester", 0, [tester])
        .script("lifter", 1, [lifted])
        .script("aligner", 1, [amendment])
        .script("coder", 1, ["```sh\nread a b\necho $((a + b))\n```"])
}

fn main() {
    let config = PipelineConfig {
        lang: LangConfig::shell(),
        generation: GenerationConfig { max_retries: 0, ..GenerationConfig::default() },
        ..PipelineConfig::default()
    };
    let backend = Arc::new(ScriptedBackend::new(scenario()));
    let pipeline = Pipeline::new(backend, config);

    let result = pipeline.run_problem(&problem());

    println!("problem: {}", result.problem_id);
    println!("gate passed: {}", result.gate_passed);
    if let Some(score) = result.initial_score {
        println!(
            "initial score: public {}/{}, generated {}/{}",
            score.primary.passed, score.primary.total, score.secondary.passed, score.secondary.total
        );
    }

    for record in &result.trace {
        let rules: Vec<&str> =
            record.proposed.iter().map(|i| i.rule.display_name()).collect();
        match (&record.score, &record.failure) {
            (Some(score), _) => println!(
                "iteration {}: proposed [{}] -> public {}/{}, generated {}/{}, retained: {}",
                record.iteration,
                rules.join(", "),
                score.primary.passed,
                score.primary.total,
                score.secondary.passed,
                score.secondary.total,
                record.retained
            ),
            (None, Some(failure)) => {
                println!("iteration {}: failed: {failure}", record.iteration)
            }
            (None, None) => println!("iteration {}: no score recorded", record.iteration),
        }
    }

    let best = result.best_score.expect("a best score exists");
    println!(
        "best score: public {}/{}, generated {}/{} (perfect: {})",
        best.primary.passed,
        best.primary.total,
        best.secondary.passed,
        best.secondary.total,
        best.is_perfect()
    );
    println!(
        "tokens: {} prompt, {} completion",
        result.usage.prompt_tokens, result.usage.completion_tokens
    );
    if let Some(candidate) = &result.best_candidate {
        println!("final program:\n{}", candidate.code);
    }
}
