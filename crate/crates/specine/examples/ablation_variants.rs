//! The same problem under every pipeline variant.
//!
//! Each variant removes or replaces one part of the loop: public tests,
//! the tester, the lifter (test feedback instead), the aligner (fixed
//! amendments), or the rule set (freeform amendments). The scripted
//! scenario below carries enough replies for all of them, so the run is
//! deterministic and offline.
//!
//! Run with: cargo run --example ablation_variants

use std::sync::Arc;

use specine::llm::{GenerationConfig, ScriptedBackend, ScriptedScenario};
use specine::sandbox::LangConfig;
use specine::{Pipeline, PipelineConfig, Problem, TestCase, Variant};

fn problem() -> Problem {
    Problem {
        id: "sum-two".into(),
        title: None,
        spec_text: "Read two integers on one line and print their sum.".into(),
        public_tests: vec![TestCase::public("1 2", "3"), TestCase::public("5 7", "12")],
        private_tests: vec![TestCase::public("100 1", "101")],
        difficulty: None,
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
    println!(
        "{:<7} {:>4} {:>11} {:>10} {:>8} {:>7}",
        "variant", "gate", "iterations", "retained", "perfect", "tester"
    );

    for variant in Variant::ALL {
        let config = PipelineConfig {
            variant,
            lang: LangConfig::shell(),
            generation: GenerationConfig { max_retries: 0, ..GenerationConfig::default() },
            ..PipelineConfig::default()
        };
        let backend = Arc::new(ScriptedBackend::new(scenario()));
        let pipeline = Pipeline::new(backend.clone(), config);
        let result = pipeline.run_problem(&problem());

        let retained = result.trace.iter().filter(|r| r.retained).count();
        let perfect = result.best_score.is_some_and(|s| s.is_perfect());
        let tester_calls = backend
            .transcript()
            .iter()
            .filter(|c| c.step.starts_with("tester:"))
            .count();
        println!(
            "{:<7} {:>4} {:>11} {:>10} {:>8} {:>7}",
            variant.tag(),
            result.gate_passed,
            result.trace.len(),
            retained,
            perfect,
            tester_calls
        );
    }

    println!();
    println!("woT skips the tester entirely; woA never calls the aligner model;");
    println!("wTF replaces lifting with failing-test feedback; woAR drops the rule names.");
}
