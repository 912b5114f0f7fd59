//! Writing a run trace to disk and rendering it back.
//!
//! Every pipeline run can be serialized into a trace file: settings,
//! identification outcome, one record per alignment iteration, and the
//! final candidate. Traces are deterministic (no wall times inside), so a
//! re-run over the same cache produces byte-identical files.
//!
//! Run with: cargo run --example trace_inspection

use std::sync::Arc;

use specine::llm::{GenerationConfig, ScriptedBackend, ScriptedScenario};
use specine::pipeline::{read_trace, render_trace, trace_file_name, write_trace, TraceFile};
use specine::sandbox::LangConfig;
use specine::{Pipeline, PipelineConfig, Problem, TestCase};

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
    let config = PipelineConfig {
        lang: LangConfig::shell(),
        generation: GenerationConfig { max_retries: 0, ..GenerationConfig::default() },
        ..PipelineConfig::default()
    };
    let pipeline = Pipeline::new(Arc::new(ScriptedBackend::new(scenario())), config.clone());
    let result = pipeline.run_problem(&problem());

    let templates_digest = pipeline.templates().digest();
    let trace = TraceFile::from_result(&result, &config, &templates_digest);

    let dir = std::env::temp_dir().join("specine-trace-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join(trace_file_name(&result.problem_id));
    write_trace(&path, &trace).expect("trace written");
    println!("wrote {}", path.display());

    let loaded = read_trace(&path).expect("trace reads back");
    println!("round trip equal: {}", loaded == trace);

    println!();
    println!("{}", render_trace(&loaded));
}
