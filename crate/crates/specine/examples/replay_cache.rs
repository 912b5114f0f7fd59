//! Recording model responses once and replaying them forever.
//!
//! The first run wraps a live backend in a recording cache. The second run
//! reads the cache alone: no backend behind it, byte-identical answers and
//! token counts out of it. This is how benchmark runs stay reproducible
//! and how the test suite avoids the network entirely.
//!
//! Run with: cargo run --example replay_cache

use std::sync::Arc;

use specine::llm::{
    CachingBackend, ChatBackend, GenerationConfig, ReplayCache, ScriptedBackend, ScriptedScenario,
};
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

fn live_backend() -> Arc<dyn ChatBackend> {
    let tester = "TEST:\nINPUT:\n2 2\nOUTPUT:\n4\nTEST:\nINPUT:\n0 0\nOUTPUT:\n0\nTEST:\nINPUT:\n9 1\nOUTPUT:\n10\n";
    let scenario = ScriptedScenario::new()
        .script("coder", 0, ["```sh\nread a b\necho $((a + b))\n```"])
        .script("tester", 0, [tester]);
    Arc::new(ScriptedBackend::new(scenario))
}

fn config() -> PipelineConfig {
    PipelineConfig {
        lang: LangConfig::shell(),
        generation: GenerationConfig { max_retries: 0, ..GenerationConfig::default() },
        ..PipelineConfig::default()
    }
}

fn main() {
    let dir = std::env::temp_dir().join("specine-replay-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let cache_path = dir.join("responses.bin");
    let _ = std::fs::remove_file(&cache_path);

    let recording = CachingBackend::recording(
        live_backend(),
        ReplayCache::open(&cache_path).expect("cache opens"),
    );
    println!("recording run");
    let first = {
        let backend = Arc::new(recording);
        let pipeline = Pipeline::new(backend.clone(), config());
        let result = pipeline.run_problem(&problem());
        println!("  backend calls: {}", backend.inner_calls());
        println!("  cache hits:    {}", backend.cache_hits());
        println!("  cache records: {}", backend.cache().len());
        result
    };

    let replaying =
        CachingBackend::replay_only(ReplayCache::open(&cache_path).expect("cache reopens"));
    println!("replay run (no live backend attached)");
    let second = {
        let backend = Arc::new(replaying);
        let pipeline = Pipeline::new(backend.clone(), config());
        let result = pipeline.run_problem(&problem());
        println!("  backend calls: {}", backend.inner_calls());
        println!("  cache hits:    {}", backend.cache_hits());
        result
    };

    println!();
    println!("same best candidate: {}", first.best_candidate == second.best_candidate);
    println!("same scores:         {}", first.best_score == second.best_score);
    println!(
        "same token counts:   {} ({} prompt, {} completion)",
        first.usage == second.usage,
        second.usage.prompt_tokens,
        second.usage.completion_tokens
    );
}
