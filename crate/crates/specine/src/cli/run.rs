use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agents::PromptTemplates;
use crate::bench::{
    carve_public, evaluate, load_dataset, rule_effectiveness, sample_stratified,
    write_per_problem_csv, write_rule_effectiveness_csv, write_summary_json, write_timing_json,
    EvalConfig, EvalSummary,
};
use crate::cli::{AblateArgs, BackendKind, CliError, RunArgs};
use crate::core::Problem;
use crate::llm::{
    CachingBackend, ChatBackend, GenerationConfig, HttpBackend, ReplayCache, ScriptedBackend,
    ScriptedScenario, ENV_MODEL,
};
use crate::pipeline::{
    trace_file_name, write_trace, Pipeline, PipelineConfig, TraceFile, Variant,
};
use crate::sandbox::LangConfig;

const MANIFEST_FILE: &str = "manifest.json";
const TRACES_DIR: &str = "traces";
const REPORTS_DIR: &str = "reports";
const CACHE_DIR: &str = "cache";
const CACHE_FILE: &str = "responses.bin";
const COMPARISON_FILE: &str = "comparison.csv";

/// Everything needed to interpret a run directory later: the exact settings,
/// what dataset went in (with a digest of the file as read), which backend
/// answered, and where the artifacts sit. Written before the first model
/// call so even a crashed run stays identifiable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Seconds since the Unix epoch at run start.
    pub created_unix: u64,
    pub dataset: DatasetIdentity,
    /// Backend tag: scripted, http, or replay.
    pub backend: String,
    /// Cache file the run reads from and records into.
    pub cache_file: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub templates_digest: String,
    pub layout: RunLayout,
}

/// Which dataset file a run consumed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIdentity {
    pub path: String,
    /// File stem, as a human-friendly handle.
    pub name: String,
    /// SHA-256 of the file bytes actually read.
    pub sha256: String,
    /// Problems that entered the pipeline, after sampling.
    pub problems: usize,
}

/// Relative locations of the run artifacts inside the run directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLayout {
    pub manifest: String,
    pub traces: String,
    pub reports: String,
    pub cache: String,
}

impl Default for RunLayout {
    fn default() -> Self {
        RunLayout {
            manifest: MANIFEST_FILE.into(),
            traces: format!("{TRACES_DIR}/"),
            reports: format!("{REPORTS_DIR}/"),
            cache: format!("{CACHE_DIR}/"),
        }
    }
}

/// Runs the pipeline over a dataset and fills a run directory with the
/// manifest, one trace per problem, the report files, and the response
/// cache. Per-problem failures are recorded in traces and reports; only
/// configuration, dataset, and infrastructure trouble aborts.
pub fn cmd_run(args: &RunArgs) -> Result<EvalSummary, CliError> {
    let config = pipeline_config(args)?;
    let templates = load_templates(args)?;

    let bytes = std::fs::read(&args.dataset).map_err(|e| {
        CliError::Usage(format!("cannot read dataset {}: {e}", args.dataset.display()))
    })?;
    let digest = hex_digest(&bytes);
    let dataset = load_dataset(&args.dataset)?;
    let problems = select_problems(args, dataset.problems());

    prepare_run_dir(&args.out)?;
    let (backend, cache_path) = build_backend(args)?;

    let manifest = RunManifest {
        created_unix: unix_now(),
        dataset: DatasetIdentity {
            path: args.dataset.display().to_string(),
            name: dataset_name(&args.dataset),
            sha256: digest,
            problems: problems.len(),
        },
        backend: args.backend.tag().into(),
        cache_file: cache_path.display().to_string(),
        seed: args.seed,
        config: config.clone(),
        templates_digest: templates.digest(),
        layout: RunLayout::default(),
    };
    write_pretty_json(&args.out.join(MANIFEST_FILE), &manifest)?;

    let pipeline = Pipeline::new(backend, config.clone()).with_templates(templates);
    let results = pipeline.run_problems(&problems, args.parallelism);

    let traces_dir = args.out.join(TRACES_DIR);
    for result in &results {
        let trace = TraceFile::from_result(result, &config, &manifest.templates_digest);
        write_trace(&traces_dir.join(trace_file_name(&result.problem_id)), &trace)?;
    }

    let eval_config = EvalConfig {
        lang: config.lang.clone(),
        limits: config.limits.clone(),
        parallelism: args.judge_parallelism.unwrap_or(args.parallelism),
    };
    let summary = evaluate(&problems, &results, &eval_config)?;

    let reports_dir = args.out.join(REPORTS_DIR);
    write_summary_json(&reports_dir.join("summary.json"), &summary)?;
    write_per_problem_csv(&reports_dir.join("per_problem.csv"), &summary)?;
    write_rule_effectiveness_csv(
        &reports_dir.join("rule_effectiveness.csv"),
        &rule_effectiveness(&results),
    )?;
    write_timing_json(&reports_dir.join("timing.json"), &summary)?;

    println!("{}", summary_line(config.variant, &summary));
    let failures = results.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        println!("{failures} problem(s) recorded errors; details in {TRACES_DIR}/");
    }
    Ok(summary)
}

/// Runs the same dataset through several variants, one subdirectory per
/// variant, then prints a comparison table and writes it as CSV next to
/// the subdirectories.
pub fn cmd_ablate(args: &AblateArgs) -> Result<(), CliError> {
    let variants = chosen_variants(&args.variants);
    std::fs::create_dir_all(&args.run.out)?;

    let mut rows = Vec::new();
    for variant in variants {
        let mut sub = args.run.clone();
        sub.variant = variant;
        sub.out = args.run.out.join(variant.tag());
        let summary = cmd_run(&sub)?;
        rows.push((variant, summary));
    }

    print!("{}", comparison_table(&rows));
    std::fs::write(args.run.out.join(COMPARISON_FILE), comparison_csv(&rows))?;
    Ok(())
}

/// The requested variants without duplicates, or all of them.
fn chosen_variants(requested: &[Variant]) -> Vec<Variant> {
    if requested.is_empty() {
        return Variant::ALL.to_vec();
    }
    let mut seen = Vec::new();
    for &variant in requested {
        if !seen.contains(&variant) {
            seen.push(variant);
        }
    }
    seen
}

fn pipeline_config(args: &RunArgs) -> Result<PipelineConfig, CliError> {
    let lang = LangConfig::for_tag(&args.lang).ok_or_else(|| {
        CliError::Usage(format!("unknown language '{}', expected python3 or sh", args.lang))
    })?;
    let mut config = PipelineConfig {
        max_iterations: args.iterations,
        variant: args.variant,
        tester_k: args.tester_k,
        seed: args.seed,
        lang,
        ..PipelineConfig::default()
    };
    config.limits.wall_timeout = Duration::from_secs(args.timeout);
    config.generation.max_tokens = args.max_tokens;
    config.generation.temperature = args.temperature;
    config.generation.model_name = resolve_model(args.model.as_deref());
    config.validate().map_err(CliError::Usage)?;
    Ok(config)
}

/// Model name priority: explicit flag, then the environment, then the
/// generation default.
fn resolve_model(flag: Option<&str>) -> String {
    flag.map(str::to_string)
        .or_else(|| std::env::var(ENV_MODEL).ok().filter(|v| !v.is_empty()))
        .unwrap_or_else(|| GenerationConfig::default().model_name)
}

fn load_templates(args: &RunArgs) -> Result<Arc<PromptTemplates>, CliError> {
    Ok(match &args.templates {
        Some(dir) => Arc::new(PromptTemplates::from_dir(dir)?),
        None => Arc::new(PromptTemplates::builtin()),
    })
}

fn select_problems(args: &RunArgs, mut problems: Vec<Problem>) -> Vec<Problem> {
    if let Some(total) = args.sample {
        let (kept, warnings) = sample_stratified(&problems, total, args.seed);
        for warning in warnings {
            eprintln!("warning: {warning}");
        }
        problems = kept;
    }
    if let Some(n) = args.carve {
        problems = problems.iter().map(|p| carve_public(p, n, args.seed)).collect();
    }
    problems
}

fn prepare_run_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out.join(TRACES_DIR))?;
    std::fs::create_dir_all(out.join(REPORTS_DIR))?;
    std::fs::create_dir_all(out.join(CACHE_DIR))?;
    Ok(())
}

/// Assembles the backend: live backends are wrapped in a recording cache so
/// every run can be replayed later; replay runs read the cache alone.
fn build_backend(args: &RunArgs) -> Result<(Arc<dyn ChatBackend>, PathBuf), CliError> {
    let cache_path = args
        .cache
        .clone()
        .unwrap_or_else(|| args.out.join(CACHE_DIR).join(CACHE_FILE));
    match args.backend {
        BackendKind::Scripted => {
            let scenario_path = args.scenario.as_ref().ok_or_else(|| {
                CliError::Usage("--backend scripted needs --scenario <file>".into())
            })?;
            let scenario = ScriptedScenario::load(scenario_path)?;
            let inner: Arc<dyn ChatBackend> = Arc::new(ScriptedBackend::new(scenario));
            let cache = ReplayCache::open(&cache_path)?;
            Ok((Arc::new(CachingBackend::recording(inner, cache)), cache_path))
        }
        BackendKind::Http => {
            let inner: Arc<dyn ChatBackend> = Arc::new(HttpBackend::from_env()?);
            let cache = ReplayCache::open(&cache_path)?;
            Ok((Arc::new(CachingBackend::recording(inner, cache)), cache_path))
        }
        BackendKind::Replay => {
            let path = args.cache.clone().ok_or_else(|| {
                CliError::Usage("--backend replay needs --cache <recorded file>".into())
            })?;
            if !path.exists() {
                return Err(CliError::Usage(format!(
                    "replay cache {} does not exist",
                    path.display()
                )));
            }
            let cache = ReplayCache::open(&path)?;
            Ok((Arc::new(CachingBackend::replay_only(cache)), path))
        }
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Usage(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn summary_line(variant: Variant, summary: &EvalSummary) -> String {
    format!(
        "{}: {} problems, {} solved, pass@1 {:.2}%, avg pass ratio {:.2}%",
        variant.tag(),
        summary.problems,
        summary.solved,
        summary.pass_at_1 * 100.0,
        summary.avg_pass_ratio * 100.0
    )
}

fn comparison_table(rows: &[(Variant, EvalSummary)]) -> String {
    let mut out = String::from("variant  problems  solved  pass@1    avg_ratio\n");
    for (variant, summary) in rows {
        out.push_str(&format!(
            "{:<7}  {:>8}  {:>6}  {:>7.2}%  {:>8.2}%\n",
            variant.tag(),
            summary.problems,
            summary.solved,
            summary.pass_at_1 * 100.0,
            summary.avg_pass_ratio * 100.0
        ));
    }
    out
}

fn comparison_csv(rows: &[(Variant, EvalSummary)]) -> String {
    let mut out = String::from("variant,problems,solved,pass_at_1,avg_pass_ratio\n");
    for (variant, summary) in rows {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4}\n",
            variant.tag(),
            summary.problems,
            summary.solved,
            summary.pass_at_1,
            summary.avg_pass_ratio
        ));
    }
    out
}
