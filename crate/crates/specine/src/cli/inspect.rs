use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::bench::{rule_effectiveness_from_iterations, RuleStats};
use crate::cli::{AnalyzeRulesArgs, CliError, TraceArgs};
use crate::core::AlignmentRule;
use crate::pipeline::{read_trace, render_trace, trace_file_name, TraceFile};

const TRACES_DIR: &str = "traces";
const TRACE_SUFFIX: &str = ".trace.json";

/// Renders one recorded trace as a human-readable timeline. The path may be
/// a trace file directly or a run directory, in which case `--problem`
/// picks the trace.
pub fn cmd_trace(args: &TraceArgs) -> Result<(), CliError> {
    let path = resolve_trace_path(&args.path, args.problem.as_deref())?;
    let trace = read_trace(&path)?;
    print!("{}", render_trace(&trace));
    Ok(())
}

/// Reads every trace of a finished run and prints the per-rule retention
/// table, most-retained rules first.
pub fn cmd_analyze_rules(args: &AnalyzeRulesArgs) -> Result<(), CliError> {
    let traces = load_all_traces(&args.run_dir)?;
    let stats =
        rule_effectiveness_from_iterations(traces.iter().flat_map(|t| t.iterations.iter()));
    print!("{}", rule_table(&stats, traces.len()));
    Ok(())
}

fn resolve_trace_path(path: &Path, problem: Option<&str>) -> Result<PathBuf, CliError> {
    if !path.is_dir() {
        return Ok(path.to_path_buf());
    }
    let dir = traces_dir(path);
    let id = problem.ok_or_else(|| {
        CliError::Usage(format!(
            "{} is a run directory; pick a problem with --problem <id>",
            path.display()
        ))
    })?;
    let candidate = dir.join(trace_file_name(id));
    if candidate.exists() {
        return Ok(candidate);
    }
    let mut available = trace_stems(&dir)?;
    available.sort();
    Err(CliError::Usage(if available.is_empty() {
        format!("no trace for problem '{id}' and no traces under {}", dir.display())
    } else {
        format!("no trace for problem '{id}'; recorded traces: {}", available.join(", "))
    }))
}

/// The directory holding trace files: `<run>/traces` when present, else the
/// path itself.
fn traces_dir(path: &Path) -> PathBuf {
    let nested = path.join(TRACES_DIR);
    if nested.is_dir() {
        nested
    } else {
        path.to_path_buf()
    }
}

fn trace_stems(dir: &Path) -> Result<Vec<String>, CliError> {
    let mut stems = Vec::new();
    if !dir.is_dir() {
        return Ok(stems);
    }
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(stem) = name.strip_suffix(TRACE_SUFFIX) {
            stems.push(stem.to_string());
        }
    }
    Ok(stems)
}

fn load_all_traces(run_dir: &Path) -> Result<Vec<TraceFile>, CliError> {
    let dir = traces_dir(run_dir);
    let mut names = trace_stems(&dir)?;
    names.sort();
    if names.is_empty() {
        return Err(CliError::Usage(format!("no traces found under {}", dir.display())));
    }
    names
        .iter()
        .map(|stem| Ok(read_trace(&dir.join(format!("{stem}{TRACE_SUFFIX}")))?))
        .collect()
}

/// All ten rules, most-retained first; ties fall back to proposal counts,
/// then to the rule name, so repeated runs print identical tables.
fn rule_table(stats: &BTreeMap<AlignmentRule, RuleStats>, trace_count: usize) -> String {
    let mut rows: Vec<(&AlignmentRule, &RuleStats)> = stats.iter().collect();
    rows.sort_by(|(rule_a, a), (rule_b, b)| {
        b.retained
            .cmp(&a.retained)
            .then(b.proposed.cmp(&a.proposed))
            .then(rule_a.display_name().cmp(rule_b.display_name()))
    });

    let mut out = format!("analyzed {trace_count} trace(s)\n\n");
    out.push_str(&format!(
        "{:<34} {:>8} {:>8} {:>8}\n",
        "rule", "proposed", "retained", "rate"
    ));
    for (rule, row) in rows {
        out.push_str(&format!(
            "{:<34} {:>8} {:>8} {:>7.2}%\n",
            rule.display_name(),
            row.proposed,
            row.retained,
            row.retention_rate() * 100.0
        ));
    }
    out
}
