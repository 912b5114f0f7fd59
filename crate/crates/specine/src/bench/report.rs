use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::bench::{EvalSummary, RuleStats};
use crate::core::AlignmentRule;
use crate::llm::UsageStats;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot write csv report: {0}")]
    Csv(#[from] csv::Error),
}

/// The machine-readable summary, stripped of all timing so that two runs
/// which made the same decisions write byte-identical files. Timing goes
/// into its own report via [`write_timing_json`].
#[derive(Serialize)]
struct SummaryDoc<'a> {
    problems: usize,
    solved: usize,
    pass_at_1: f64,
    avg_pass_ratio: f64,
    usage: UsageStats,
    per_problem: Vec<ProblemDoc<'a>>,
}

#[derive(Serialize)]
struct ProblemDoc<'a> {
    problem_id: &'a str,
    solved: bool,
    passed: u64,
    total: u64,
    pass_ratio: f64,
    gate_passed: bool,
    iterations_used: u32,
    retained_rules: Vec<&'static str>,
    usage: UsageStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

fn write_pretty_json(path: &Path, value: &impl Serialize) -> Result<(), ReportError> {
    let body = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    let mut file = std::fs::File::create(path)?;
    file.write_all(body.as_bytes())?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

/// Writes `summary.json`: metrics and usage, no wall-clock times.
pub fn write_summary_json(path: &Path, summary: &EvalSummary) -> Result<(), ReportError> {
    let doc = SummaryDoc {
        problems: summary.problems,
        solved: summary.solved,
        pass_at_1: summary.pass_at_1,
        avg_pass_ratio: summary.avg_pass_ratio,
        usage: summary.usage,
        per_problem: summary
            .per_problem
            .iter()
            .map(|p| ProblemDoc {
                problem_id: &p.problem_id,
                solved: p.solved,
                passed: p.passed,
                total: p.total,
                pass_ratio: p.pass_ratio,
                gate_passed: p.gate_passed,
                iterations_used: p.iterations_used,
                retained_rules: p.retained_rules.iter().map(|r| r.display_name()).collect(),
                usage: p.usage,
                error: p.error.as_deref(),
            })
            .collect(),
    };
    write_pretty_json(path, &doc)
}

#[derive(Serialize)]
struct TimingDoc<'a> {
    pipeline_wall_ms_total: u128,
    eval_wall_ms: u128,
    per_problem: Vec<TimingRow<'a>>,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    problem_id: &'a str,
    pipeline_wall_ms: u128,
}

/// Writes `timing.json`: wall-clock numbers only. This file varies from run
/// to run by nature and is kept apart from the reproducible reports.
pub fn write_timing_json(path: &Path, summary: &EvalSummary) -> Result<(), ReportError> {
    let doc = TimingDoc {
        pipeline_wall_ms_total: summary
            .per_problem
            .iter()
            .map(|p| p.wall_time.as_millis())
            .sum(),
        eval_wall_ms: summary.wall_time.as_millis(),
        per_problem: summary
            .per_problem
            .iter()
            .map(|p| TimingRow {
                problem_id: &p.problem_id,
                pipeline_wall_ms: p.wall_time.as_millis(),
            })
            .collect(),
    };
    write_pretty_json(path, &doc)
}

/// Writes `per_problem.csv`, one row per problem in id order.
pub fn write_per_problem_csv(path: &Path, summary: &EvalSummary) -> Result<(), ReportError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "problem_id",
        "solved",
        "passed",
        "total",
        "pass_ratio",
        "gate_passed",
        "iterations_used",
        "prompt_tokens",
        "completion_tokens",
        "error",
    ])?;
    for p in &summary.per_problem {
        writer.write_record([
            p.problem_id.as_str(),
            if p.solved { "true" } else { "false" },
            &p.passed.to_string(),
            &p.total.to_string(),
            &format!("{:.4}", p.pass_ratio),
            if p.gate_passed { "true" } else { "false" },
            &p.iterations_used.to_string(),
            &p.usage.prompt_tokens.to_string(),
            &p.usage.completion_tokens.to_string(),
            p.error.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush().map_err(ReportError::Io)?;
    Ok(())
}

/// Writes `rule_effectiveness.csv` with all ten rules in canonical order.
pub fn write_rule_effectiveness_csv(
    path: &Path,
    stats: &BTreeMap<AlignmentRule, RuleStats>,
) -> Result<(), ReportError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["rule", "proposed", "retained", "retention_rate"])?;
    for rule in AlignmentRule::ALL {
        let entry = stats.get(&rule).copied().unwrap_or_default();
        writer.write_record([
            rule.display_name(),
            &entry.proposed.to_string(),
            &entry.retained.to_string(),
            &format!("{:.4}", entry.retention_rate()),
        ])?;
    }
    writer.flush().map_err(ReportError::Io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::ProblemEval;
    use std::time::Duration;

    fn summary() -> EvalSummary {
        EvalSummary {
            problems: 2,
            solved: 1,
            pass_at_1: 0.5,
            avg_pass_ratio: 0.75,
            usage: UsageStats { prompt_tokens: 30, completion_tokens: 12 },
            wall_time: Duration::from_millis(77),
            per_problem: vec![
                ProblemEval {
                    problem_id: "a".into(),
                    solved: true,
                    passed: 4,
                    total: 4,
                    pass_ratio: 1.0,
                    gate_passed: true,
                    iterations_used: 0,
                    retained_rules: Vec::new(),
                    usage: UsageStats { prompt_tokens: 10, completion_tokens: 4 },
                    wall_time: Duration::from_millis(40),
                    error: None,
                },
                ProblemEval {
                    problem_id: "b".into(),
                    solved: false,
                    passed: 2,
                    total: 4,
                    pass_ratio: 0.5,
                    gate_passed: false,
                    iterations_used: 3,
                    retained_rules: vec![AlignmentRule::SpecificationPurpose, AlignmentRule::Apis],
                    usage: UsageStats { prompt_tokens: 20, completion_tokens: 8 },
                    wall_time: Duration::from_millis(37),
                    error: None,
                },
            ],
        }
    }

    #[test]
    fn summary_json_omits_wall_times() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        write_summary_json(&path, &summary()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"pass_at_1\": 0.5"));
        assert!(text.contains("\"Specification Purpose\""));
        assert!(!text.contains("wall"));
        assert!(!text.contains("77"));
    }

    #[test]
    fn summary_json_ignores_timing_changes() {
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.json");
        let path_b = dir.path().join("b.json");
        let mut slower = summary();
        slower.wall_time = Duration::from_secs(1000);
        for p in &mut slower.per_problem {
            p.wall_time = Duration::from_secs(500);
        }
        write_summary_json(&path_a, &summary()).unwrap();
        write_summary_json(&path_b, &slower).unwrap();
        assert_eq!(std::fs::read(&path_a).unwrap(), std::fs::read(&path_b).unwrap());
    }

    #[test]
    fn timing_json_carries_the_walls() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("timing.json");
        write_timing_json(&path, &summary()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"eval_wall_ms\": 77"));
        assert!(text.contains("\"pipeline_wall_ms_total\": 77"));
        assert!(text.contains("\"pipeline_wall_ms\": 40"));
    }

    #[test]
    fn per_problem_csv_has_a_row_per_problem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("per_problem.csv");
        write_per_problem_csv(&path, &summary()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("problem_id,solved,"));
        assert!(lines[1].starts_with("a,true,4,4,1.0000,true,0,10,4,"));
        assert!(lines[2].starts_with("b,false,2,4,0.5000,false,3,20,8,"));
    }

    #[test]
    fn rule_csv_lists_all_ten_rules() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.csv");
        let mut stats = BTreeMap::new();
        stats.insert(AlignmentRule::Apis, RuleStats { proposed: 4, retained: 1 });
        write_rule_effectiveness_csv(&path, &stats).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 11);
        assert!(text.contains("APIs,4,1,0.2500"));
        assert!(text.contains("Key Concepts,0,0,0.0000"));
    }
}
