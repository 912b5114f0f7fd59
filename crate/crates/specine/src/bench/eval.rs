use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{AlignmentRule, Problem, TestCase};
use crate::llm::UsageStats;
use crate::pipeline::{IterationRecord, PipelineResult};
use crate::sandbox::{pass_report, run_one, ExecutionLimits, LangConfig, SandboxError, Verdict};

/// How candidates are judged against private tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub lang: LangConfig,
    pub limits: ExecutionLimits,
    /// Problems judged at the same time.
    pub parallelism: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            lang: LangConfig::python3(),
            limits: ExecutionLimits::default(),
            parallelism: 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("result references unknown problem '{0}'")]
    MissingProblem(String),
    #[error(transparent)]
    Sandbox(#[from] SandboxError),
}

/// One problem's final standing after a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEval {
    pub problem_id: String,
    /// True when the best candidate passed every private test.
    pub solved: bool,
    pub passed: u64,
    pub total: u64,
    /// `passed / total` as a plain fraction of private tests.
    pub pass_ratio: f64,
    pub gate_passed: bool,
    /// Alignment iterations recorded, retained or not.
    pub iterations_used: u32,
    /// Rules of the amendments retained by the end, in retention order.
    pub retained_rules: Vec<AlignmentRule>,
    pub usage: UsageStats,
    /// Time the pipeline spent on this problem; excluded from the
    /// deterministic reports.
    pub wall_time: Duration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Batch metrics over one run.
///
/// `pass_at_1` is the fraction of problems solved outright; `avg_pass_ratio`
/// averages the per-problem private pass fractions, so partially working
/// programs still register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub problems: usize,
    pub solved: usize,
    pub pass_at_1: f64,
    pub avg_pass_ratio: f64,
    pub usage: UsageStats,
    /// Time this evaluation spent judging; excluded from the deterministic
    /// reports.
    pub wall_time: Duration,
    /// Sorted by problem id.
    pub per_problem: Vec<ProblemEval>,
}

/// Judges each result's best candidate against its problem's private tests
/// and aggregates the metrics. A missing candidate counts as zero passes,
/// not as an absent problem.
pub fn evaluate(
    problems: &[Problem],
    results: &[PipelineResult],
    config: &EvalConfig,
) -> Result<EvalSummary, EvalError> {
    let started = Instant::now();
    let by_id: BTreeMap<&str, &Problem> = problems.iter().map(|p| (p.id.as_str(), p)).collect();
    for result in results {
        if !by_id.contains_key(result.problem_id.as_str()) {
            return Err(EvalError::MissingProblem(result.problem_id.clone()));
        }
    }

    let slots: Vec<Mutex<Option<Result<ProblemEval, EvalError>>>> =
        results.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = config.parallelism.max(1).min(results.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= results.len() {
                    break;
                }
                let result = &results[index];
                let problem = by_id[result.problem_id.as_str()];
                *slots[index].lock().unwrap() = Some(judge_result(problem, result, config));
            });
        }
    });

    let mut per_problem = Vec::with_capacity(results.len());
    for slot in slots {
        per_problem.push(slot.into_inner().unwrap().expect("worker left a slot empty")?);
    }
    per_problem.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));

    let problems_count = per_problem.len();
    let solved = per_problem.iter().filter(|p| p.solved).count();
    let pass_at_1 = if problems_count == 0 {
        0.0
    } else {
        solved as f64 / problems_count as f64
    };
    let avg_pass_ratio = if problems_count == 0 {
        0.0
    } else {
        per_problem.iter().map(|p| p.pass_ratio).sum::<f64>() / problems_count as f64
    };
    let usage = per_problem
        .iter()
        .fold(UsageStats::default(), |acc, p| acc + p.usage);

    Ok(EvalSummary {
        problems: problems_count,
        solved,
        pass_at_1,
        avg_pass_ratio,
        usage,
        wall_time: started.elapsed(),
        per_problem,
    })
}

fn judge_result(
    problem: &Problem,
    result: &PipelineResult,
    config: &EvalConfig,
) -> Result<ProblemEval, EvalError> {
    let total = problem.private_tests.len() as u64;
    let passed = match &result.best_candidate {
        Some(candidate) => {
            let report = pass_report(
                &candidate.code,
                &config.lang,
                &problem.private_tests,
                &config.limits,
            )?;
            report.passed
        }
        None => 0,
    };
    let retained_rules = result
        .trace
        .iter()
        .filter(|record| record.retained)
        .flat_map(|record| record.proposed.iter().map(|i| i.rule))
        .collect();
    Ok(ProblemEval {
        problem_id: problem.id.clone(),
        solved: total > 0 && passed == total,
        passed,
        total,
        pass_ratio: if total == 0 { 0.0 } else { passed as f64 / total as f64 },
        gate_passed: result.gate_passed,
        iterations_used: result.trace.len() as u32,
        retained_rules,
        usage: result.usage,
        wall_time: result.wall_time,
        error: result.error.clone(),
    })
}

/// Proposal and retention counts for one rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleStats {
    /// Iterations in which the rule was part of the proposal.
    pub proposed: u64,
    /// Of those, iterations whose proposal was kept.
    pub retained: u64,
}

impl RuleStats {
    pub fn retention_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.retained as f64 / self.proposed as f64
        }
    }
}

/// Counts, for every rule, how often the aligner reached for it and how
/// often that choice survived the greedy filter. All ten rules are always
/// present, zeros included; an iteration proposing several rules credits
/// each of them.
pub fn rule_effectiveness(results: &[PipelineResult]) -> BTreeMap<AlignmentRule, RuleStats> {
    rule_effectiveness_from_iterations(results.iter().flat_map(|result| result.trace.iter()))
}

/// Same tally over bare iteration records, for traces read back from disk.
pub fn rule_effectiveness_from_iterations<'a, I>(iterations: I) -> BTreeMap<AlignmentRule, RuleStats>
where
    I: IntoIterator<Item = &'a IterationRecord>,
{
    let mut stats: BTreeMap<AlignmentRule, RuleStats> = AlignmentRule::ALL
        .into_iter()
        .map(|rule| (rule, RuleStats::default()))
        .collect();
    for record in iterations {
        for ingredient in &record.proposed {
            let entry = stats.entry(ingredient.rule).or_default();
            entry.proposed += 1;
            if record.retained {
                entry.retained += 1;
            }
        }
    }
    stats
}

/// Audit of one problem's generated tests against a reference solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemAudit {
    pub problem_id: String,
    pub correct: u64,
    pub total: u64,
}

/// How trustworthy the tester's tests were across a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub audited_tests: u64,
    pub correct_tests: u64,
    /// Micro-average: correct tests over all audited tests, pooled.
    pub accuracy: f64,
    /// Problems whose tests could not be audited for lack of a reference
    /// solution.
    pub skipped_problems: Vec<String>,
    /// Sorted by problem id.
    pub per_problem: Vec<ProblemAudit>,
}

/// Replays each generated test against the problem's reference solution: a
/// test is correct when the solution's output matches the test's expected
/// output. Problems without a reference solution are reported as skipped.
pub fn audit_generated_tests(
    results: &[PipelineResult],
    solutions: &BTreeMap<String, String>,
    lang: &LangConfig,
    limits: &ExecutionLimits,
) -> Result<AuditSummary, SandboxError> {
    let mut per_problem = Vec::new();
    let mut skipped = Vec::new();
    for result in results {
        if result.generated_tests.is_empty() {
            continue;
        }
        let Some(solution) = solutions.get(&result.problem_id) else {
            skipped.push(result.problem_id.clone());
            continue;
        };
        let mut correct = 0;
        for test in &result.generated_tests {
            let probe = TestCase::generated(test.input.clone(), test.expected.clone());
            let outcome = run_one(solution, lang, &probe, limits);
            if outcome.verdict == Verdict::SetupError {
                return Err(SandboxError::Setup(outcome.stderr));
            }
            if outcome.verdict == Verdict::Pass {
                correct += 1;
            }
        }
        per_problem.push(ProblemAudit {
            problem_id: result.problem_id.clone(),
            correct,
            total: result.generated_tests.len() as u64,
        });
    }
    per_problem.sort_by(|a, b| a.problem_id.cmp(&b.problem_id));
    skipped.sort_unstable();
    let audited_tests: u64 = per_problem.iter().map(|p| p.total).sum();
    let correct_tests: u64 = per_problem.iter().map(|p| p.correct).sum();
    Ok(AuditSummary {
        audited_tests,
        correct_tests,
        accuracy: if audited_tests == 0 {
            0.0
        } else {
            correct_tests as f64 / audited_tests as f64
        },
        skipped_problems: skipped,
        per_problem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{AlignedIngredient, Candidate};
    use crate::pipeline::{FeedbackMode, IterationRecord};
    use crate::testkit::{triangular, triangular_problem};

    fn shell_eval() -> EvalConfig {
        EvalConfig {
            lang: LangConfig::shell(),
            ..EvalConfig::default()
        }
    }

    fn result_with_code(problem_id: &str, code: Option<&str>) -> PipelineResult {
        PipelineResult {
            problem_id: problem_id.into(),
            gate_passed: false,
            initial_candidate: None,
            initial_score: None,
            best_candidate: code.map(|c| Candidate::new(c, "sh", 0, "spec")),
            best_score: None,
            generated_tests: Vec::new(),
            trace: Vec::new(),
            usage: UsageStats { prompt_tokens: 10, completion_tokens: 5 },
            wall_time: Duration::from_millis(1),
            error: None,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn counts_solved_and_partial_problems() {
        let problems = vec![triangular_problem("a", 4), triangular_problem("b", 4)];
        let results = vec![
            result_with_code("a", Some("read n\necho $((n * (n + 1) / 2))")),
            result_with_code("b", Some("read n\nif [ \"$n\" -le 2 ]; then echo $((n * (n + 1) / 2)); else echo -1; fi")),
        ];
        let summary = evaluate(&problems, &results, &shell_eval()).unwrap();
        assert_eq!(summary.problems, 2);
        assert_eq!(summary.solved, 1);
        assert_eq!(summary.pass_at_1, 0.5);
        assert_eq!(summary.avg_pass_ratio, (1.0 + 0.5) / 2.0);
        assert_eq!(summary.usage.prompt_tokens, 20);
        assert_eq!(summary.per_problem[0].problem_id, "a");
        assert!(summary.per_problem[0].solved);
        assert_eq!(summary.per_problem[1].passed, 2);
    }

    #[test]
    fn missing_candidate_scores_zero() {
        let problems = vec![triangular_problem("a", 3)];
        let results = vec![result_with_code("a", None)];
        let summary = evaluate(&problems, &results, &shell_eval()).unwrap();
        assert_eq!(summary.per_problem[0].passed, 0);
        assert_eq!(summary.per_problem[0].total, 3);
        assert!(!summary.per_problem[0].solved);
        assert_eq!(summary.pass_at_1, 0.0);
    }

    #[test]
    fn unknown_problem_id_is_an_error() {
        let problems = vec![triangular_problem("a", 3)];
        let results = vec![result_with_code("ghost", Some("echo 1"))];
        assert!(matches!(
            evaluate(&problems, &results, &shell_eval()),
            Err(EvalError::MissingProblem(id)) if id == "ghost"
        ));
    }

    #[test]
    fn parallel_evaluation_matches_serial() {
        let problems: Vec<Problem> = (0..6)
            .map(|i| triangular_problem(&format!("p{i}"), 3))
            .collect();
        let results: Vec<PipelineResult> = (0..6)
            .map(|i| result_with_code(&format!("p{i}"), Some("read n\necho $((n * (n + 1) / 2))")))
            .collect();
        let serial = evaluate(&problems, &results, &shell_eval()).unwrap();
        let parallel_config = EvalConfig { parallelism: 4, ..shell_eval() };
        let parallel = evaluate(&problems, &results, &parallel_config).unwrap();
        assert_eq!(serial.per_problem, parallel.per_problem);
        assert_eq!(serial.pass_at_1, 1.0);
    }

    fn record(rule: AlignmentRule, retained: bool) -> IterationRecord {
        IterationRecord {
            iteration: 1,
            feedback_mode: FeedbackMode::Lift,
            lifted: None,
            proposed: vec![AlignedIngredient::new(rule, "body", 1)],
            candidate: None,
            score: None,
            retained,
            failure: None,
            prompt_refs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn rule_stats_cover_all_rules_with_zeros() {
        let mut result = result_with_code("a", None);
        result.trace = vec![
            record(AlignmentRule::Apis, true),
            record(AlignmentRule::Apis, false),
            record(AlignmentRule::HintsOrTips, true),
        ];
        let stats = rule_effectiveness(&[result]);
        assert_eq!(stats.len(), 10);
        assert_eq!(stats[&AlignmentRule::Apis], RuleStats { proposed: 2, retained: 1 });
        assert_eq!(stats[&AlignmentRule::HintsOrTips], RuleStats { proposed: 1, retained: 1 });
        assert_eq!(stats[&AlignmentRule::KeyConcepts], RuleStats::default());
        assert_eq!(stats[&AlignmentRule::Apis].retention_rate(), 0.5);
    }

    #[test]
    fn multi_rule_iterations_credit_every_rule() {
        let mut result = result_with_code("a", None);
        let mut multi = record(AlignmentRule::Apis, true);
        multi
            .proposed
            .push(AlignedIngredient::new(AlignmentRule::KeyConcepts, "k", 1));
        result.trace = vec![multi];
        let stats = rule_effectiveness(&[result]);
        assert_eq!(stats[&AlignmentRule::Apis].retained, 1);
        assert_eq!(stats[&AlignmentRule::KeyConcepts].retained, 1);
    }

    #[test]
    fn audit_measures_test_correctness() {
        let mut result = result_with_code("a", None);
        result.generated_tests = vec![
            TestCase::generated("3", triangular(3).to_string()),
            TestCase::generated("4", triangular(4).to_string()),
            TestCase::generated("5", "999"),
        ];
        let mut solutions = BTreeMap::new();
        solutions.insert("a".to_string(), "read n\necho $((n * (n + 1) / 2))".to_string());
        let summary = audit_generated_tests(
            &[result],
            &solutions,
            &LangConfig::shell(),
            &ExecutionLimits::default(),
        )
        .unwrap();
        assert_eq!(summary.audited_tests, 3);
        assert_eq!(summary.correct_tests, 2);
        assert!((summary.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(summary.per_problem[0].correct, 2);
    }

    #[test]
    fn audit_skips_problems_without_solutions() {
        let mut with_tests = result_with_code("no-solution", None);
        with_tests.generated_tests = vec![TestCase::generated("1", "1")];
        let summary = audit_generated_tests(
            &[with_tests, result_with_code("no-tests", None)],
            &BTreeMap::new(),
            &LangConfig::shell(),
            &ExecutionLimits::default(),
        )
        .unwrap();
        assert_eq!(summary.audited_tests, 0);
        assert_eq!(summary.accuracy, 0.0);
        assert_eq!(summary.skipped_problems, vec!["no-solution"]);
    }
}
