//! Deterministic stand-ins for the expensive parts of a run.
//!
//! Pipeline behaviour is easiest to verify when code never actually
//! executes: [`PlannedJudge`] reads pass counts straight out of marker
//! comments in the candidate, and [`RecordingJudge`] wraps any judge and
//! remembers what it was asked. The triangular-number problem family gives
//! tests and examples a shared fixture whose pass ratios can be dialed in
//! exactly by choosing a threshold.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::core::{Problem, TestCase, TestOrigin};
use crate::pipeline::Judge;
use crate::sandbox::{ExecutionLimits, ExecutionResult, LangConfig, PassReport, SandboxError, Verdict};

/// Marker prefix for the number of public tests a planned candidate passes.
pub const MARK_PUBLIC: &str = "#pass-public:";
/// Marker prefix for tester-generated tests.
pub const MARK_GENERATED: &str = "#pass-generated:";
/// Marker prefix for retained edge tests.
pub const MARK_EDGE: &str = "#pass-edge:";

/// A judge that never runs anything. The candidate code declares how many
/// tests of each origin it passes, one marker comment per origin:
///
/// ```text
/// #pass-public: 2
/// #pass-generated: 3
/// ```
///
/// Within each origin the first `n` tests pass and the rest fail; a missing
/// marker means zero. This turns scripted coder replies into exact,
/// reproducible scores.
pub struct PlannedJudge;

fn marker_value(code: &str, marker: &str) -> u64 {
    code.lines()
        .filter_map(|line| line.trim().strip_prefix(marker))
        .filter_map(|rest| rest.trim().parse::<u64>().ok())
        .next_back()
        .unwrap_or(0)
}

impl Judge for PlannedJudge {
    fn pass_report(
        &self,
        code: &str,
        _lang: &LangConfig,
        tests: &[TestCase],
        _limits: &ExecutionLimits,
    ) -> Result<PassReport, SandboxError> {
        let mut budgets = [
            (TestOrigin::Public, marker_value(code, MARK_PUBLIC)),
            (TestOrigin::Generated, marker_value(code, MARK_GENERATED)),
            (TestOrigin::Edge, marker_value(code, MARK_EDGE)),
        ];
        let results = tests
            .iter()
            .map(|test| {
                let budget = budgets
                    .iter_mut()
                    .find(|(origin, _)| *origin == test.origin)
                    .map(|(_, left)| left)
                    .expect("every origin has a budget");
                let pass = *budget > 0;
                if pass {
                    *budget -= 1;
                }
                ExecutionResult {
                    verdict: if pass { Verdict::Pass } else { Verdict::WrongOutput },
                    stdout: if pass { test.expected.clone() } else { String::new() },
                    stderr: String::new(),
                    duration: Duration::ZERO,
                }
            })
            .collect();
        Ok(PassReport::from_results(results))
    }
}

/// Builds candidate code for [`PlannedJudge`], fenced the way a model reply
/// would be, declaring the given pass counts.
pub fn planned_reply(public: u64, generated: u64) -> String {
    format!("```\n{MARK_PUBLIC} {public}\n{MARK_GENERATED} {generated}\n```")
}

/// One call a [`RecordingJudge`] saw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeCall {
    pub code: String,
    pub origins: Vec<TestOrigin>,
}

/// Wraps any judge and records every call made through it, so a test can
/// assert which tests were and were not executed.
pub struct RecordingJudge {
    inner: Arc<dyn Judge>,
    calls: Mutex<Vec<JudgeCall>>,
}

impl RecordingJudge {
    pub fn new(inner: Arc<dyn Judge>) -> Self {
        RecordingJudge {
            inner,
            calls: Mutex::new(Vec::new()),
        }
    }

    /// All calls so far, in order.
    pub fn calls(&self) -> Vec<JudgeCall> {
        self.calls.lock().unwrap().clone()
    }

    /// Every test origin that ever reached the judge.
    pub fn seen_origins(&self) -> Vec<TestOrigin> {
        let mut seen = Vec::new();
        for call in self.calls.lock().unwrap().iter() {
            for origin in &call.origins {
                if !seen.contains(origin) {
                    seen.push(*origin);
                }
            }
        }
        seen
    }
}

impl Judge for RecordingJudge {
    fn pass_report(
        &self,
        code: &str,
        lang: &LangConfig,
        tests: &[TestCase],
        limits: &ExecutionLimits,
    ) -> Result<PassReport, SandboxError> {
        self.calls.lock().unwrap().push(JudgeCall {
            code: code.to_string(),
            origins: tests.iter().map(|t| t.origin).collect(),
        });
        self.inner.pass_report(code, lang, tests, limits)
    }
}

/// `1 + 2 + ... + n`.
pub fn triangular(n: u64) -> u64 {
    n * (n + 1) / 2
}

/// Statement for the triangular-number problem family: read `n`, print the
/// sum of the first `n` positive integers.
pub fn triangular_spec() -> &'static str {
    "Read a single integer n from standard input and print the sum of all integers from 1 to n inclusive."
}

/// A problem with `private_count` private tests on inputs `1..=private_count`
/// and three public tests on the inputs just above that range, so the two
/// sides never overlap.
pub fn triangular_problem(id: &str, private_count: u64) -> Problem {
    let public_tests = (private_count + 1..=private_count + 3)
        .map(|n| TestCase::public(n.to_string(), triangular(n).to_string()))
        .collect();
    let private_tests = (1..=private_count)
        .map(|n| TestCase::public(n.to_string(), triangular(n).to_string()))
        .collect();
    Problem {
        id: id.into(),
        title: Some("Triangular numbers".into()),
        spec_text: triangular_spec().into(),
        public_tests,
        private_tests,
        difficulty: Some("easy".into()),
    }
}

/// A scripted tester reply proposing one test per input, all correct.
pub fn triangular_tester_reply(inputs: &[u64]) -> String {
    let mut out = String::new();
    for n in inputs {
        out.push_str(&format!("TEST:\nINPUT:\n{n}\nOUTPUT:\n{}\n", triangular(*n)));
    }
    out
}

/// A fenced shell solution that is only correct for `n <= threshold` and
/// prints `-1` beyond it. Threshold 0 is wrong everywhere.
pub fn triangular_threshold_reply(threshold: u64) -> String {
    format!(
        "```sh\nread n\nif [ \"$n\" -le {threshold} ]; then\n  echo $((n * (n + 1) / 2))\nelse\n  echo -1\nfi\n```"
    )
}

/// A fenced shell solution that is correct everywhere.
pub fn triangular_full_reply() -> &'static str {
    "```sh\nread n\necho $((n * (n + 1) / 2))\n```"
}

/// A fenced shell solution that ignores the input and prints `-1`.
pub fn triangular_wrong_reply() -> &'static str {
    "```sh\nread n\necho -1\n```"
}
