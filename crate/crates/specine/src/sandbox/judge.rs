use serde::{Deserialize, Serialize};

use crate::core::{PassRatio, TestCase};
use crate::sandbox::{run_one, ExecutionLimits, ExecutionResult, LangConfig, SandboxError, Verdict};

/// Canonical form used for output comparison: every line loses its trailing
/// whitespace, trailing blank lines are dropped, and the rest is kept
/// byte-exact, interior blank lines included.
pub fn normalize_output(text: &str) -> String {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end()).collect();
    let end = lines.iter().rposition(|l| !l.is_empty());
    match end {
        Some(e) => lines[..=e].join("\n"),
        None => String::new(),
    }
}

/// True when actual and expected output agree modulo trailing whitespace.
pub fn judge_output(actual: &str, expected: &str) -> bool {
    normalize_output(actual) == normalize_output(expected)
}

/// Outcome of running one candidate over a whole test set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassReport {
    pub results: Vec<ExecutionResult>,
    pub passed: u64,
    pub total: u64,
    pub ratio: PassRatio,
}

impl PassReport {
    pub fn empty() -> Self {
        PassReport {
            results: Vec::new(),
            passed: 0,
            total: 0,
            ratio: PassRatio::absent(),
        }
    }

    pub fn from_results(results: Vec<ExecutionResult>) -> Self {
        let passed = results.iter().filter(|r| r.verdict == Verdict::Pass).count() as u64;
        let total = results.len() as u64;
        PassReport {
            results,
            passed,
            total,
            ratio: PassRatio::new(passed, total),
        }
    }
}

/// Runs every test, never short-circuiting, so per-test verdicts are always
/// complete. A `SetupError` on any test aborts with an error instead of
/// counting the test as failed, since it says nothing about the code.
pub fn pass_report(
    code: &str,
    lang: &LangConfig,
    tests: &[TestCase],
    limits: &ExecutionLimits,
) -> Result<PassReport, SandboxError> {
    let mut results = Vec::with_capacity(tests.len());
    for test in tests {
        let result = run_one(code, lang, test, limits);
        if result.verdict == Verdict::SetupError {
            return Err(SandboxError::Setup(result.stderr));
        }
        results.push(result);
    }
    Ok(PassReport::from_results(results))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_table() {
        let cases = [
            ("42\n", "42", true),
            ("42", "42\n", true),
            ("a  \nb\t\n", "a\nb", true),
            ("a\nb\n\n\n", "a\nb", true),
            ("a\n\nb", "a\nb", false),
            ("a\nb", "a\nB", false),
            ("", "\n\n", true),
            (" a", "a", false),
        ];
        for (actual, expected, verdict) in cases {
            assert_eq!(
                judge_output(actual, expected),
                verdict,
                "judge_output({actual:?}, {expected:?})"
            );
        }
    }

    #[test]
    fn interior_blank_lines_are_significant() {
        assert!(!judge_output("1\n\n2", "1\n2"));
        assert!(judge_output("1\n\n2\n", "1\n\n2"));
    }

    #[test]
    fn report_counts_all_tests() {
        let tests = vec![
            TestCase::public("1", "2"),
            TestCase::public("2", "4"),
            TestCase::public("3", "7"),
        ];
        let report = pass_report(
            "read x\necho $((x * 2))",
            &LangConfig::shell(),
            &tests,
            &ExecutionLimits::default(),
        )
        .unwrap();
        assert_eq!(report.results.len(), 3);
        assert_eq!((report.passed, report.total), (2, 3));
        assert_eq!(report.ratio, PassRatio::new(2, 3));
        assert_eq!(report.results[2].verdict, Verdict::WrongOutput);
    }

    #[test]
    fn empty_test_set_is_absent() {
        let report = pass_report("echo hi", &LangConfig::shell(), &[], &ExecutionLimits::default()).unwrap();
        assert_eq!(report.total, 0);
        assert!(report.ratio.is_absent());
    }

    #[test]
    fn setup_error_aborts() {
        let lang = LangConfig {
            tag: "ghost".into(),
            command: vec!["definitely-not-installed-interp".into(), "{file}".into()],
            file_name: "main.x".into(),
        };
        let err = pass_report("x", &lang, &[TestCase::public("", "")], &ExecutionLimits::default());
        assert!(matches!(err, Err(SandboxError::Setup(_))));
    }
}
