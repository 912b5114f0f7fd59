use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Where a test case came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestOrigin {
    /// Shipped with the problem statement (or carved out of the private set).
    Public,
    /// Written by the tester model from the statement alone.
    Generated,
    /// Proposed by the aligner under the edge-case rule.
    Edge,
}

/// A single stdin/stdout check.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected: String,
    pub origin: TestOrigin,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected: impl Into<String>, origin: TestOrigin) -> Self {
        TestCase {
            input: input.into(),
            expected: expected.into(),
            origin,
        }
    }

    pub fn public(input: impl Into<String>, expected: impl Into<String>) -> Self {
        Self::new(input, expected, TestOrigin::Public)
    }

    pub fn generated(input: impl Into<String>, expected: impl Into<String>) -> Self {
        Self::new(input, expected, TestOrigin::Generated)
    }

    pub fn edge(input: impl Into<String>, expected: impl Into<String>) -> Self {
        Self::new(input, expected, TestOrigin::Edge)
    }
}

/// One benchmark problem.
///
/// `public_tests` are visible to the pipeline; `private_tests` are held out
/// for evaluation and must never influence generation or alignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub spec_text: String,
    pub public_tests: Vec<TestCase>,
    pub private_tests: Vec<TestCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("problem id is empty")]
    EmptyId,
    #[error("problem {0}: specification text is empty")]
    EmptySpec(String),
    #[error("problem {0}: no private tests")]
    NoPrivateTests(String),
    #[error("problem {id}: public test {public_index} duplicates private test {private_index}")]
    PublicPrivateOverlap {
        id: String,
        public_index: usize,
        private_index: usize,
    },
}

impl Problem {
    /// Checks the structural rules every problem must satisfy before a run:
    /// non-empty id and statement, at least one private test, and no test
    /// appearing on both sides of the public/private split.
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.id.trim().is_empty() {
            return Err(ProblemError::EmptyId);
        }
        if self.spec_text.trim().is_empty() {
            return Err(ProblemError::EmptySpec(self.id.clone()));
        }
        if self.private_tests.is_empty() {
            return Err(ProblemError::NoPrivateTests(self.id.clone()));
        }
        let key = |t: &TestCase| {
            (
                crate::sandbox::normalize_output(&t.input),
                crate::sandbox::normalize_output(&t.expected),
            )
        };
        let private_keys: Vec<_> = self.private_tests.iter().map(|t| key(t)).collect();
        for (pi, public) in self.public_tests.iter().enumerate() {
            let pk = key(public);
            if let Some(vi) = private_keys.iter().position(|k| *k == pk) {
                return Err(ProblemError::PublicPrivateOverlap {
                    id: self.id.clone(),
                    public_index: pi,
                    private_index: vi,
                });
            }
        }
        Ok(())
    }
}

/// A sanitized program produced by the coder at some point in the search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    /// Runnable source, already stripped of fences and surrounding prose.
    pub code: String,
    /// Interpreter tag the code targets, e.g. `python3`.
    pub lang: String,
    /// 0 for the initial program, otherwise the alignment iteration that
    /// produced it.
    pub iteration: u32,
    /// Digest of the specification text the coder was shown.
    pub spec_version: String,
}

impl Candidate {
    pub fn new(code: impl Into<String>, lang: impl Into<String>, iteration: u32, spec_text: &str) -> Self {
        Candidate {
            code: code.into(),
            lang: lang.into(),
            iteration,
            spec_version: spec_digest(spec_text),
        }
    }
}

/// Short content digest identifying a specification revision.
pub fn spec_digest(spec_text: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(spec_text.as_bytes());
    hex::encode(&digest[..8])
}
