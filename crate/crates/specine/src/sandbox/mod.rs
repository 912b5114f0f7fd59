//! Running untrusted generated code against test cases.
//!
//! Code goes through three steps: [`sanitize`] strips chat framing down to a
//! runnable program, [`run_one`] executes it in a throwaway directory under
//! wall-clock, memory, and output limits, and [`judge_output`] compares what
//! came out against the expected text with trailing-whitespace tolerance.

mod exec;
mod judge;
mod sanitize;

pub use exec::{run_one, ExecutionLimits, ExecutionResult, LangConfig, Verdict};
pub use judge::{judge_output, normalize_output, pass_report, PassReport};
pub use sanitize::sanitize;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SandboxError {
    #[error("no code left after sanitization")]
    EmptyAfterSanitize,
    #[error("interpreter setup failed: {0}")]
    Setup(String),
}
