//! Specification alignment for model-driven code generation.
//!
//! The crate revolves around one loop: a coder model writes a program from a
//! problem statement, a tester model writes checks from the same statement,
//! and when the program fails those checks the statement itself is treated as
//! the suspect. A lifter model reads the failing program back into a sectioned
//! requirement format, an aligner model compares that perception against the
//! original statement and proposes amendments drawn from a fixed set of ten
//! rules, and a greedy search keeps exactly the amendments that strictly
//! improve a two-level pass ratio.
//!
//! Modules:
//!
//! - [`core`]: problems, test cases, hierarchical scores, alignment rules,
//!   and the amended-specification document.
//! - [`dsl`]: the sectioned requirement format produced by the lifter.
//! - [`llm`]: chat backends (HTTP, scripted, record/replay) plus usage
//!   accounting.
//! - [`sandbox`]: code sanitization, subprocess execution under limits, and
//!   output judging.
//! - [`agents`]: the coder, tester, lifter, and aligner roles with their
//!   prompt templates and parse-retry policy.
//! - [`pipeline`]: the identification gate and the greedy alignment loop,
//!   including the ablation variants.
//! - [`bench`]: dataset loading, public-test carving, stratified sampling,
//!   and evaluation metrics.
//! - [`cli`]: the `run`, `ablate`, `trace`, and `analyze-rules` commands
//!   backing the thin binary.
//! - [`testkit`]: scripted judges and backends for deterministic tests and
//!   examples.

pub mod agents;
pub mod bench;
pub mod cli;
pub mod core;
pub mod dsl;
pub mod llm;
pub mod pipeline;
pub mod sandbox;
pub mod testkit;

pub use crate::core::{
    AlignedIngredient, AlignedSpec, AlignmentRule, Candidate, HierarchicalScore, PassRatio,
    Problem, TestCase, TestOrigin,
};
pub use crate::dsl::RequirementDsl;
pub use crate::pipeline::{Pipeline, PipelineConfig, PipelineResult, Variant};
