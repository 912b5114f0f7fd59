//! Benchmark plumbing around the pipeline: datasets on disk, public-test
//! carving, stratified sampling, evaluation against private tests, rule
//! statistics, test audits, and the report files a run leaves behind.

mod dataset;
mod eval;
mod report;

pub use dataset::{
    carve_public, load_dataset, sample_stratified, save_dataset, Dataset, DatasetEntry,
    DatasetError,
};
pub use eval::{
    audit_generated_tests, evaluate, rule_effectiveness, rule_effectiveness_from_iterations,
    AuditSummary, EvalConfig, EvalError, EvalSummary, ProblemAudit, ProblemEval, RuleStats,
};
pub use report::{
    write_per_problem_csv, write_rule_effectiveness_csv, write_summary_json, write_timing_json,
    ReportError,
};
