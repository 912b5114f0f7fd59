//! From raw model output to a pass/fail verdict.
//!
//! Model replies arrive fenced, prose-wrapped, or bare; `sanitize` digs the
//! program out, the sandbox runs it against stdin/stdout tests under time
//! and memory limits, and `judge_output` compares outputs with trailing
//! whitespace normalized away.
//!
//! Run with: cargo run --example sanitize_and_judge

use specine::sandbox::{judge_output, pass_report, sanitize, ExecutionLimits, LangConfig};
use specine::TestCase;

fn main() {
    let shapes = [
        ("fenced", "```sh\nread a b\necho $((a + b))\n```"),
        ("prose-wrapped", "Here is the program:\n\nread a b\necho $((a + b))\n\nIt reads two integers."),
        ("bare", "read a b\necho $((a + b))"),
    ];

    println!("sanitizer");
    println!("---------");
    let mut code = String::new();
    for (label, raw) in shapes {
        code = sanitize(raw).expect("code extracted");
        let again = sanitize(&code).expect("idempotent");
        println!("{label:>13}: {} bytes, idempotent: {}", code.len(), code == again);
    }

    println!();
    println!("judge");
    println!("-----");
    println!("'42\\n' vs '42'   : {}", judge_output("42\n", "42"));
    println!("'42  ' vs '42'   : {}", judge_output("42  ", "42"));
    println!("'4 2'  vs '42'   : {}", judge_output("4 2", "42"));

    let tests = [
        TestCase::public("1 2", "3"),
        TestCase::public("10 5", "15"),
        // wrong on purpose: 7 + 1 is 8, so this one shows a failing verdict
        TestCase::public("7 1", "9"),
    ];
    let lang = LangConfig::shell();
    let limits = ExecutionLimits::default();
    let report = pass_report(&code, &lang, &tests, &limits).expect("interpreter available");

    println!();
    println!("execution");
    println!("---------");
    for (test, result) in tests.iter().zip(&report.results) {
        println!("input {:>5} expected {:>3} -> {:?}", test.input, test.expected, result.verdict);
    }
    println!("passed {}/{}", report.passed, report.total);
}
