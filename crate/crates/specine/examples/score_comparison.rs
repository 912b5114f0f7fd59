//! How candidate programs are ranked.
//!
//! A score is a pair of pass ratios: public tests first, generated tests
//! second. Comparison is lexicographic, ratios are kept as exact fractions,
//! and a candidate with no tests on one level scores zero there.
//!
//! Run with: cargo run --example score_comparison

use specine::{HierarchicalScore, PassRatio};

fn describe(label: &str, score: HierarchicalScore) {
    println!(
        "{label}: public {}/{} ({:.2}%), generated {}/{} ({:.2}%)",
        score.primary.passed,
        score.primary.total,
        score.primary.percent(),
        score.secondary.passed,
        score.secondary.total,
        score.secondary.percent()
    );
}

fn main() {
    let weak = HierarchicalScore::new(PassRatio::new(1, 3), PassRatio::new(5, 5));
    let strong = HierarchicalScore::new(PassRatio::new(2, 3), PassRatio::new(0, 5));
    describe("weak  ", weak);
    describe("strong", strong);

    println!();
    println!("strong > weak: {}", strong > weak);
    println!("  the public level dominates: 2/3 beats 1/3 no matter the generated level");

    let half = HierarchicalScore::new(PassRatio::new(1, 2), PassRatio::new(1, 2));
    let two_quarters = HierarchicalScore::new(PassRatio::new(2, 4), PassRatio::new(2, 4));
    println!();
    println!("1/2 == 2/4 on both levels: {}", half == two_quarters);
    println!("  fractions compare by cross-multiplication, never through floats");

    let absent = HierarchicalScore::new(PassRatio::absent(), PassRatio::new(3, 5));
    let zero = HierarchicalScore::new(PassRatio::new(0, 7), PassRatio::new(3, 5));
    println!();
    println!("no public tests == failing all public tests: {}", absent == zero);

    let perfect = HierarchicalScore::new(PassRatio::new(3, 3), PassRatio::new(5, 5));
    println!();
    describe("perfect", perfect);
    println!("is_perfect: {} (the alignment loop stops here early)", perfect.is_perfect());
}
