//! Preparing a benchmark dataset on disk.
//!
//! Problems live one JSON object per line. Loading validates every row,
//! `carve_public` moves a deterministic slice of private tests into the
//! public set for problems that ship without examples, and
//! `sample_stratified` draws a difficulty-balanced subset.
//!
//! Run with: cargo run --example dataset_prep

use specine::bench::{
    carve_public, load_dataset, sample_stratified, save_dataset, Dataset, DatasetEntry,
};
use specine::{Problem, TestCase};

fn problem(id: &str, difficulty: &str, tests: usize) -> Problem {
    Problem {
        id: id.into(),
        title: None,
        spec_text: format!("Echo the input ({id})."),
        public_tests: Vec::new(),
        private_tests: (0..tests)
            .map(|i| TestCase::public(format!("{i}"), format!("{i}")))
            .collect(),
        difficulty: Some(difficulty.into()),
    }
}

fn main() {
    let dir = std::env::temp_dir().join("specine-dataset-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("problems.jsonl");

    let dataset = Dataset {
        entries: ["a", "b", "c", "d"]
            .iter()
            .map(|id| DatasetEntry {
                problem: problem(id, if *id < "c" { "easy" } else { "hard" }, 6),
                canonical_solution: Some("cat".into()),
            })
            .collect(),
    };
    save_dataset(&path, &dataset).expect("dataset saved");
    println!("wrote {} problems to {}", dataset.len(), path.display());

    let loaded = load_dataset(&path).expect("dataset loads");
    println!("reloaded {} problems, equal: {}", loaded.len(), loaded == dataset);

    let mut broken = std::fs::read_to_string(&path).expect("read back");
    let first_line = broken.lines().next().expect("first line").to_string();
    broken.push_str(&first_line);
    broken.push('\n');
    let bad_path = dir.join("duplicated.jsonl");
    std::fs::write(&bad_path, broken).expect("write corrupt copy");
    match load_dataset(&bad_path) {
        Err(error) => println!("duplicate row rejected: {error}"),
        Ok(_) => println!("unexpectedly loaded a dataset with duplicate ids"),
    }

    println!();
    let problems = loaded.problems();
    let carved = carve_public(&problems[0], 2, 7);
    println!(
        "carve_public moved 2 tests on '{}': public {} -> {}, private {} -> {}",
        carved.id,
        problems[0].public_tests.len(),
        carved.public_tests.len(),
        problems[0].private_tests.len(),
        carved.private_tests.len()
    );
    let again = carve_public(&problems[0], 2, 7);
    println!("same seed, same carve: {}", again == carved);

    println!();
    let (sampled, warnings) = sample_stratified(&problems, 2, 7);
    let ids: Vec<&str> = sampled.iter().map(|p| p.id.as_str()).collect();
    println!("stratified sample of 2 from 4: {}", ids.join(", "));
    for warning in warnings {
        println!("warning: {warning}");
    }
    for stratum in ["easy", "hard"] {
        let count = sampled
            .iter()
            .filter(|p| p.difficulty.as_deref() == Some(stratum))
            .count();
        println!("  {stratum}: {count}");
    }
}
