use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{Problem, TestCase, TestOrigin};

/// One dataset row: a problem plus, when available, a reference solution
/// used to audit generated tests. The solution never reaches the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub problem: Problem,
    pub canonical_solution: Option<String>,
}

/// An ordered collection of problems loaded from one JSONL file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub entries: Vec<DatasetEntry>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The problems alone, in file order.
    pub fn problems(&self) -> Vec<Problem> {
        self.entries.iter().map(|e| e.problem.clone()).collect()
    }

    /// Reference solutions keyed by problem id.
    pub fn solutions(&self) -> BTreeMap<String, String> {
        self.entries
            .iter()
            .filter_map(|e| {
                e.canonical_solution
                    .as_ref()
                    .map(|s| (e.problem.id.clone(), s.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot access dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error("line {line}: duplicate problem id '{id}'")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: {detail}")]
    Invalid { line: usize, detail: String },
}

/// On-disk row shape: tests are plain input/output pairs, origins are
/// implied by which list they sit in.
#[derive(Debug, Serialize, Deserialize)]
struct DatasetRow {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    difficulty: Option<String>,
    #[serde(default)]
    public_tests: Vec<DatasetTest>,
    private_tests: Vec<DatasetTest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    canonical_solution: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetTest {
    input: String,
    output: String,
}

/// Reads a JSONL dataset. Blank lines are ignored; anything else must be a
/// complete row. Every problem is validated on the way in, and errors carry
/// 1-based line numbers.
pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let row: DatasetRow = serde_json::from_str(&text).map_err(|e| DatasetError::Parse {
            line: line_no,
            detail: e.to_string(),
        })?;
        if seen.insert(row.id.clone(), line_no).is_some() {
            return Err(DatasetError::DuplicateId {
                line: line_no,
                id: row.id,
            });
        }
        let problem = Problem {
            id: row.id,
            title: row.title,
            spec_text: row.description,
            public_tests: row
                .public_tests
                .into_iter()
                .map(|t| TestCase::public(t.input, t.output))
                .collect(),
            private_tests: row
                .private_tests
                .into_iter()
                .map(|t| TestCase::public(t.input, t.output))
                .collect(),
            difficulty: row.difficulty,
        };
        problem.validate().map_err(|e| DatasetError::Invalid {
            line: line_no,
            detail: e.to_string(),
        })?;
        entries.push(DatasetEntry {
            problem,
            canonical_solution: row.canonical_solution,
        });
    }
    Ok(Dataset { entries })
}

/// Writes a dataset back out as JSONL, one row per problem, in order.
pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<(), DatasetError> {
    let mut file = std::fs::File::create(path)?;
    for entry in &dataset.entries {
        let row = DatasetRow {
            id: entry.problem.id.clone(),
            title: entry.problem.title.clone(),
            description: entry.problem.spec_text.clone(),
            difficulty: entry.problem.difficulty.clone(),
            public_tests: entry
                .problem
                .public_tests
                .iter()
                .map(|t| DatasetTest {
                    input: t.input.clone(),
                    output: t.expected.clone(),
                })
                .collect(),
            private_tests: entry
                .problem
                .private_tests
                .iter()
                .map(|t| DatasetTest {
                    input: t.input.clone(),
                    output: t.expected.clone(),
                })
                .collect(),
            canonical_solution: entry.canonical_solution.clone(),
        };
        let line = serde_json::to_string(&row).expect("dataset row serialization cannot fail");
        file.write_all(line.as_bytes())?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

/// Moves `n` randomly chosen private tests into the public set.
///
/// The draw is seeded per problem id, so the same problem gets the same
/// carve no matter where it appears in a dataset or what else is carved.
/// At least one private test always remains; asking for more is clamped.
/// Carved tests keep their relative order and become `Public`.
pub fn carve_public(problem: &Problem, n: usize, seed: u64) -> Problem {
    let private_len = problem.private_tests.len();
    let take = n.min(private_len.saturating_sub(1));
    if take == 0 {
        return problem.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(crate::pipeline::stable_seed(seed, &problem.id));
    let mut chosen = rand::seq::index::sample(&mut rng, private_len, take).into_vec();
    chosen.sort_unstable();
    let mut carved = problem.clone();
    let mut moved = Vec::with_capacity(take);
    for index in chosen.iter().rev() {
        moved.push(carved.private_tests.remove(*index));
    }
    moved.reverse();
    for mut test in moved {
        test.origin = TestOrigin::Public;
        carved.public_tests.push(test);
    }
    carved
}

/// Draws `total` problems, keeping the difficulty mix of the input as close
/// as largest-remainder apportionment allows. Problems without a difficulty
/// form their own stratum. Within a stratum the draw is seeded by the
/// stratum name, and the output preserves input order. Returns the sample
/// together with any warnings (for now, only when the request exceeds the
/// dataset and everything is returned).
pub fn sample_stratified(
    problems: &[Problem],
    total: usize,
    seed: u64,
) -> (Vec<Problem>, Vec<String>) {
    let mut warnings = Vec::new();
    if total >= problems.len() {
        if total > problems.len() {
            warnings.push(format!(
                "requested {total} problems but only {} exist; returning all of them",
                problems.len()
            ));
        }
        return (problems.to_vec(), warnings);
    }

    let mut strata: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (index, problem) in problems.iter().enumerate() {
        let key = problem
            .difficulty
            .clone()
            .unwrap_or_else(|| "unspecified".to_string());
        strata.entry(key).or_default().push(index);
    }

    let population = problems.len();
    let mut quotas: Vec<(String, usize, f64)> = strata
        .iter()
        .map(|(key, members)| {
            let exact = total as f64 * members.len() as f64 / population as f64;
            let base = exact.floor() as usize;
            (key.clone(), base, exact - exact.floor())
        })
        .collect();
    let assigned: usize = quotas.iter().map(|(_, base, _)| base).sum();
    let mut leftover = total - assigned;

    let mut by_remainder: Vec<usize> = (0..quotas.len()).collect();
    by_remainder.sort_by(|a, b| {
        quotas[*b]
            .2
            .partial_cmp(&quotas[*a].2)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| quotas[*a].0.cmp(&quotas[*b].0))
    });
    for position in by_remainder {
        if leftover == 0 {
            break;
        }
        let (key, base, _) = &mut quotas[position];
        if *base < strata[key.as_str()].len() {
            *base += 1;
            leftover -= 1;
        }
    }

    let mut selected: Vec<usize> = Vec::with_capacity(total);
    for (key, quota, _) in &quotas {
        let members = &strata[key.as_str()];
        if *quota == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(crate::pipeline::stable_seed(seed, key));
        let mut picks = rand::seq::index::sample(&mut rng, members.len(), *quota).into_vec();
        picks.sort_unstable();
        selected.extend(picks.into_iter().map(|p| members[p]));
    }
    selected.sort_unstable();
    let sample = selected.into_iter().map(|i| problems[i].clone()).collect();
    (sample, warnings)
}
