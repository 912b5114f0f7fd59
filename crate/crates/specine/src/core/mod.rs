//! Domain types shared by every stage of the alignment loop.

mod align;
mod problem;
mod score;

pub use align::{AlignedIngredient, AlignedSpec, AlignmentRule, IngredientError};
pub use problem::{Candidate, Problem, ProblemError, TestCase, TestOrigin};
pub use score::{HierarchicalScore, PassRatio};
