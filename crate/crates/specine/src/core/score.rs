use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exact pass fraction over a test set: `passed` out of `total`.
///
/// A ratio over an empty set (`total == 0`) is the *absent* ratio. It
/// compares equal to zero, so a score component backed by no tests never
/// outranks one backed by real failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PassRatio {
    pub passed: u64,
    pub total: u64,
}

impl PassRatio {
    /// Builds a ratio, panicking if `passed` exceeds `total`.
    pub fn new(passed: u64, total: u64) -> Self {
        assert!(
            passed <= total,
            "pass ratio {passed}/{total} has more passes than tests"
        );
        PassRatio { passed, total }
    }

    /// The ratio over an empty test set.
    pub fn absent() -> Self {
        PassRatio { passed: 0, total: 0 }
    }

    pub fn is_absent(&self) -> bool {
        self.total == 0
    }

    /// True when every test passed and there was at least one test.
    pub fn is_full(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }

    /// Numerator and denominator used for ordering; absent maps to 0/1.
    fn ordering_key(&self) -> (u128, u128) {
        if self.total == 0 {
            (0, 1)
        } else {
            (u128::from(self.passed), u128::from(self.total))
        }
    }

    /// Compares two ratios as exact rationals, without floating point.
    pub fn cmp_value(&self, other: &PassRatio) -> Ordering {
        let (an, ad) = self.ordering_key();
        let (bn, bd) = other.ordering_key();
        (an * bd).cmp(&(bn * ad))
    }

    /// The fraction as a float in `[0, 1]`; absent yields 0.
    pub fn value(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.passed as f64 / self.total as f64
        }
    }

    /// The fraction as a percentage in `[0, 100]`.
    pub fn percent(&self) -> f64 {
        self.value() * 100.0
    }
}

impl fmt::Display for PassRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.total == 0 {
            write!(f, "-/-")
        } else {
            write!(f, "{}/{}", self.passed, self.total)
        }
    }
}

/// Two-level score for a candidate program.
///
/// `primary` is the pass ratio over the problem's public tests and `secondary`
/// the ratio over model-generated tests. Comparison is lexicographic: any
/// primary improvement beats any secondary one, and the secondary only breaks
/// primary ties. Equality is equality of the underlying rationals, so
/// `1/2 == 2/4` here even though the test counts differ.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HierarchicalScore {
    pub primary: PassRatio,
    pub secondary: PassRatio,
}

impl HierarchicalScore {
    pub fn new(primary: PassRatio, secondary: PassRatio) -> Self {
        HierarchicalScore { primary, secondary }
    }

    /// Score with both components absent; the least element.
    pub fn zero() -> Self {
        HierarchicalScore {
            primary: PassRatio::absent(),
            secondary: PassRatio::absent(),
        }
    }

    /// True when every component that has tests is fully passed and at least
    /// one component has tests.
    pub fn is_perfect(&self) -> bool {
        let any_tests = !self.primary.is_absent() || !self.secondary.is_absent();
        let primary_ok = self.primary.is_absent() || self.primary.is_full();
        let secondary_ok = self.secondary.is_absent() || self.secondary.is_full();
        any_tests && primary_ok && secondary_ok
    }
}

impl PartialEq for HierarchicalScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HierarchicalScore {}

impl PartialOrd for HierarchicalScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HierarchicalScore {
    fn cmp(&self, other: &Self) -> Ordering {
        self.primary
            .cmp_value(&other.primary)
            .then_with(|| self.secondary.cmp_value(&other.secondary))
    }
}

impl fmt::Display for HierarchicalScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.primary, self.secondary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(p: (u64, u64), s: (u64, u64)) -> HierarchicalScore {
        HierarchicalScore::new(PassRatio::new(p.0, p.1), PassRatio::new(s.0, s.1))
    }

    #[test]
    fn primary_dominates_secondary() {
        assert_eq!(score((3, 3), (0, 5)).cmp(&score((2, 3), (5, 5))), Ordering::Greater);
    }

    #[test]
    fn secondary_breaks_primary_ties() {
        assert_eq!(score((1, 2), (2, 5)).cmp(&score((1, 2), (3, 5))), Ordering::Less);
    }

    #[test]
    fn equal_as_rationals() {
        assert_eq!(score((1, 2), (2, 4)).cmp(&score((2, 4), (1, 2))), Ordering::Equal);
        assert_eq!(score((1, 2), (2, 4)), score((2, 4), (1, 2)));
    }

    #[test]
    fn absent_equals_zero() {
        assert_eq!(PassRatio::absent().cmp_value(&PassRatio::new(0, 7)), Ordering::Equal);
        assert_eq!(PassRatio::absent().cmp_value(&PassRatio::new(1, 7)), Ordering::Less);
        assert!(score((0, 0), (3, 3)) > score((0, 0), (2, 3)));
    }

    #[test]
    fn absent_is_not_full() {
        assert!(!PassRatio::absent().is_full());
        assert!(!HierarchicalScore::zero().is_perfect());
    }

    #[test]
    fn perfect_requires_every_present_component() {
        assert!(score((3, 3), (5, 5)).is_perfect());
        assert!(score((3, 3), (0, 0)).is_perfect());
        assert!(score((0, 0), (5, 5)).is_perfect());
        assert!(!score((3, 3), (4, 5)).is_perfect());
    }

    #[test]
    fn no_overflow_on_large_counts() {
        let a = PassRatio::new(u64::MAX - 1, u64::MAX);
        let b = PassRatio::new(u64::MAX - 2, u64::MAX - 1);
        assert_eq!(a.cmp_value(&b), Ordering::Greater);
    }

    #[test]
    #[should_panic(expected = "more passes than tests")]
    fn rejects_inverted_fraction() {
        PassRatio::new(3, 2);
    }

    #[test]
    fn display_forms() {
        assert_eq!(PassRatio::new(2, 3).to_string(), "2/3");
        assert_eq!(PassRatio::absent().to_string(), "-/-");
        assert_eq!(score((1, 3), (0, 0)).to_string(), "1/3 | -/-");
    }
}
