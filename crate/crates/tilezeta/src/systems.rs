//! Built-in example systems, matching the JSON files shipped in systems/.

use num::rational::BigRational;

use crate::error::Result;
use crate::rational::big_rational;
use crate::substitution::{natural_weights, Color, Mode, WeightedSubstitution};
use crate::weight::WeightValue;

fn exact(n: i64, d: i64) -> WeightValue {
    WeightValue::Exact(big_rational(n, d))
}

/// One letter splitting in half: the binary solenoid's square tiling.
pub fn omega2() -> WeightedSubstitution {
    WeightedSubstitution::try_new(
        vec!["0".into()],
        vec![vec![(Color(0), exact(1, 2)), (Color(0), exact(1, 2))]],
        Mode::Exact,
    )
    .expect("the doubling system is valid")
}

/// Two letters exchanging a thin middle strip: 4/9, 1/9, 4/9 with the
/// middle child switching sign. Its base group is dense.
pub fn plus_minus() -> WeightedSubstitution {
    WeightedSubstitution::try_new(
        vec!["+".into(), "-".into()],
        vec![
            vec![
                (Color(0), exact(4, 9)),
                (Color(1), exact(1, 9)),
                (Color(0), exact(4, 9)),
            ],
            vec![
                (Color(1), exact(4, 9)),
                (Color(0), exact(1, 9)),
                (Color(1), exact(4, 9)),
            ],
        ],
        Mode::Exact,
    )
    .expect("the strip-exchange system is valid")
}

/// The Thue-Morse rule 0 -> 01, 1 -> 10 with even weights.
pub fn thue_morse() -> WeightedSubstitution {
    WeightedSubstitution::try_new(
        vec!["0".into(), "1".into()],
        vec![
            vec![(Color(0), exact(1, 2)), (Color(1), exact(1, 2))],
            vec![(Color(1), exact(1, 2)), (Color(0), exact(1, 2))],
        ],
        Mode::Exact,
    )
    .expect("the Thue-Morse system is valid")
}

/// The Fibonacci rule a -> ab, b -> a with natural (eigenvector) weights.
pub fn fibonacci() -> WeightedSubstitution {
    natural_weights(
        vec!["a".into(), "b".into()],
        vec![vec![Color(0), Color(1)], vec![Color(0)]],
    )
    .expect("the Fibonacci system is valid")
}

/// Two letters with identical rules weighted p and 1-p: every cylinder
/// weight is a product of powers of p and 1-p, so for p other than 1/2 the
/// left and right boundary scales disagree.
pub fn biased(p: &BigRational) -> Result<WeightedSubstitution> {
    let q = BigRational::from_integer(1.into()) - p;
    WeightedSubstitution::try_new(
        vec!["1".into(), "2".into()],
        vec![
            vec![
                (Color(0), WeightValue::Exact(p.clone())),
                (Color(1), WeightValue::Exact(q.clone())),
            ],
            vec![
                (Color(0), WeightValue::Exact(p.clone())),
                (Color(1), WeightValue::Exact(q)),
            ],
        ],
        Mode::Exact,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_bundled_systems_validate_and_are_primitive() {
        for ws in [omega2(), plus_minus(), thue_morse(), fibonacci()] {
            assert!(ws.validate().is_valid());
            assert!(ws.primitivity().is_some());
        }
        let b = biased(&big_rational(1, 3)).unwrap();
        assert!(b.validate().is_valid());
        assert!(b.primitivity().is_some());
    }

    #[test]
    fn biased_rejects_degenerate_probabilities() {
        assert!(biased(&big_rational(0, 1)).is_err());
        assert!(biased(&big_rational(1, 1)).is_err());
        assert!(biased(&big_rational(3, 2)).is_err());
    }
}
