//! Rounding a valuation onto the grid `{0, 1/3, 2/3, 1}`.

use num_traits::Zero;

use super::{ValuationClass, ValuationError, ValuationKind, ValuationOracle};
use crate::items::ItemSet;
use crate::{q, Rational};

/// `0` on the empty set; otherwise `1/3`, `2/3` or `1` according to whether
/// `value` is below `1/2`, in `[1/2, 1)`, or at least `1`.
pub fn round_to_thirds(s: ItemSet, value: Rational) -> Rational {
    if s.is_empty() {
        Rational::zero()
    } else if value < q(1, 2) {
        q(1, 3)
    } else if value < q(1, 1) {
        q(2, 3)
    } else {
        q(1, 1)
    }
}

/// Wraps `v` in the thirds rounding.
///
/// If `v` is monotone, normalized and subadditive, so is the result. The
/// declared class is `Subadditive` when `v` declares a subadditive class and
/// `Unknown` otherwise.
pub fn third_transform(v: &ValuationOracle) -> Result<ValuationOracle, ValuationError> {
    let empty = v.value(ItemSet::EMPTY);
    if !empty.is_zero() {
        return Err(ValuationError::NotNormalized(empty));
    }
    let class = if v.class().is_subadditive() {
        ValuationClass::Subadditive
    } else {
        ValuationClass::Unknown
    };
    ValuationOracle::new(v.m(), ValuationKind::Thirds(Box::new(v.clone())), class)
}
