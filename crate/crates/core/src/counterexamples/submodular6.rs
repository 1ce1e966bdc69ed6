use num_traits::Zero;

use super::CounterexampleError;
use crate::items::ItemSet;
use crate::model::Instance;
use crate::q;
use crate::valuations::{ValuationClass, ValuationOracle};
use crate::Rational;

/// Item order: `g1, G1, g2, G2, g3, G3`.
const NAMES: [&str; 6] = ["g1", "G1", "g2", "G2", "g3", "G3"];

fn small(i: usize) -> usize {
    2 * i
}

fn large(i: usize) -> usize {
    2 * i + 1
}

fn is_large(g: usize) -> bool {
    g % 2 == 1
}

/// Whether the pair `{g_s, G_l}` (0-based indices) is high for an agent.
fn mixed_pair_high(shifted: bool, s: usize, l: usize) -> bool {
    if shifted {
        s == (l + 1) % 3
    } else {
        s == l
    }
}

/// The case rules, evaluated directly. `shifted` selects the third agent.
pub fn submodular_6_rule(shifted: bool, set: ItemSet) -> Rational {
    let items: Vec<usize> = set.iter().collect();
    match items.len() {
        0 => Rational::zero(),
        1 if is_large(items[0]) => q(2, 3),
        1 => q(1, 3),
        2 => {
            let (a, b) = (items[0], items[1]);
            let high = match (is_large(a), is_large(b)) {
                (true, true) => true,
                (false, false) => false,
                (false, true) => mixed_pair_high(shifted, a / 2, b / 2),
                (true, false) => mixed_pair_high(shifted, b / 2, a / 2),
            };
            if high {
                q(1, 1)
            } else {
                q(2, 3)
            }
        }
        3 if set == ItemSet::from_items([small(0), small(1), small(2)]) => q(1, 1),
        3 => (0..3)
            .map(|skip| submodular_6_rule(shifted, set.without(items[skip])))
            .max()
            .expect("three pairs"),
        _ => q(1, 1),
    }
}

/// The mixed-pair values as a literal table: rows are the two valuation
/// families, columns the pairs `g_i G_j` in the order
/// `g1G1 g1G2 g1G3 g2G2 g2G3 g2G1 g3G3 g3G1 g3G2`.
pub fn submodular_6_pair_table() -> [(ItemSet, [Rational; 2]); 9] {
    let hi = q(1, 1);
    let lo = q(2, 3);
    let pair = |s: usize, l: usize| ItemSet::from_items([small(s), large(l)]);
    [
        (pair(0, 0), [hi, lo]),
        (pair(0, 1), [lo, lo]),
        (pair(0, 2), [lo, hi]),
        (pair(1, 1), [hi, lo]),
        (pair(1, 2), [lo, lo]),
        (pair(1, 0), [lo, hi]),
        (pair(2, 2), [hi, lo]),
        (pair(2, 0), [lo, lo]),
        (pair(2, 1), [lo, hi]),
    ]
}

/// Three agents over six items; the first two share a valuation, the third
/// pairs small and large items with a shifted index. Valuations are stored
/// as 64-entry tables built from [`submodular_6_rule`], then cross-checked
/// against [`submodular_6_pair_table`].
pub fn instance_submodular_6() -> Result<Instance, CounterexampleError> {
    let plain = ValuationOracle::table_from_fn(6, ValuationClass::Submodular, |s| {
        submodular_6_rule(false, s)
    })?;
    let shifted = ValuationOracle::table_from_fn(6, ValuationClass::Submodular, |s| {
        submodular_6_rule(true, s)
    })?;
    for (set, row) in submodular_6_pair_table() {
        for (v, expected) in [&plain, &shifted].into_iter().zip(row) {
            if v.value(set) != expected {
                return Err(CounterexampleError::InvalidParameter(format!(
                    "table disagrees with pair rules at {set}"
                )));
            }
        }
    }
    let names = NAMES.map(String::from).to_vec();
    Ok(
        Instance::new(6, vec![plain.clone(), plain, shifted], "submodular_6")?
            .with_item_names(names)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::{mms_value, MmsBudget};

    fn set(names: &[&str]) -> ItemSet {
        ItemSet::from_items(
            names
                .iter()
                .map(|n| NAMES.iter().position(|x| x == n).unwrap()),
        )
    }

    #[test]
    fn quoted_values() {
        let inst = instance_submodular_6().unwrap();
        assert_eq!(inst.value(0, set(&["g1", "G1"])), q(1, 1));
        assert_eq!(inst.value(2, set(&["g1", "G1"])), q(2, 3));
        assert_eq!(inst.value(2, set(&["g2", "G1"])), q(1, 1));
        for a in 0..3 {
            assert_eq!(inst.value(a, set(&["g1", "g2", "g3"])), q(1, 1));
            assert_eq!(inst.value(a, set(&["G1", "G2"])), q(1, 1));
        }
        assert_eq!(inst.value(0, set(&["G1", "g2", "g3"])), q(2, 3));
        assert_eq!(inst.value(2, set(&["G1", "g2", "g3"])), q(1, 1));
        assert_eq!(inst.value(2, set(&["G3", "g2", "g3"])), q(2, 3));
    }

    #[test]
    fn shares_are_one() {
        let inst = instance_submodular_6().unwrap();
        for a in 0..3 {
            let r = mms_value(inst.valuation(a), inst.ground(), 3, &MmsBudget::default()).unwrap();
            assert_eq!(r.value, q(1, 1));
        }
        for b in [set(&["g1", "G3"]), set(&["g2", "G1"]), set(&["g3", "G2"])] {
            assert_eq!(inst.value(2, b), q(1, 1));
        }
    }
}
