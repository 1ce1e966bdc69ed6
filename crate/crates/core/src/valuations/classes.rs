//! Exhaustive and structured membership checks for the complement-free hierarchy.
//!
//! Exhaustive checks evaluate the whole table once and compare values scaled
//! to a common denominator, so every comparison is exact integer arithmetic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ValuationKind, ValuationOracle, MAX_TABLE_ITEMS};
use crate::items::ItemSet;
use crate::Rational;

/// Largest item count for which subadditivity and submodularity are checked
/// exhaustively.
pub const MAX_EXHAUSTIVE_PAIRS: usize = 13;

const SAMPLES: usize = 20_000;
const SAMPLE_SEED: u64 = 0x5eed_cafe;

/// How a check reached its verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// Every pair or triple in the stated space was evaluated.
    Exhaustive,
    /// Exact, via a structural argument plus exhaustive sub-checks
    /// (e.g. per reference bundle, or membership by construction).
    Structured,
    /// Random sampling; a `true` verdict is not a proof.
    Sampled { samples: usize },
}

/// Outcome of a class check: the mode, how many configurations were examined,
/// and a violating witness if one was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport<W> {
    pub mode: CheckMode,
    pub checked: u64,
    pub witness: Option<W>,
}

impl<W> CheckReport<W> {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }

    fn structured(checked: u64) -> Self {
        CheckReport {
            mode: CheckMode::Structured,
            checked,
            witness: None,
        }
    }

    fn map<V>(self, f: impl FnOnce(W) -> V) -> CheckReport<V> {
        CheckReport {
            mode: self.mode,
            checked: self.checked,
            witness: self.witness.map(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneWitness {
    pub subset: ItemSet,
    pub superset: ItemSet,
    pub subset_value: Rational,
    pub superset_value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubadditiveWitness {
    pub first: ItemSet,
    pub second: ItemSet,
    pub first_value: Rational,
    pub second_value: Rational,
    pub union_value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmodularWitness {
    pub smaller: ItemSet,
    pub larger: ItemSet,
    pub item: usize,
    pub smaller_marginal: Rational,
    pub larger_marginal: Rational,
}

/// Values of a table scaled to integers over a common denominator.
struct ScaledTable {
    raw: Vec<Rational>,
    scaled: Vec<i128>,
}

impl ScaledTable {
    fn new(raw: Vec<Rational>) -> Option<Self> {
        let mut lcm: i128 = 1;
        for v in &raw {
            let d = i128::from(*v.denom());
            lcm = num_integer::lcm(lcm, d);
            if lcm > 1 << 60 {
                return None;
            }
        }
        let scaled = raw
            .iter()
            .map(|v| i128::from(*v.numer()) * (lcm / i128::from(*v.denom())))
            .collect();
        Some(ScaledTable { raw, scaled })
    }
}

/// A table accessor that compares exactly, scaled when possible.
enum Values {
    Scaled(ScaledTable),
    Exact(Vec<Rational>),
}

impl Values {
    fn of(v: &ValuationOracle) -> Option<Values> {
        let raw = v.tabulate()?;
        Some(match ScaledTable::new(raw.clone()) {
            Some(t) => Values::Scaled(t),
            None => Values::Exact(raw),
        })
    }

    fn raw(&self, s: u32) -> Rational {
        match self {
            Values::Scaled(t) => t.raw[s as usize],
            Values::Exact(r) => r[s as usize],
        }
    }

    /// `v(a) + v(b) < v(c)`
    fn sum_below(&self, a: u32, b: u32, c: u32) -> bool {
        match self {
            Values::Scaled(t) => t.scaled[a as usize] + t.scaled[b as usize] < t.scaled[c as usize],
            Values::Exact(r) => r[a as usize] + r[b as usize] < r[c as usize],
        }
    }

    /// `v(a) + v(b) < v(c) + v(d)`
    fn sums_below(&self, a: u32, b: u32, c: u32, d: u32) -> bool {
        match self {
            Values::Scaled(t) => {
                t.scaled[a as usize] + t.scaled[b as usize]
                    < t.scaled[c as usize] + t.scaled[d as usize]
            }
            Values::Exact(r) => r[a as usize] + r[b as usize] < r[c as usize] + r[d as usize],
        }
    }

    fn greater(&self, a: u32, b: u32) -> bool {
        match self {
            Values::Scaled(t) => t.scaled[a as usize] > t.scaled[b as usize],
            Values::Exact(r) => r[a as usize] > r[b as usize],
        }
    }
}

fn monotone_table(values: &Values, m: usize) -> CheckReport<MonotoneWitness> {
    let mut checked = 0;
    for s in 0..1u32 << m {
        for g in 0..m {
            let t = s | (1 << g);
            if t == s {
                continue;
            }
            checked += 1;
            if values.greater(s, t) {
                return CheckReport {
                    mode: CheckMode::Exhaustive,
                    checked,
                    witness: Some(MonotoneWitness {
                        subset: ItemSet::from_bits(s),
                        superset: ItemSet::from_bits(t),
                        subset_value: values.raw(s),
                        superset_value: values.raw(t),
                    }),
                };
            }
        }
    }
    CheckReport {
        mode: CheckMode::Exhaustive,
        checked,
        witness: None,
    }
}

fn subadditive_table(values: &Values, m: usize) -> CheckReport<SubadditiveWitness> {
    let size = 1u32 << m;
    let mut checked = 0u64;
    for s in 0..size {
        for t in 0..size {
            checked += 1;
            if values.sum_below(s, t, s | t) {
                return CheckReport {
                    mode: CheckMode::Exhaustive,
                    checked,
                    witness: Some(SubadditiveWitness {
                        first: ItemSet::from_bits(s),
                        second: ItemSet::from_bits(t),
                        first_value: values.raw(s),
                        second_value: values.raw(t),
                        union_value: values.raw(s | t),
                    }),
                };
            }
        }
    }
    CheckReport {
        mode: CheckMode::Exhaustive,
        checked,
        witness: None,
    }
}

fn submodular_table(values: &Values, m: usize) -> CheckReport<SubmodularWitness> {
    let full = ItemSet::full(m);
    let mut checked = 0u64;
    for g in 0..m {
        let gbit = 1u32 << g;
        for t in full.without(g).subsets() {
            let t = t.bits();
            for s in ItemSet::from_bits(t).subsets() {
                let s = s.bits();
                checked += 1;
                // v(S+g) - v(S) < v(T+g) - v(T)  <=>  v(S+g) + v(T) < v(T+g) + v(S)
                if values.sums_below(s | gbit, t, t | gbit, s) {
                    return CheckReport {
                        mode: CheckMode::Exhaustive,
                        checked,
                        witness: Some(SubmodularWitness {
                            smaller: ItemSet::from_bits(s),
                            larger: ItemSet::from_bits(t),
                            item: g,
                            smaller_marginal: values.raw(s | gbit) - values.raw(s),
                            larger_marginal: values.raw(t | gbit) - values.raw(t),
                        }),
                    };
                }
            }
        }
    }
    CheckReport {
        mode: CheckMode::Exhaustive,
        checked,
        witness: None,
    }
}

fn table_oracle(m: usize, values: Vec<Rational>) -> ValuationOracle {
    // Inner tables of a bundle-max valuation are validated at construction.
    ValuationOracle {
        m,
        class: super::ValuationClass::Unknown,
        kind: ValuationKind::Table(super::TableValuation { m, values }),
    }
}

fn random_set(rng: &mut ChaCha8Rng, m: usize) -> ItemSet {
    ItemSet::from_bits(rng.gen::<u32>() & ItemSet::full(m).bits())
}

/// Checks `v(S) <= v(T)` for all `S ⊆ T`.
///
/// For `m <= 16` every covering pair `(S, S ∪ {g})` is checked, so a witness,
/// if any, differs by a single item. Bundle-max oracles are checked per inner
/// function; closed-form families are monotone by construction; anything else
/// is sampled.
pub fn is_monotone(v: &ValuationOracle) -> CheckReport<MonotoneWitness> {
    let m = v.m();
    if m <= MAX_TABLE_ITEMS {
        let values = Values::of(v).expect("table fits");
        return monotone_table(&values, m);
    }
    match v.kind() {
        ValuationKind::BundleMax(b) => {
            let mut checked = 0;
            for (r, f) in b.bundles().iter().zip(b.inner()) {
                let inner = table_oracle(f.m(), f.values().to_vec());
                let report = is_monotone(&inner);
                checked += report.checked;
                if let Some(w) = report.witness {
                    return CheckReport {
                        mode: CheckMode::Structured,
                        checked,
                        witness: Some(MonotoneWitness {
                            subset: ItemSet::expand(w.subset.bits(), *r),
                            superset: ItemSet::expand(w.superset.bits(), *r),
                            ..w
                        }),
                    };
                }
            }
            CheckReport::structured(checked)
        }
        ValuationKind::Additive(_)
        | ValuationKind::Xos(_)
        | ValuationKind::BudgetAdditive(_)
        | ValuationKind::Coverage(_)
        | ValuationKind::BlockCap(_) => CheckReport::structured(0),
        ValuationKind::Thirds(inner) => {
            // Rounding to thirds is order preserving.
            let mut report = is_monotone(inner);
            if report.mode == CheckMode::Exhaustive {
                report.mode = CheckMode::Structured;
            }
            report.witness = report.witness.map(|w| MonotoneWitness {
                subset_value: v.value(w.subset),
                superset_value: v.value(w.superset),
                ..w
            });
            report
        }
        ValuationKind::Table(_) => unreachable!("tables have m <= 16"),
    }
}

/// Checks `v(S) + v(T) >= v(S ∪ T)`.
///
/// For `m <= 13` all `4^m` ordered pairs are checked. For a bundle-max oracle
/// each inner function is checked exhaustively on its own bundle, which is
/// exact: `v(S ∪ T) = f_i((S ∪ T) ∩ R_i) <= f_i(S ∩ R_i) + f_i(T ∩ R_i) <= v(S) + v(T)`.
pub fn is_subadditive(v: &ValuationOracle) -> CheckReport<SubadditiveWitness> {
    let m = v.m();
    if let ValuationKind::BundleMax(b) = v.kind() {
        return bundle_max_subadditive(b);
    }
    if m <= MAX_EXHAUSTIVE_PAIRS {
        let values = Values::of(v).expect("table fits");
        return subadditive_table(&values, m);
    }
    match v.kind() {
        ValuationKind::Additive(_)
        | ValuationKind::Xos(_)
        | ValuationKind::BudgetAdditive(_)
        | ValuationKind::Coverage(_)
        | ValuationKind::BlockCap(_) => CheckReport::structured(0),
        ValuationKind::Thirds(inner)
            if is_subadditive(inner).holds() && is_monotone(inner).holds() =>
        {
            CheckReport::structured(0)
        }
        _ => sampled_subadditive(v),
    }
}

/// Per-bundle exhaustive check of a bundle-max valuation.
pub fn bundle_max_subadditive(b: &super::BundleMaxValuation) -> CheckReport<SubadditiveWitness> {
    let mut checked = 0;
    for (r, f) in b.bundles().iter().zip(b.inner()) {
        let inner = table_oracle(f.m(), f.values().to_vec());
        let values = Values::of(&inner).expect("inner table fits");
        let report = subadditive_table(&values, f.m());
        checked += report.checked;
        if report.witness.is_some() {
            let r = *r;
            return CheckReport {
                mode: CheckMode::Structured,
                ..report.map(|w| SubadditiveWitness {
                    first: ItemSet::expand(w.first.bits(), r),
                    second: ItemSet::expand(w.second.bits(), r),
                    ..w
                })
            }
            .with_checked(checked);
        }
    }
    CheckReport::structured(checked)
}

impl<W> CheckReport<W> {
    fn with_checked(mut self, checked: u64) -> Self {
        self.checked = checked;
        self
    }
}

fn sampled_subadditive(v: &ValuationOracle) -> CheckReport<SubadditiveWitness> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    for k in 0..SAMPLES {
        let s = random_set(&mut rng, v.m());
        let t = random_set(&mut rng, v.m());
        let (vs, vt, vu) = (v.value(s), v.value(t), v.value(s | t));
        if vs + vt < vu {
            return CheckReport {
                mode: CheckMode::Sampled { samples: k + 1 },
                checked: k as u64 + 1,
                witness: Some(SubadditiveWitness {
                    first: s,
                    second: t,
                    first_value: vs,
                    second_value: vt,
                    union_value: vu,
                }),
            };
        }
    }
    CheckReport {
        mode: CheckMode::Sampled { samples: SAMPLES },
        checked: SAMPLES as u64,
        witness: None,
    }
}

/// Checks the marginal form `v(S ∪ {g}) - v(S) >= v(T ∪ {g}) - v(T)` for
/// `S ⊆ T ⊆ M \ {g}`.
///
/// For `m <= 13` all `m * 3^(m-1)` triples are checked. Additive,
/// budget-additive and coverage oracles are submodular by construction.
pub fn is_submodular(v: &ValuationOracle) -> CheckReport<SubmodularWitness> {
    let m = v.m();
    if m <= MAX_EXHAUSTIVE_PAIRS {
        let values = Values::of(v).expect("table fits");
        return submodular_table(&values, m);
    }
    match v.kind() {
        ValuationKind::Additive(_)
        | ValuationKind::BudgetAdditive(_)
        | ValuationKind::Coverage(_) => CheckReport::structured(0),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
            for k in 0..SAMPLES {
                let larger = random_set(&mut rng, m);
                let smaller = ItemSet::from_bits(larger.bits() & rng.gen::<u32>());
                let item = rng.gen_range(0..m);
                if larger.contains(item) {
                    continue;
                }
                let ms = v.value(smaller.with(item)) - v.value(smaller);
                let ml = v.value(larger.with(item)) - v.value(larger);
                if ms < ml {
                    return CheckReport {
                        mode: CheckMode::Sampled { samples: k + 1 },
                        checked: k as u64 + 1,
                        witness: Some(SubmodularWitness {
                            smaller,
                            larger,
                            item,
                            smaller_marginal: ms,
                            larger_marginal: ml,
                        }),
                    };
                }
            }
            CheckReport {
                mode: CheckMode::Sampled { samples: SAMPLES },
                checked: SAMPLES as u64,
                witness: None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;
    use crate::valuations::{ValuationClass, ValuationOracle};

    #[test]
    fn additive_passes_everything() {
        let v = ValuationOracle::additive(vec![q(1, 1), q(2, 3), q(0, 1), q(5, 2)]);
        assert!(is_monotone(&v).holds());
        assert!(is_subadditive(&v).holds());
        let sub = is_submodular(&v);
        assert!(sub.holds());
        assert_eq!(sub.checked, 4 * 27);
    }

    #[test]
    fn forced_monotonicity_violation() {
        // v({0}) = 1, v({0,1}) = 1/2; bypass the table constructor's own check.
        let values = vec![q(0, 1), q(1, 1), q(0, 1), q(1, 2)];
        let v = table_oracle(2, values);
        let w = is_monotone(&v).witness.expect("violation");
        assert_eq!(w.subset, ItemSet::from_items([0]));
        assert_eq!(w.superset, ItemSet::from_items([0, 1]));
    }

    #[test]
    fn forced_subadditivity_violation() {
        let v = ValuationOracle::table(
            2,
            vec![q(0, 1), q(1, 4), q(1, 4), q(1, 1)],
            ValuationClass::Unknown,
        )
        .unwrap();
        let report = is_subadditive(&v);
        let w = report.witness.expect("violation");
        assert_eq!(
            (w.first, w.second),
            (ItemSet::singleton(0), ItemSet::singleton(1))
        );
        assert_eq!(w.first_value + w.second_value, q(1, 2));
    }

    #[test]
    fn exhaustive_pair_count() {
        let v = ValuationOracle::unit(5);
        let r = is_subadditive(&v);
        assert!(r.holds());
        assert_eq!(r.mode, CheckMode::Exhaustive);
        assert_eq!(r.checked, 4u64.pow(5));
    }

    #[test]
    fn large_closed_form_families_use_structure() {
        let v = ValuationOracle::additive(vec![q(1, 1); 20]);
        assert_eq!(is_subadditive(&v).mode, CheckMode::Structured);
        assert_eq!(is_submodular(&v).mode, CheckMode::Structured);
        assert_eq!(is_monotone(&v).mode, CheckMode::Structured);
    }
}
