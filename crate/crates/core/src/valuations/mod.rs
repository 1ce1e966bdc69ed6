//! Valuation oracles: monotone, normalized set functions over item sets.
//!
//! A [`ValuationOracle`] pairs a concrete function family with a declared
//! class from the complement-free hierarchy. The declaration is a claim, not
//! a checked fact; the checkers in [`classes`] audit it at desk scale.

pub mod classes;
pub mod random;
pub mod transform;

use num_traits::Zero;
use thiserror::Error;

use crate::items::{ItemSet, MAX_ITEMS};
use crate::{q, Rational};

pub use classes::{
    is_monotone, is_subadditive, is_submodular, CheckMode, CheckReport, MonotoneWitness,
    SubadditiveWitness, SubmodularWitness,
};
pub use random::{random_valuation, GeneratedClass, GeneratorParams};
pub use transform::third_transform;

/// Largest item count for which a dense [`TableValuation`] is allowed.
pub const MAX_TABLE_ITEMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValuationError {
    #[error("item count {0} exceeds the supported maximum")]
    TooManyItems(usize),
    #[error("negative value {value} at index {index}")]
    Negative { index: usize, value: Rational },
    #[error("XOS valuation needs at least one clause")]
    NoClauses,
    #[error("clause {clause} has {found} weights, expected {expected}")]
    ClauseLength {
        clause: usize,
        expected: usize,
        found: usize,
    },
    #[error("table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("valuation is not normalized: v(empty) = {0}")]
    NotNormalized(Rational),
    #[error("valuation is not monotone: v({subset}) = {low_value} > v({superset}) = {high_value}")]
    NotMonotone {
        subset: ItemSet,
        superset: ItemSet,
        low_value: Rational,
        high_value: Rational,
    },
    #[error("reference bundles must be pairwise disjoint and cover all {m} items")]
    BadBundles { m: usize },
    #[error("inner function {index} covers {found} items, its bundle has {expected}")]
    InnerSize {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("coverage valuation supports at most 64 ground elements, got {0}")]
    TooManyElements(usize),
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("function is defined over a different item count than the declared {expected}")]
    WrongItemCount { expected: usize },
}

/// Position in the complement-free hierarchy
/// (additive ⊂ submodular ⊂ XOS ⊂ subadditive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValuationClass {
    Additive,
    Submodular,
    Xos,
    Subadditive,
    Unknown,
}

impl ValuationClass {
    pub fn name(self) -> &'static str {
        match self {
            ValuationClass::Additive => "additive",
            ValuationClass::Submodular => "submodular",
            ValuationClass::Xos => "xos",
            ValuationClass::Subadditive => "subadditive",
            ValuationClass::Unknown => "unknown",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "additive" => ValuationClass::Additive,
            "submodular" => ValuationClass::Submodular,
            "xos" => ValuationClass::Xos,
            "subadditive" => ValuationClass::Subadditive,
            "unknown" => ValuationClass::Unknown,
            _ => return None,
        })
    }

    /// True if membership in `self` implies subadditivity.
    pub fn is_subadditive(self) -> bool {
        self != ValuationClass::Unknown
    }
}

fn check_nonnegative(values: &[Rational]) -> Result<(), ValuationError> {
    match values.iter().position(|v| *v < Rational::zero()) {
        Some(index) => Err(ValuationError::Negative {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// `v(S) = sum of weights over S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveValuation {
    weights: Vec<Rational>,
}

impl AdditiveValuation {
    pub fn new(weights: Vec<Rational>) -> Result<Self, ValuationError> {
        if weights.len() > MAX_ITEMS {
            return Err(ValuationError::TooManyItems(weights.len()));
        }
        check_nonnegative(&weights)?;
        Ok(AdditiveValuation { weights })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        s.iter()
            .filter(|&i| i < self.weights.len())
            .map(|i| self.weights[i])
            .sum()
    }
}

/// `v(S) = max over clauses of clause(S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XosValuation {
    clauses: Vec<AdditiveValuation>,
}

impl XosValuation {
    pub fn new(clauses: Vec<Vec<Rational>>) -> Result<Self, ValuationError> {
        let first = clauses.first().ok_or(ValuationError::NoClauses)?;
        let m = first.len();
        let clauses = clauses
            .into_iter()
            .enumerate()
            .map(|(clause, w)| {
                if w.len() != m {
                    return Err(ValuationError::ClauseLength {
                        clause,
                        expected: m,
                        found: w.len(),
                    });
                }
                AdditiveValuation::new(w)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(XosValuation { clauses })
    }

    pub fn clauses(&self) -> &[AdditiveValuation] {
        &self.clauses
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        self.clauses
            .iter()
            .map(|c| c.value(s))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// `v(S) = min(budget, sum of weights over S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetAdditiveValuation {
    weights: AdditiveValuation,
    budget: Rational,
}

impl BudgetAdditiveValuation {
    pub fn new(weights: Vec<Rational>, budget: Rational) -> Result<Self, ValuationError> {
        if budget < Rational::zero() {
            return Err(ValuationError::Negative {
                index: weights.len(),
                value: budget,
            });
        }
        Ok(BudgetAdditiveValuation {
            weights: AdditiveValuation::new(weights)?,
            budget,
        })
    }

    pub fn weights(&self) -> &[Rational] {
        self.weights.weights()
    }

    pub fn budget(&self) -> Rational {
        self.budget
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        self.weights.value(s).min(self.budget)
    }
}

/// Weighted coverage: item `i` covers the ground elements in `covers[i]`;
/// `v(S)` is the total weight of elements covered by some item of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageValuation {
    covers: Vec<u64>,
    element_weights: Vec<Rational>,
}

impl CoverageValuation {
    pub fn new(covers: Vec<u64>, element_weights: Vec<Rational>) -> Result<Self, ValuationError> {
        if covers.len() > MAX_ITEMS {
            return Err(ValuationError::TooManyItems(covers.len()));
        }
        if element_weights.len() > 64 {
            return Err(ValuationError::TooManyElements(element_weights.len()));
        }
        check_nonnegative(&element_weights)?;
        let known = if element_weights.len() == 64 {
            u64::MAX
        } else {
            (1u64 << element_weights.len()) - 1
        };
        let covers = covers.into_iter().map(|c| c & known).collect();
        Ok(CoverageValuation {
            covers,
            element_weights,
        })
    }

    pub fn covers(&self) -> &[u64] {
        &self.covers
    }

    pub fn element_weights(&self) -> &[Rational] {
        &self.element_weights
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        let covered = s
            .iter()
            .filter(|&i| i < self.covers.len())
            .fold(0u64, |acc, i| acc | self.covers[i]);
        (0..self.element_weights.len())
            .filter(|e| covered & (1u64 << e) != 0)
            .map(|e| self.element_weights[e])
            .sum()
    }
}

/// A dense table of values indexed by bitmask, for `m <= 16`.
/// Construction rejects tables that are negative, not normalized or not monotone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableValuation {
    m: usize,
    values: Vec<Rational>,
}

impl TableValuation {
    pub fn new(m: usize, values: Vec<Rational>) -> Result<Self, ValuationError> {
        if m > MAX_TABLE_ITEMS {
            return Err(ValuationError::TooManyItems(m));
        }
        let expected = 1usize << m;
        if values.len() != expected {
            return Err(ValuationError::TableSize {
                expected,
                found: values.len(),
            });
        }
        check_nonnegative(&values)?;
        if !values[0].is_zero() {
            return Err(ValuationError::NotNormalized(values[0]));
        }
        for s in 0..expected {
            for g in 0..m {
                let t = s | (1 << g);
                if t != s && values[s] > values[t] {
                    return Err(ValuationError::NotMonotone {
                        subset: ItemSet::from_bits(s as u32),
                        superset: ItemSet::from_bits(t as u32),
                        low_value: values[s],
                        high_value: values[t],
                    });
                }
            }
        }
        Ok(TableValuation { m, values })
    }

    /// Tabulates `f` over all subsets of `{0, .., m-1}`.
    pub fn from_fn<F>(m: usize, mut f: F) -> Result<Self, ValuationError>
    where
        F: FnMut(ItemSet) -> Rational,
    {
        if m > MAX_TABLE_ITEMS {
            return Err(ValuationError::TooManyItems(m));
        }
        let values = (0..1u32 << m).map(|b| f(ItemSet::from_bits(b))).collect();
        TableValuation::new(m, values)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        self.values[(s.bits() & ItemSet::full(self.m).bits()) as usize]
    }
}

/// `v(B) = max_i f_i(B ∩ R_i)` for reference bundles `R_i` partitioning the
/// items and inner tables `f_i` indexed by the members of `R_i` in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleMaxValuation {
    m: usize,
    bundles: Vec<ItemSet>,
    inner: Vec<TableValuation>,
}

impl BundleMaxValuation {
    pub fn new(
        m: usize,
        bundles: Vec<ItemSet>,
        inner: Vec<TableValuation>,
    ) -> Result<Self, ValuationError> {
        if m > MAX_ITEMS {
            return Err(ValuationError::TooManyItems(m));
        }
        let mut covered = ItemSet::EMPTY;
        for &b in &bundles {
            if !b.is_disjoint(covered) {
                return Err(ValuationError::BadBundles { m });
            }
            covered = covered | b;
        }
        if covered != ItemSet::full(m) || bundles.len() != inner.len() {
            return Err(ValuationError::BadBundles { m });
        }
        for (index, (b, f)) in bundles.iter().zip(&inner).enumerate() {
            if b.len() != f.m() {
                return Err(ValuationError::InnerSize {
                    index,
                    expected: b.len(),
                    found: f.m(),
                });
            }
        }
        Ok(BundleMaxValuation { m, bundles, inner })
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn inner(&self) -> &[TableValuation] {
        &self.inner
    }

    /// `f_i(B ∩ R_i)`.
    pub fn inner_value(&self, i: usize, s: ItemSet) -> Rational {
        let local = s.compress(self.bundles[i]);
        self.inner[i].values()[local as usize]
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        (0..self.bundles.len())
            .map(|i| self.inner_value(i, s))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// `v(S) = 0` if `S` is empty, `1` if `S` contains one of the blocks, `1/2` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCapValuation {
    blocks: Vec<ItemSet>,
}

impl BlockCapValuation {
    pub fn new(blocks: Vec<ItemSet>) -> Result<Self, ValuationError> {
        if let Some(i) = blocks.iter().position(|b| b.is_empty()) {
            return Err(ValuationError::EmptyBlock(i));
        }
        Ok(BlockCapValuation { blocks })
    }

    pub fn blocks(&self) -> &[ItemSet] {
        &self.blocks
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        if s.is_empty() {
            Rational::zero()
        } else if self.blocks.iter().any(|b| b.is_subset(s)) {
            q(1, 1)
        } else {
            q(1, 2)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValuationKind {
    Additive(AdditiveValuation),
    Xos(XosValuation),
    BudgetAdditive(BudgetAdditiveValuation),
    Coverage(CoverageValuation),
    Table(TableValuation),
    BundleMax(BundleMaxValuation),
    BlockCap(BlockCapValuation),
    /// The 0 / 1/3 / 2/3 / 1 rounding of another oracle, see [`third_transform`].
    Thirds(Box<ValuationOracle>),
}

/// A valuation function over `m` items together with its declared class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationOracle {
    m: usize,
    class: ValuationClass,
    kind: ValuationKind,
}

impl ValuationOracle {
    pub fn new(
        m: usize,
        kind: ValuationKind,
        class: ValuationClass,
    ) -> Result<Self, ValuationError> {
        if m > MAX_ITEMS {
            return Err(ValuationError::TooManyItems(m));
        }
        let fits = match &kind {
            ValuationKind::Additive(a) => a.weights().len() == m,
            ValuationKind::Xos(x) => x.clauses()[0].weights().len() == m,
            ValuationKind::BudgetAdditive(b) => b.weights().len() == m,
            ValuationKind::Coverage(c) => c.covers().len() == m,
            ValuationKind::Table(t) => t.m() == m,
            ValuationKind::BundleMax(b) => b.m == m,
            ValuationKind::BlockCap(b) => b.blocks().iter().all(|x| x.span() <= m),
            ValuationKind::Thirds(inner) => inner.m() == m,
        };
        if !fits {
            return Err(ValuationError::WrongItemCount { expected: m });
        }
        Ok(ValuationOracle { m, class, kind })
    }

    /// Additive oracle.
    ///
    /// # Panics
    /// On negative weights or more than 32 items.
    pub fn additive(weights: Vec<Rational>) -> Self {
        let m = weights.len();
        let kind = ValuationKind::Additive(AdditiveValuation::new(weights).expect("valid weights"));
        ValuationOracle {
            m,
            class: ValuationClass::Additive,
            kind,
        }
    }

    /// XOS oracle, max of additive clauses.
    ///
    /// # Panics
    /// On an empty clause list, ragged clauses or negative weights.
    pub fn xos(clauses: Vec<Vec<Rational>>) -> Self {
        let x = XosValuation::new(clauses).expect("valid clauses");
        let m = x.clauses()[0].weights().len();
        ValuationOracle {
            m,
            class: ValuationClass::Xos,
            kind: ValuationKind::Xos(x),
        }
    }

    /// Table oracle with the given declared class.
    pub fn table(
        m: usize,
        values: Vec<Rational>,
        class: ValuationClass,
    ) -> Result<Self, ValuationError> {
        let t = TableValuation::new(m, values)?;
        Ok(ValuationOracle {
            m,
            class,
            kind: ValuationKind::Table(t),
        })
    }

    /// Tabulates `f` and declares `class`.
    pub fn table_from_fn<F>(m: usize, class: ValuationClass, f: F) -> Result<Self, ValuationError>
    where
        F: FnMut(ItemSet) -> Rational,
    {
        let t = TableValuation::from_fn(m, f)?;
        Ok(ValuationOracle {
            m,
            class,
            kind: ValuationKind::Table(t),
        })
    }

    /// `1` on every nonempty set (unit demand with unit weights).
    pub fn unit(m: usize) -> Self {
        let clauses = (0..m.max(1))
            .map(|g| {
                (0..m)
                    .map(|i| if i == g { q(1, 1) } else { q(0, 1) })
                    .collect()
            })
            .collect();
        let mut v = ValuationOracle::xos(clauses);
        v.m = m;
        v.class = ValuationClass::Submodular;
        v
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn class(&self) -> ValuationClass {
        self.class
    }

    pub fn kind(&self) -> &ValuationKind {
        &self.kind
    }

    /// Same function, different declared class.
    pub fn with_class(mut self, class: ValuationClass) -> Self {
        self.class = class;
        self
    }

    pub fn ground(&self) -> ItemSet {
        ItemSet::full(self.m)
    }

    pub fn value(&self, s: ItemSet) -> Rational {
        match &self.kind {
            ValuationKind::Additive(a) => a.value(s),
            ValuationKind::Xos(x) => x.value(s),
            ValuationKind::BudgetAdditive(b) => b.value(s),
            ValuationKind::Coverage(c) => c.value(s),
            ValuationKind::Table(t) => t.value(s),
            ValuationKind::BundleMax(b) => b.value(s),
            ValuationKind::BlockCap(b) => b.value(s),
            ValuationKind::Thirds(inner) => transform::round_to_thirds(s, inner.value(s)),
        }
    }

    /// Values of all `2^m` subsets, indexed by bitmask, for `m <= 16`.
    pub fn tabulate(&self) -> Option<Vec<Rational>> {
        if self.m > MAX_TABLE_ITEMS {
            return None;
        }
        if let ValuationKind::Table(t) = &self.kind {
            return Some(t.values().to_vec());
        }
        Some(
            (0..1u32 << self.m)
                .map(|b| self.value(ItemSet::from_bits(b)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        let s = ItemSet::from_items([0, 2]);
        let add = ValuationOracle::additive(vec![q(1, 2), q(1, 1), q(1, 3)]);
        assert_eq!(add.value(s), q(5, 6));

        let xos = ValuationOracle::xos(vec![
            vec![q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(1, 1)],
        ]);
        assert_eq!(xos.value(s), q(1, 1));
        assert_eq!(xos.value(ItemSet::full(3)), q(2, 1));

        let budget = BudgetAdditiveValuation::new(vec![q(2, 1), q(2, 1)], q(3, 1)).unwrap();
        assert_eq!(budget.value(ItemSet::full(2)), q(3, 1));

        let cov =
            CoverageValuation::new(vec![0b011, 0b110], vec![q(1, 1), q(2, 1), q(4, 1)]).unwrap();
        assert_eq!(cov.value(ItemSet::full(2)), q(7, 1));
        assert_eq!(cov.value(ItemSet::singleton(0)), q(3, 1));

        let unit = ValuationOracle::unit(3);
        assert_eq!(unit.value(ItemSet::EMPTY), q(0, 1));
        assert_eq!(unit.value(ItemSet::full(3)), q(1, 1));
        assert_eq!(unit.class(), ValuationClass::Submodular);
    }

    #[test]
    fn table_constructor_rejects_bad_tables() {
        let not_monotone = vec![q(0, 1), q(1, 1), q(0, 1), q(1, 2)];
        assert!(matches!(
            TableValuation::new(2, not_monotone),
            Err(ValuationError::NotMonotone { .. })
        ));
        assert!(matches!(
            TableValuation::new(1, vec![q(1, 1), q(1, 1)]),
            Err(ValuationError::NotNormalized(_))
        ));
        assert!(matches!(
            TableValuation::new(2, vec![q(0, 1)]),
            Err(ValuationError::TableSize { .. })
        ));
    }

    #[test]
    fn bundle_max_takes_max_over_bundles() {
        let r0 = ItemSet::from_items([0, 1]);
        let r1 = ItemSet::from_items([2, 3]);
        let f = TableValuation::new(2, vec![q(0, 1), q(1, 2), q(1, 2), q(1, 1)]).unwrap();
        let v = BundleMaxValuation::new(4, vec![r0, r1], vec![f.clone(), f]).unwrap();
        assert_eq!(v.value(ItemSet::from_items([0, 2])), q(1, 2));
        assert_eq!(v.value(ItemSet::from_items([0, 1, 2])), q(1, 1));
        assert!(BundleMaxValuation::new(4, vec![r0], vec![]).is_err());
    }

    #[test]
    fn block_cap_values() {
        let v = BlockCapValuation::new(vec![ItemSet::from_items([0, 1])]).unwrap();
        assert_eq!(v.value(ItemSet::EMPTY), q(0, 1));
        assert_eq!(v.value(ItemSet::singleton(0)), q(1, 2));
        assert_eq!(v.value(ItemSet::from_items([0, 1, 2])), q(1, 1));
    }
}
