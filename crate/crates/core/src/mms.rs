//! Exact maximin shares and α-MMS verification.

use num_traits::Zero;
use thiserror::Error;

use crate::items::ItemSet;
use crate::model::{
    validate_allocation, Allocation, AllocationViolation, DemandVector, Instance, Partition,
    ThresholdVector,
};
use crate::valuations::{ValuationOracle, MAX_TABLE_ITEMS};
use crate::Rational;

/// `μ^P`: the smallest value of a part of `p`.
pub fn min_value(v: &ValuationOracle, p: &Partition) -> Rational {
    p.parts()
        .iter()
        .map(|&part| v.value(part))
        .min()
        .unwrap_or_else(Rational::zero)
}

/// Number of set partitions of `n` labelled items into at most `d` blocks.
pub fn partitions_at_most(n: usize, d: usize) -> u128 {
    // Stirling numbers of the second kind, row by row.
    let d = d.min(n.max(1));
    let mut row = vec![0u128; d + 1];
    row[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; d + 1];
        for k in 1..=d {
            next[k] = (k as u128)
                .saturating_mul(row[k])
                .saturating_add(row[k - 1]);
        }
        row = next;
    }
    row.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Cap on the size of the partition space an exact search may enter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MmsBudget {
    pub max_partitions: u128,
}

impl MmsBudget {
    pub const fn new(max_partitions: u128) -> Self {
        MmsBudget { max_partitions }
    }

    pub const fn unlimited() -> Self {
        MmsBudget {
            max_partitions: u128::MAX,
        }
    }

    pub fn allows(&self, items: usize, d: usize) -> bool {
        partitions_at_most(items, d) <= self.max_partitions
    }
}

impl Default for MmsBudget {
    /// Everything up to 14 items in at most 5 parts.
    fn default() -> Self {
        MmsBudget {
            max_partitions: partitions_at_most(14, 5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MmsError {
    #[error(
        "{items} items into at most {d} parts is {space} partitions, over the budget of {budget}"
    )]
    BudgetExceeded {
        items: usize,
        d: usize,
        space: u128,
        budget: u128,
    },
    #[error("number of parts must be positive")]
    ZeroParts,
    #[error("ground set {ground} has items beyond the valuation's {m}")]
    OutOfRange { ground: ItemSet, m: usize },
}

/// `μ^d(M)` together with a partition attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmsResult {
    pub value: Rational,
    pub witness: Partition,
}

enum Lookup<'a> {
    Table(Vec<Rational>),
    Oracle(&'a ValuationOracle, &'a [usize]),
}

impl Lookup<'_> {
    fn get(&self, local: u32) -> Rational {
        match self {
            Lookup::Table(t) => t[local as usize],
            Lookup::Oracle(v, items) => {
                let set = ItemSet::from_items(
                    items
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| local & (1 << k) != 0)
                        .map(|(_, &g)| g),
                );
                v.value(set)
            }
        }
    }
}

struct Search<'a> {
    lookup: Lookup<'a>,
    n: usize,
    d: usize,
    parts: Vec<u32>,
    best: Option<(Rational, Vec<u32>)>,
}

impl Search<'_> {
    fn rest(&self, k: usize) -> u32 {
        if k >= self.n {
            0
        } else {
            ((1u64 << self.n) - (1u64 << k)) as u32
        }
    }

    /// Largest min-part value any completion of the current prefix can reach.
    fn bound(&self, k: usize, opened: usize) -> Rational {
        let rest = self.rest(k);
        let opened_bound = self.parts[..opened]
            .iter()
            .map(|&p| self.lookup.get(p | rest))
            .min();
        // An unopened part can only receive items from `rest`.
        let fresh_bound = (opened < self.d).then(|| self.lookup.get(rest));
        match (opened_bound, fresh_bound) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => Rational::zero(),
        }
    }

    fn run(&mut self, k: usize, opened: usize) {
        if let Some((best, _)) = &self.best {
            if self.bound(k, opened) <= *best {
                return;
            }
        }
        if k == self.n {
            let value = if opened < self.d {
                Rational::zero()
            } else {
                self.parts
                    .iter()
                    .map(|&p| self.lookup.get(p))
                    .min()
                    .unwrap_or_else(Rational::zero)
            };
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, self.parts.clone()));
            }
            return;
        }
        let limit = (opened + 1).min(self.d);
        for j in 0..limit {
            self.parts[j] |= 1 << k;
            self.run(k + 1, opened.max(j + 1));
            self.parts[j] &= !(1 << k);
        }
    }
}

/// `μ^d(M)`: the largest `min_j v(P_j)` over partitions of `ground` into `d`
/// parts, where parts may be empty.
///
/// Partitions are enumerated as restricted-growth strings over the items of
/// `ground` in ascending order with branch-and-bound pruning; the witness is
/// the first optimum in that order, padded with empty parts to `d`.
pub fn mms_value(
    v: &ValuationOracle,
    ground: ItemSet,
    d: usize,
    budget: &MmsBudget,
) -> Result<MmsResult, MmsError> {
    if d == 0 {
        return Err(MmsError::ZeroParts);
    }
    if ground.span() > v.m() {
        return Err(MmsError::OutOfRange { ground, m: v.m() });
    }
    if d == 1 {
        return Ok(MmsResult {
            value: v.value(ground),
            witness: Partition::whole(ground),
        });
    }
    let items: Vec<usize> = ground.iter().collect();
    let n = items.len();
    let space = partitions_at_most(n, d);
    if space > budget.max_partitions {
        return Err(MmsError::BudgetExceeded {
            items: n,
            d,
            space,
            budget: budget.max_partitions,
        });
    }
    let lookup = if n <= MAX_TABLE_ITEMS {
        Lookup::Table(
            (0..1u32 << n)
                .map(|local| v.value(ItemSet::expand(local, ground)))
                .collect(),
        )
    } else {
        Lookup::Oracle(v, &items)
    };
    let mut search = Search {
        lookup,
        n,
        d,
        parts: vec![0; d],
        best: None,
    };
    search.run(0, 0);
    let (value, parts) = search.best.expect("at least one partition");
    let parts = parts
        .into_iter()
        .map(|local| ItemSet::expand(local, ground))
        .collect();
    Ok(MmsResult {
        value,
        witness: Partition::new(parts, ground).expect("search yields a partition"),
    })
}

/// `μ_i^{d_i}(M)` for every agent.
pub fn mms_values(
    inst: &Instance,
    d: &DemandVector,
    budget: &MmsBudget,
) -> Result<Vec<MmsResult>, VerifyError> {
    if d.len() != inst.agents() {
        return Err(VerifyError::Length {
            agents: inst.agents(),
            found: d.len(),
        });
    }
    inst.valuations()
        .iter()
        .zip(d.as_slice())
        .map(|(v, &di)| mms_value(v, inst.ground(), di, budget).map_err(VerifyError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("malformed allocation: {0}")]
    Allocation(#[from] AllocationViolation),
    #[error("instance has {agents} agents but {found} entries were given")]
    Length { agents: usize, found: usize },
    #[error(transparent)]
    Mms(#[from] MmsError),
}

/// Per-agent outcome of an α-MMS check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub holds: bool,
    /// `v_i(A_i)`.
    pub values: Vec<Rational>,
    /// `α_i · μ_i`.
    pub thresholds: Vec<Rational>,
    /// `v_i(A_i) − α_i · μ_i`.
    pub margins: Vec<Rational>,
}

impl Verification {
    fn build(values: Vec<Rational>, thresholds: Vec<Rational>) -> Self {
        let margins: Vec<Rational> = values.iter().zip(&thresholds).map(|(v, t)| v - t).collect();
        Verification {
            holds: margins.iter().all(|m| *m >= Rational::zero()),
            values,
            thresholds,
            margins,
        }
    }

    /// First agent whose margin is negative.
    pub fn first_violation(&self) -> Option<usize> {
        self.margins.iter().position(|m| *m < Rational::zero())
    }
}

fn check_lengths(inst: &Instance, lens: &[usize]) -> Result<(), VerifyError> {
    match lens.iter().find(|&&l| l != inst.agents()) {
        Some(&found) => Err(VerifyError::Length {
            agents: inst.agents(),
            found,
        }),
        None => Ok(()),
    }
}

/// α-MMS(P): `v_i(A_i) >= α_i · μ_i^{P_i}` for every agent.
pub fn verify_alpha_mms_p(
    alloc: &Allocation,
    inst: &Instance,
    alpha: &ThresholdVector,
    partitions: &[Partition],
) -> Result<Verification, VerifyError> {
    validate_allocation(alloc, inst)?;
    check_lengths(inst, &[alpha.len(), partitions.len()])?;
    let values = (0..inst.agents())
        .map(|i| inst.value(i, alloc.bundle(i)))
        .collect();
    let thresholds = partitions
        .iter()
        .enumerate()
        .map(|(i, p)| alpha.get(i) * min_value(inst.valuation(i), p))
        .collect();
    Ok(Verification::build(values, thresholds))
}

/// α-MMS(d): `v_i(A_i) >= α_i · μ_i^{d_i}(M)` for every agent.
pub fn verify_alpha_mms_d(
    alloc: &Allocation,
    inst: &Instance,
    alpha: &ThresholdVector,
    d: &DemandVector,
    budget: &MmsBudget,
) -> Result<Verification, VerifyError> {
    validate_allocation(alloc, inst)?;
    check_lengths(inst, &[alpha.len(), d.len()])?;
    let mus = mms_values(inst, d, budget)?;
    let witnesses: Vec<Partition> = mus.into_iter().map(|r| r.witness).collect();
    verify_alpha_mms_p(alloc, inst, alpha, &witnesses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn additive(w: &[i64]) -> ValuationOracle {
        ValuationOracle::additive(w.iter().map(|&x| q(x, 1)).collect())
    }

    #[test]
    fn min_value_examples() {
        let v = additive(&[3, 1, 1, 1]);
        let p = Partition::of_items(
            4,
            vec![ItemSet::singleton(0), ItemSet::from_items([1, 2, 3])],
        )
        .unwrap();
        assert_eq!(min_value(&v, &p), q(3, 1));
        assert_eq!(min_value(&v, &Partition::whole(ItemSet::full(4))), q(6, 1));
        let with_empty = Partition::of_items(4, vec![ItemSet::full(4), ItemSet::EMPTY]).unwrap();
        assert_eq!(min_value(&v, &with_empty), q(0, 1));
    }

    #[test]
    fn mms_of_3111() {
        let v = additive(&[3, 1, 1, 1]);
        let r = mms_value(&v, ItemSet::full(4), 2, &MmsBudget::default()).unwrap();
        assert_eq!(r.value, q(3, 1));
        assert_eq!(
            r.witness.parts(),
            &[ItemSet::singleton(0), ItemSet::from_items([1, 2, 3])]
        );
        let one = mms_value(&v, ItemSet::full(4), 1, &MmsBudget::default()).unwrap();
        assert_eq!(one.value, q(6, 1));
    }

    #[test]
    fn more_parts_than_items_gives_zero() {
        let v = additive(&[1, 1]);
        let r = mms_value(&v, ItemSet::full(2), 3, &MmsBudget::default()).unwrap();
        assert_eq!(r.value, q(0, 1));
        assert_eq!(r.witness.len(), 3);
        assert!(r.witness.parts().iter().any(|p| p.is_empty()));
    }

    #[test]
    fn sub_ground() {
        let v = additive(&[5, 1, 2, 2, 7]);
        let g = ItemSet::from_items([1, 2, 3]);
        let r = mms_value(&v, g, 2, &MmsBudget::default()).unwrap();
        assert_eq!(r.value, q(2, 1));
        assert_eq!(r.witness.ground(), g);
    }

    #[test]
    fn budget_refuses() {
        let v = additive(&[1; 15]);
        let err = mms_value(&v, ItemSet::full(15), 5, &MmsBudget::default()).unwrap_err();
        assert!(matches!(err, MmsError::BudgetExceeded { items: 15, .. }));
        assert!(mms_value(&v, ItemSet::full(14), 5, &MmsBudget::default()).is_ok());
    }

    #[test]
    fn partition_counts() {
        // Bell numbers.
        assert_eq!(partitions_at_most(4, 4), 15);
        assert_eq!(partitions_at_most(5, 5), 52);
        assert_eq!(partitions_at_most(4, 2), 8);
        assert_eq!(partitions_at_most(0, 3), 1);
    }

    #[test]
    fn verify_examples() {
        let v = additive(&[1, 1, 1, 1]);
        let inst = Instance::new(4, vec![v.clone(), v], "units").unwrap();
        let zero = ThresholdVector::uniform(2, q(0, 1)).unwrap();
        let d = DemandVector::uniform(2, 2).unwrap();
        let empty = Allocation::empty(2);
        let r = verify_alpha_mms_d(&empty, &inst, &zero, &d, &MmsBudget::default()).unwrap();
        assert!(r.holds);
        let half = ThresholdVector::uniform(2, q(1, 2)).unwrap();
        let r = verify_alpha_mms_d(&empty, &inst, &half, &d, &MmsBudget::default()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.first_violation(), Some(0));
        assert_eq!(r.margins, vec![q(-1, 1), q(-1, 1)]);
    }
}
