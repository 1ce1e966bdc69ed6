//! Exhaustive allocation search: existence of α-MMS(d) allocations and the
//! best attainable uniform factor.
//!
//! Every item is assigned to some agent, so the space is `n^m`; with monotone
//! valuations an allocation that discards items is dominated by one that
//! hands them out. Subtrees are pruned when some agent cannot reach its
//! threshold even with every unassigned item. Top-level branches run in
//! parallel and results are merged in branch order, so the outcome does not
//! depend on the worker count.

use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::items::ItemSet;
use crate::mms::{mms_values, MmsBudget, VerifyError};
use crate::model::{Allocation, DemandVector, Instance, ThresholdVector};
use crate::valuations::MAX_TABLE_ITEMS;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Largest `n^m` a search may enter.
    pub max_assignments: u128,
    /// Target number of parallel branches; 0 uses the rayon pool size.
    pub parallel_width: usize,
    /// Budget for the MMS values the thresholds are built from.
    pub mms: MmsBudget,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_assignments: 1 << 26,
            parallel_width: 0,
            mms: MmsBudget::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{agents}^{items} = {space} assignments exceeds the budget of {budget}")]
    Refused {
        agents: usize,
        items: usize,
        space: u128,
        budget: u128,
    },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Counts from a completed search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExhaustionRecord {
    /// `n^m`.
    pub space: u128,
    /// Search nodes entered.
    pub visited: u64,
    /// Nodes cut off by the reachability bound.
    pub pruned: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Existence {
    /// The lexicographically first witness in assignment order.
    Exists(Allocation),
    NotExists(ExhaustionRecord),
}

impl Existence {
    pub fn exists(&self) -> bool {
        matches!(self, Existence::Exists(_))
    }
}

/// `min_i v_i(A_i) / μ_i`, where agents with `μ_i = 0` are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlphaValue {
    Finite(Rational),
    /// Every agent has `μ_i = 0`.
    Unbounded,
}

impl fmt::Display for AlphaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaValue::Finite(r) => write!(f, "{r}"),
            AlphaValue::Unbounded => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestAlpha {
    pub alpha: AlphaValue,
    /// First maximizer in assignment order.
    pub allocation: Allocation,
    pub mms: Vec<Rational>,
    pub record: ExhaustionRecord,
}

/// Best ratio and bundles found in one branch, with visited and pruned counts.
type BranchBest = (Option<(AlphaValue, Vec<u32>)>, u64, u64);

/// Value lookups, tabulated when the instance is small enough.
struct Values<'a> {
    inst: &'a Instance,
    tables: Option<Vec<Vec<Rational>>>,
}

impl<'a> Values<'a> {
    fn new(inst: &'a Instance) -> Self {
        let tables = (inst.m() <= MAX_TABLE_ITEMS).then(|| {
            inst.valuations()
                .iter()
                .map(|v| v.tabulate().expect("small instance"))
                .collect()
        });
        Values { inst, tables }
    }

    fn get(&self, agent: usize, bits: u32) -> Rational {
        match &self.tables {
            Some(t) => t[agent][bits as usize],
            None => self.inst.value(agent, ItemSet::from_bits(bits)),
        }
    }
}

fn space(n: usize, m: usize) -> u128 {
    (0..m).fold(1u128, |acc, _| acc.saturating_mul(n as u128))
}

fn check_space(n: usize, m: usize, budget: &SearchBudget) -> Result<u128, OracleError> {
    if n == 0 {
        return Err(OracleError::InvalidInput("instance has no agents".into()));
    }
    let s = space(n, m);
    if s > budget.max_assignments {
        return Err(OracleError::Refused {
            agents: n,
            items: m,
            space: s,
            budget: budget.max_assignments,
        });
    }
    Ok(s)
}

/// Assignment prefixes of the first `depth` items, in lexicographic order.
fn prefixes(n: usize, m: usize, budget: &SearchBudget) -> Vec<Vec<usize>> {
    let width = match budget.parallel_width {
        0 => rayon::current_num_threads(),
        w => w,
    };
    let target = (width * 8) as u128;
    let mut depth = 0;
    while depth < m && space(n, depth) < target {
        depth += 1;
    }
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

fn bundles_from(prefix: &[usize], n: usize) -> Vec<u32> {
    let mut b = vec![0u32; n];
    for (g, &a) in prefix.iter().enumerate() {
        b[a] |= 1 << g;
    }
    b
}

/// Items `g..m`.
fn unassigned(m: usize, g: usize) -> u32 {
    ItemSet::full(m).bits() & !(((1u64 << g) - 1) as u32)
}

fn to_allocation(bundles: &[u32]) -> Allocation {
    Allocation::new(bundles.iter().map(|&b| ItemSet::from_bits(b)).collect())
}

struct ExistsSearch<'a> {
    values: &'a Values<'a>,
    thresholds: &'a [Rational],
    m: usize,
    visited: u64,
    pruned: u64,
}

impl ExistsSearch<'_> {
    fn run(&mut self, bundles: &mut [u32], g: usize) -> bool {
        self.visited += 1;
        let rest = unassigned(self.m, g);
        let reachable = bundles
            .iter()
            .enumerate()
            .all(|(i, &b)| self.values.get(i, b | rest) >= self.thresholds[i]);
        if !reachable {
            self.pruned += 1;
            return false;
        }
        if g == self.m {
            return true;
        }
        for a in 0..bundles.len() {
            bundles[a] |= 1 << g;
            if self.run(bundles, g + 1) {
                return true;
            }
            bundles[a] &= !(1 << g);
        }
        false
    }
}

/// Searches for an allocation with `v_i(A_i) >= thresholds[i]` for all `i`.
pub fn exists_allocation(
    inst: &Instance,
    thresholds: &[Rational],
    budget: &SearchBudget,
) -> Result<Existence, OracleError> {
    let (n, m) = (inst.agents(), inst.m());
    if thresholds.len() != n {
        return Err(OracleError::InvalidInput(format!(
            "{} thresholds for {n} agents",
            thresholds.len()
        )));
    }
    let total = check_space(n, m, budget)?;
    if thresholds.iter().all(|t| *t <= Rational::zero()) {
        return Ok(Existence::Exists(Allocation::empty(n)));
    }
    let values = Values::new(inst);
    let branches = prefixes(n, m, budget);
    let first_hit = AtomicUsize::new(usize::MAX);
    let results: Vec<(Option<Vec<u32>>, u64, u64)> = branches
        .par_iter()
        .enumerate()
        .map(|(idx, prefix)| {
            if idx > first_hit.load(AtomicOrdering::Relaxed) {
                return (None, 0, 0);
            }
            let mut s = ExistsSearch {
                values: &values,
                thresholds,
                m,
                visited: 0,
                pruned: 0,
            };
            let mut bundles = bundles_from(prefix, n);
            let found = s.run(&mut bundles, prefix.len());
            if found {
                first_hit.fetch_min(idx, AtomicOrdering::Relaxed);
            }
            (found.then_some(bundles), s.visited, s.pruned)
        })
        .collect();
    if let Some(b) = results.iter().find_map(|r| r.0.as_ref()) {
        return Ok(Existence::Exists(to_allocation(b)));
    }
    let (visited, pruned) = results.iter().fold((0, 0), |(v, p), r| (v + r.1, p + r.2));
    Ok(Existence::NotExists(ExhaustionRecord {
        space: total,
        visited,
        pruned,
    }))
}

/// Is there an allocation with `v_i(A_i) >= α_i · μ_i^{d_i}` for every agent?
pub fn exists_alpha_mms(
    inst: &Instance,
    alpha: &ThresholdVector,
    d: &DemandVector,
    budget: &SearchBudget,
) -> Result<Existence, OracleError> {
    if alpha.len() != inst.agents() {
        return Err(OracleError::InvalidInput(format!(
            "{} thresholds for {} agents",
            alpha.len(),
            inst.agents()
        )));
    }
    check_space(inst.agents(), inst.m(), budget)?;
    let mus = mms_values(inst, d, &budget.mms)?;
    let thresholds: Vec<Rational> = mus
        .iter()
        .zip(alpha.as_slice())
        .map(|(r, a)| r.value * a)
        .collect();
    exists_allocation(inst, &thresholds, budget)
}

struct BestSearch<'a> {
    values: &'a Values<'a>,
    mms: &'a [Rational],
    m: usize,
    best: Option<(AlphaValue, Vec<u32>)>,
    visited: u64,
    pruned: u64,
}

impl BestSearch<'_> {
    fn score(&self, bundles: &[u32], extra: u32) -> AlphaValue {
        bundles
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.mms[*i].is_zero())
            .map(|(i, &b)| AlphaValue::Finite(self.values.get(i, b | extra) / self.mms[i]))
            .min()
            .unwrap_or(AlphaValue::Unbounded)
    }

    fn run(&mut self, bundles: &mut [u32], g: usize) {
        self.visited += 1;
        let rest = unassigned(self.m, g);
        let bound = self.score(bundles, rest);
        if let Some((best, _)) = &self.best {
            if bound.cmp(best) != Ordering::Greater {
                self.pruned += 1;
                return;
            }
        }
        if g == self.m {
            self.best = Some((bound, bundles.to_vec()));
            return;
        }
        for a in 0..bundles.len() {
            bundles[a] |= 1 << g;
            self.run(bundles, g + 1);
            bundles[a] &= !(1 << g);
        }
    }
}

/// `max_A min_i v_i(A_i) / μ_i^{d_i}` over all allocations of every item.
pub fn best_alpha(
    inst: &Instance,
    d: &DemandVector,
    budget: &SearchBudget,
) -> Result<BestAlpha, OracleError> {
    let (n, m) = (inst.agents(), inst.m());
    let total = check_space(n, m, budget)?;
    let mms: Vec<Rational> = mms_values(inst, d, &budget.mms)?
        .into_iter()
        .map(|r| r.value)
        .collect();
    let values = Values::new(inst);
    let results: Vec<BranchBest> = prefixes(n, m, budget)
        .par_iter()
        .map(|prefix| {
            let mut s = BestSearch {
                values: &values,
                mms: &mms,
                m,
                best: None,
                visited: 0,
                pruned: 0,
            };
            let mut bundles = bundles_from(prefix, n);
            s.run(&mut bundles, prefix.len());
            (s.best, s.visited, s.pruned)
        })
        .collect();
    let mut record = ExhaustionRecord {
        space: total,
        ..Default::default()
    };
    let mut best: Option<&(AlphaValue, Vec<u32>)> = None;
    for (candidate, visited, pruned) in &results {
        record.visited += visited;
        record.pruned += pruned;
        if let Some(c) = candidate {
            if best.is_none_or(|b| c.0 > b.0) {
                best = Some(c);
            }
        }
    }
    let (alpha, bundles) = best.expect("every branch reaches a leaf");
    Ok(BestAlpha {
        alpha: *alpha,
        allocation: to_allocation(bundles),
        mms,
        record,
    })
}
