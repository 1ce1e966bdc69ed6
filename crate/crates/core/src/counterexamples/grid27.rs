use num_traits::{One, Zero};

use super::CounterexampleError;
use crate::items::ItemSet;
use crate::model::{Allocation, Instance};
use crate::q;
use crate::valuations::{
    BundleMaxValuation, TableValuation, ValuationClass, ValuationKind, ValuationOracle,
};
use crate::Rational;

pub const GRID27_EPSILON: Rational = Rational::new_raw(1, 12);

fn item(c: [usize; 3]) -> usize {
    9 * c[0] + 3 * c[1] + c[2]
}

/// Items with coordinate `axis` equal to `i`: `S_i`, `T_i` or `Q_i`.
fn slice(axis: usize, i: usize) -> ItemSet {
    let coords = (0..3).flat_map(|a| (0..3).flat_map(move |b| (0..3).map(move |c| [a, b, c])));
    ItemSet::from_items(coords.filter(|c| c[axis] == i).map(item))
}

/// 27 items `g(i, j, k)`. Agent `S` (resp. `T`, `Q`) has the slices on the
/// first (second, third) coordinate as reference bundles and values a set by
/// the best of its slice intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid27Instance {
    pub instance: Instance,
    pub epsilon: Rational,
    /// `slices[a][i]`: the `i`-th reference bundle of agent `a`.
    pub slices: [[ItemSet; 3]; 3],
    /// `b_star[a][i]`: the distinguished 4-item subsets of `slices[a][i]`.
    pub b_star: [[Vec<ItemSet>; 3]; 3],
}

impl Grid27Instance {
    /// The inner claim: no distinguished set's complement within its slice
    /// contains another distinguished set.
    pub fn claim_holds(&self) -> bool {
        (0..3).all(|a| {
            (0..3).all(|i| {
                let r = self.slices[a][i];
                let sets = &self.b_star[a][i];
                sets.iter()
                    .all(|&b| sets.iter().all(|&c| !c.is_subset(r - b)))
            })
        })
    }
}

/// `R_i ∩ ((X_j ∩ Y_k) ∪ Y_{k+1})` for both orderings of the other two axes.
fn distinguished(axis: usize, i: usize) -> Vec<ItemSet> {
    let others: Vec<usize> = (0..3).filter(|&b| b != axis).collect();
    let r = slice(axis, i);
    let mut out = Vec::new();
    for (x, y) in [(others[0], others[1]), (others[1], others[0])] {
        for j in 0..3 {
            for k in 0..3 {
                let b = r & ((slice(x, j) & slice(y, k)) | slice(y, (k + 1) % 3));
                if !out.contains(&b) {
                    out.push(b);
                }
            }
        }
    }
    out
}

fn inner_table(
    r: ItemSet,
    b_star: &[ItemSet],
    eps: Rational,
) -> Result<TableValuation, CounterexampleError> {
    let half = q(1, 2);
    let (low, high) = (half - eps, half + eps);
    let size4 = |b: ItemSet| if b_star.contains(&b) { high } else { low };
    TableValuation::from_fn(9, |local| {
        let b = ItemSet::expand(local.bits(), r);
        match b.len() {
            0 => Rational::zero(),
            9 => Rational::one(),
            1..=3 => low,
            4 => size4(b),
            5 => Rational::one() - size4(r - b),
            _ => high,
        }
    })
    .map_err(CounterexampleError::from)
}

pub fn instance_27() -> Result<Grid27Instance, CounterexampleError> {
    instance_27_with_epsilon(GRID27_EPSILON)
}

/// The same construction with another `ε`; `ε = 0` makes every proper
/// nonempty subset of a slice worth exactly 1/2.
pub fn instance_27_with_epsilon(epsilon: Rational) -> Result<Grid27Instance, CounterexampleError> {
    if epsilon < Rational::zero() || epsilon > q(1, 6) {
        return Err(CounterexampleError::InvalidParameter(format!(
            "epsilon must lie in [0, 1/6], got {epsilon}"
        )));
    }
    let slices = [0, 1, 2].map(|a| [0, 1, 2].map(|i| slice(a, i)));
    let b_star = [0, 1, 2].map(|a| [0, 1, 2].map(|i| distinguished(a, i)));
    let mut agents = Vec::with_capacity(3);
    for a in 0..3 {
        let inner = (0..3)
            .map(|i| inner_table(slices[a][i], &b_star[a][i], epsilon))
            .collect::<Result<Vec<_>, _>>()?;
        let kind =
            ValuationKind::BundleMax(BundleMaxValuation::new(27, slices[a].to_vec(), inner)?);
        agents.push(ValuationOracle::new(27, kind, ValuationClass::Subadditive)?);
    }
    let names = (0..27)
        .map(|g| format!("g({},{},{})", g / 9 + 1, (g / 3) % 3 + 1, g % 3 + 1))
        .collect();
    let instance = Instance::new(27, agents, "grid27")?.with_item_names(names)?;
    Ok(Grid27Instance {
        instance,
        epsilon,
        slices,
        b_star,
    })
}

/// Outcome for one placement of the agent with threshold 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementCheck {
    /// Agent required to reach 1; the other two need 1/2.
    pub full_agent: usize,
    pub branches: usize,
    /// An allocation meeting all three thresholds, if any branch produced one.
    pub witness: Option<Allocation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid27Certificate {
    /// Every agent values each of its slices and the whole set at exactly 1,
    /// so all three maximin shares for three parts equal 1.
    pub shares_are_one: bool,
    /// Within each slice, only the full slice reaches 1.
    pub value_one_characterized: bool,
    pub placements: Vec<PlacementCheck>,
}

impl Grid27Certificate {
    /// True when the reductions were validated and no branch succeeded.
    pub fn nonexistence(&self) -> bool {
        self.shares_are_one
            && self.value_one_characterized
            && self.placements.iter().all(|p| p.witness.is_none())
    }
}

/// Exhausts every allocation shape that can meet `(1, 1/2, 1/2)` up to
/// free disposal, for each of the three placements of the `1`.
///
/// The agent at 1 must hold a whole slice (checked per slice table), so it
/// receives exactly one. The next agent keeps only its best slice
/// intersection: every subset of one of its slices minus the first bundle.
/// The last agent gets everything else. That is `3 · 3 · 2^6` branches per
/// placement.
pub fn structured_check_27(g: &Grid27Instance) -> Grid27Certificate {
    let inst = &g.instance;
    let one = Rational::one();
    let shares_are_one = (0..3).all(|a| {
        inst.value(a, inst.ground()) == one && g.slices[a].iter().all(|&s| inst.value(a, s) == one)
    });
    let value_one_characterized = (0..3).all(|a| {
        let ValuationKind::BundleMax(b) = inst.valuation(a).kind() else {
            return false;
        };
        b.inner().iter().all(|t| {
            t.values()
                .iter()
                .enumerate()
                .all(|(local, v)| (*v == one) == (local == 511))
        })
    });
    let half = q(1, 2);
    let placements = (0..3)
        .map(|full| {
            let (x, y) = match full {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let mut branches = 0;
            let mut witness = None;
            for &a_full in &g.slices[full] {
                for &tj in &g.slices[x] {
                    let free = tj - a_full;
                    for sub in free.subsets() {
                        branches += 1;
                        let a_y = inst.ground() - a_full - sub;
                        if witness.is_none()
                            && inst.value(x, sub) >= half
                            && inst.value(y, a_y) >= half
                        {
                            let mut bundles = vec![ItemSet::EMPTY; 3];
                            bundles[full] = a_full;
                            bundles[x] = sub;
                            bundles[y] = a_y;
                            witness = Some(Allocation::new(bundles));
                        }
                    }
                }
            }
            PlacementCheck {
                full_agent: full,
                branches,
                witness,
            }
        })
        .collect();
    Grid27Certificate {
        shares_are_one,
        value_one_characterized,
        placements,
    }
}
