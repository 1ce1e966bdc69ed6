//! Partitions, allocations, guarantee vectors and instances.

use std::fmt;

use thiserror::Error;

use crate::items::{ItemSet, MAX_ITEMS};
use crate::valuations::ValuationOracle;
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("item count {0} exceeds the supported maximum of {MAX_ITEMS}")]
    TooManyItems(usize),
    #[error("partition has no parts")]
    NoParts,
    #[error("parts {first} and {second} overlap on {shared}")]
    OverlappingParts {
        first: usize,
        second: usize,
        shared: ItemSet,
    },
    #[error("parts cover {covered} but the ground set is {ground}")]
    NotCovering { covered: ItemSet, ground: ItemSet },
    #[error("demand entries must be positive (agent {0} has 0)")]
    ZeroDemand(usize),
    #[error("threshold for agent {agent} is {value}, outside [0, 1]")]
    ThresholdOutOfRange { agent: usize, value: Rational },
    #[error("vector lengths differ: {0:?}")]
    LengthMismatch(Vec<usize>),
    #[error("agent {agent} valuation is over {found} items, instance has {expected}")]
    ItemCountMismatch {
        agent: usize,
        expected: usize,
        found: usize,
    },
}

/// An ordered list of pairwise disjoint parts whose union is `ground`.
/// Empty parts are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<ItemSet>,
    ground: ItemSet,
}

impl Partition {
    pub fn new(parts: Vec<ItemSet>, ground: ItemSet) -> Result<Self, ModelError> {
        if parts.is_empty() {
            return Err(ModelError::NoParts);
        }
        let mut covered = ItemSet::EMPTY;
        for (j, &p) in parts.iter().enumerate() {
            if !p.is_disjoint(covered) {
                let first = parts[..j]
                    .iter()
                    .position(|q| !q.is_disjoint(p))
                    .expect("overlap must come from an earlier part");
                return Err(ModelError::OverlappingParts {
                    first,
                    second: j,
                    shared: parts[first] & p,
                });
            }
            covered = covered | p;
        }
        if covered != ground {
            return Err(ModelError::NotCovering { covered, ground });
        }
        Ok(Partition { parts, ground })
    }

    /// A partition of `{0, .., m-1}`.
    pub fn of_items(m: usize, parts: Vec<ItemSet>) -> Result<Self, ModelError> {
        if m > MAX_ITEMS {
            return Err(ModelError::TooManyItems(m));
        }
        Partition::new(parts, ItemSet::full(m))
    }

    /// The trivial partition `(ground)`.
    pub fn whole(ground: ItemSet) -> Self {
        Partition {
            parts: vec![ground],
            ground,
        }
    }

    /// Builds a partition from an assignment `item -> part`, with `parts` parts.
    pub fn from_assignment(assignment: &[usize], parts: usize) -> Result<Self, ModelError> {
        if parts == 0 {
            return Err(ModelError::NoParts);
        }
        if assignment.len() > MAX_ITEMS {
            return Err(ModelError::TooManyItems(assignment.len()));
        }
        let mut out = vec![ItemSet::EMPTY; parts];
        for (item, &p) in assignment.iter().enumerate() {
            out[p] = out[p].with(item);
        }
        Ok(Partition {
            parts: out,
            ground: ItemSet::full(assignment.len()),
        })
    }

    pub fn parts(&self) -> &[ItemSet] {
        &self.parts
    }

    pub fn part(&self, j: usize) -> ItemSet {
        self.parts[j]
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn ground(&self) -> ItemSet {
        self.ground
    }

    /// Same parts, reordered so that new part `k` is old part `order[k]`.
    pub fn reordered(&self, order: &[usize]) -> Partition {
        Partition {
            parts: order.iter().map(|&k| self.parts[k]).collect(),
            ground: self.ground,
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

/// One bundle per agent. Bundles need not cover the items (free disposal).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<ItemSet>,
}

impl Allocation {
    pub fn new(bundles: Vec<ItemSet>) -> Self {
        Allocation { bundles }
    }

    pub fn empty(agents: usize) -> Self {
        Allocation {
            bundles: vec![ItemSet::EMPTY; agents],
        }
    }

    pub fn bundles(&self) -> &[ItemSet] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> ItemSet {
        self.bundles[agent]
    }

    pub fn set(&mut self, agent: usize, bundle: ItemSet) {
        self.bundles[agent] = bundle;
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    /// Union of all bundles.
    pub fn allocated(&self) -> ItemSet {
        self.bundles.iter().fold(ItemSet::EMPTY, |acc, &b| acc | b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationViolation {
    #[error("allocation has {found} bundles but the instance has {expected} agents")]
    BundleCount { expected: usize, found: usize },
    #[error("agent {agent} holds item {item}, but the instance has only {m} items")]
    ItemOutOfRange { agent: usize, item: usize, m: usize },
    #[error("agents {first} and {second} share items {shared}")]
    Overlap {
        first: usize,
        second: usize,
        shared: ItemSet,
    },
}

/// Checks that `allocation` is a valid allocation for `inst`: one bundle per
/// agent, all items in range, bundles pairwise disjoint.
pub fn validate_allocation(
    allocation: &Allocation,
    inst: &Instance,
) -> Result<(), AllocationViolation> {
    if allocation.agents() != inst.agents() {
        return Err(AllocationViolation::BundleCount {
            expected: inst.agents(),
            found: allocation.agents(),
        });
    }
    let ground = inst.ground();
    for (agent, &b) in allocation.bundles().iter().enumerate() {
        if let Some(item) = (b - ground).iter().next() {
            return Err(AllocationViolation::ItemOutOfRange {
                agent,
                item,
                m: inst.m(),
            });
        }
    }
    for (first, &a) in allocation.bundles().iter().enumerate() {
        for (second, &b) in allocation.bundles().iter().enumerate().skip(first + 1) {
            if !a.is_disjoint(b) {
                return Err(AllocationViolation::Overlap {
                    first,
                    second,
                    shared: a & b,
                });
            }
        }
    }
    Ok(())
}

/// Per-agent part counts `d_i >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(d: Vec<usize>) -> Result<Self, ModelError> {
        if let Some(agent) = d.iter().position(|&x| x == 0) {
            return Err(ModelError::ZeroDemand(agent));
        }
        Ok(DemandVector(d))
    }

    pub fn uniform(n: usize, d: usize) -> Result<Self, ModelError> {
        DemandVector::new(vec![d; n])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, agent: usize) -> usize {
        self.0[agent]
    }
}

/// Per-agent approximation factors `alpha_i` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThresholdVector(Vec<Rational>);

impl ThresholdVector {
    pub fn new(alpha: Vec<Rational>) -> Result<Self, ModelError> {
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        for (agent, &value) in alpha.iter().enumerate() {
            if value < zero || value > one {
                return Err(ModelError::ThresholdOutOfRange { agent, value });
            }
        }
        Ok(ThresholdVector(alpha))
    }

    pub fn uniform(n: usize, alpha: Rational) -> Result<Self, ModelError> {
        ThresholdVector::new(vec![alpha; n])
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, agent: usize) -> Rational {
        self.0[agent]
    }
}

/// True iff `alpha >= alpha_other` and `d <= d_other` pointwise, in which case
/// every `alpha`-MMS(`d`) allocation is also `alpha_other`-MMS(`d_other`).
pub fn guarantee_dominates(
    alpha: &ThresholdVector,
    d: &DemandVector,
    alpha_other: &ThresholdVector,
    d_other: &DemandVector,
) -> Result<bool, ModelError> {
    let lens = vec![alpha.len(), d.len(), alpha_other.len(), d_other.len()];
    if lens.iter().any(|&l| l != lens[0]) {
        return Err(ModelError::LengthMismatch(lens));
    }
    let alpha_ok = alpha
        .as_slice()
        .iter()
        .zip(alpha_other.as_slice())
        .all(|(a, b)| a >= b);
    let d_ok = d
        .as_slice()
        .iter()
        .zip(d_other.as_slice())
        .all(|(a, b)| a <= b);
    Ok(alpha_ok && d_ok)
}

/// A fair-division instance: `m` items and one valuation oracle per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    m: usize,
    agents: Vec<ValuationOracle>,
    label: String,
    item_names: Vec<String>,
}

impl Instance {
    pub fn new(
        m: usize,
        agents: Vec<ValuationOracle>,
        label: impl Into<String>,
    ) -> Result<Self, ModelError> {
        if m > MAX_ITEMS {
            return Err(ModelError::TooManyItems(m));
        }
        for (agent, v) in agents.iter().enumerate() {
            if v.m() != m {
                return Err(ModelError::ItemCountMismatch {
                    agent,
                    expected: m,
                    found: v.m(),
                });
            }
        }
        Ok(Instance {
            m,
            agents,
            label: label.into(),
            item_names: (0..m).map(|i| i.to_string()).collect(),
        })
    }

    /// Replaces the default item names (`"0"`, `"1"`, ..).
    pub fn with_item_names(mut self, names: Vec<String>) -> Result<Self, ModelError> {
        if names.len() != self.m {
            return Err(ModelError::LengthMismatch(vec![self.m, names.len()]));
        }
        self.item_names = names;
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ground(&self) -> ItemSet {
        ItemSet::full(self.m)
    }

    pub fn agents(&self) -> usize {
        self.agents.len()
    }

    pub fn valuation(&self, agent: usize) -> &ValuationOracle {
        &self.agents[agent]
    }

    pub fn valuations(&self) -> &[ValuationOracle] {
        &self.agents
    }

    pub fn value(&self, agent: usize, bundle: ItemSet) -> Rational {
        self.agents[agent].value(bundle)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    /// Renders a set with this instance's item names, e.g. `{h,g1}`.
    pub fn display_set(&self, set: ItemSet) -> String {
        let names: Vec<&str> = set.iter().map(|i| self.item_names[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// A copy with agents reordered: new agent `k` is old agent `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Instance {
        Instance {
            m: self.m,
            agents: order.iter().map(|&k| self.agents[k].clone()).collect(),
            label: self.label.clone(),
            item_names: self.item_names.clone(),
        }
    }

    /// A copy with every valuation replaced by `f(valuation)`.
    pub fn map_valuations<F>(&self, label: impl Into<String>, f: F) -> Instance
    where
        F: FnMut(&ValuationOracle) -> ValuationOracle,
    {
        Instance {
            m: self.m,
            agents: self.agents.iter().map(f).collect(),
            label: label.into(),
            item_names: self.item_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;
    use crate::valuations::ValuationOracle;

    fn additive_instance(n: usize, m: usize) -> Instance {
        let v = ValuationOracle::additive(vec![q(1, 1); m]);
        Instance::new(m, vec![v; n], "unit").unwrap()
    }

    #[test]
    fn validate_allocation_examples() {
        let inst = additive_instance(2, 4);
        let ok = Allocation::new(vec![
            ItemSet::from_items([0, 1]),
            ItemSet::from_items([2, 3]),
        ]);
        assert_eq!(validate_allocation(&ok, &inst), Ok(()));

        let bad = Allocation::new(vec![
            ItemSet::from_items([0, 1]),
            ItemSet::from_items([1, 2]),
        ]);
        assert_eq!(
            validate_allocation(&bad, &inst),
            Err(AllocationViolation::Overlap {
                first: 0,
                second: 1,
                shared: ItemSet::singleton(1)
            })
        );

        assert_eq!(validate_allocation(&Allocation::empty(2), &inst), Ok(()));

        let out_of_range = Allocation::new(vec![ItemSet::singleton(4), ItemSet::EMPTY]);
        assert!(matches!(
            validate_allocation(&out_of_range, &inst),
            Err(AllocationViolation::ItemOutOfRange {
                agent: 0,
                item: 4,
                ..
            })
        ));
        assert!(matches!(
            validate_allocation(&Allocation::empty(3), &inst),
            Err(AllocationViolation::BundleCount {
                expected: 2,
                found: 3
            })
        ));
    }

    #[test]
    fn guarantee_dominates_examples() {
        let half = ThresholdVector::uniform(3, q(1, 2)).unwrap();
        let d322 = DemandVector::new(vec![3, 2, 2]).unwrap();
        let d333 = DemandVector::new(vec![3, 3, 3]).unwrap();
        assert!(guarantee_dominates(&half, &d322, &half, &d333).unwrap());
        assert!(guarantee_dominates(&half, &d322, &half, &d322).unwrap());
        assert!(!guarantee_dominates(&half, &d333, &half, &d322).unwrap());

        let a = ThresholdVector::new(vec![q(1, 1), q(1, 2)]).unwrap();
        let b = ThresholdVector::new(vec![q(1, 1), q(1, 1)]).unwrap();
        let d = DemandVector::new(vec![1, 2]).unwrap();
        assert!(!guarantee_dominates(&a, &d, &b, &d).unwrap());

        assert!(matches!(
            guarantee_dominates(&a, &d322, &b, &d),
            Err(ModelError::LengthMismatch(_))
        ));
    }

    #[test]
    fn partition_rejects_overlap_and_gaps() {
        let m = 4;
        let err = Partition::of_items(
            m,
            vec![ItemSet::from_items([0, 1]), ItemSet::from_items([1, 2, 3])],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            ModelError::OverlappingParts {
                first: 0,
                second: 1,
                ..
            }
        ));

        let err = Partition::of_items(m, vec![ItemSet::from_items([0, 1])]).unwrap_err();
        assert!(matches!(err, ModelError::NotCovering { .. }));

        let with_empty = Partition::of_items(m, vec![ItemSet::full(4), ItemSet::EMPTY]).unwrap();
        assert_eq!(with_empty.len(), 2);
        assert!(Partition::of_items(m, vec![]).is_err());
    }

    #[test]
    fn vectors_validate_entries() {
        assert_eq!(
            DemandVector::new(vec![2, 0]),
            Err(ModelError::ZeroDemand(1))
        );
        assert!(ThresholdVector::new(vec![q(3, 2)]).is_err());
        assert!(ThresholdVector::new(vec![q(-1, 2)]).is_err());
    }

    #[test]
    fn instance_checks_item_counts() {
        let v = ValuationOracle::additive(vec![q(1, 1); 3]);
        assert!(matches!(
            Instance::new(4, vec![v], "x"),
            Err(ModelError::ItemCountMismatch { .. })
        ));
        assert!(matches!(
            Instance::new(33, vec![], "x"),
            Err(ModelError::TooManyItems(33))
        ));
    }
}
