//! Maximum desired halves of a partition with respect to a cut.

use crate::items::ItemSet;
use crate::model::Partition;
use crate::valuations::ValuationOracle;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Cut,
    Complement,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Cut => "cut",
            Side::Complement => "complement",
        }
    }

    /// The items on this side of `cut` inside `ground`.
    pub fn region(self, cut: ItemSet, ground: ItemSet) -> ItemSet {
        match self {
            Side::Cut => cut & ground,
            Side::Complement => ground - cut,
        }
    }
}

/// A piece `P_index ∩ side` worth at least half of `P_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubBundle {
    pub index: usize,
    pub items: ItemSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub side: Side,
    pub satisfied: Vec<SubBundle>,
    pub cut_count: usize,
    pub complement_count: usize,
}

impl CutResult {
    pub fn len(&self) -> usize {
        self.satisfied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satisfied.is_empty()
    }

    /// The satisfied piece of part `index`, if any.
    pub fn piece(&self, index: usize) -> Option<ItemSet> {
        self.satisfied
            .iter()
            .find(|b| b.index == index)
            .map(|b| b.items)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.satisfied.iter().map(|b| b.index).collect()
    }
}

/// `2·v(piece) >= v(whole)`.
pub fn is_half(v: &ValuationOracle, piece: ItemSet, whole: ItemSet) -> bool {
    let two: Rational = Rational::from_integer(2);
    two * v.value(piece) >= v.value(whole)
}

/// The pieces `P_j ∩ cut` with `2·v(P_j ∩ cut) >= v(P_j)`, in part order.
pub fn desired_half(v: &ValuationOracle, p: &Partition, cut: ItemSet) -> Vec<SubBundle> {
    p.parts()
        .iter()
        .enumerate()
        .filter_map(|(index, &part)| {
            let items = part & cut;
            is_half(v, items, part).then_some(SubBundle { index, items })
        })
        .collect()
}

/// The side of `cut` with more satisfied pieces; ties go to the cut side.
/// The complement is taken within `p.ground()`.
pub fn max_desired_half(v: &ValuationOracle, p: &Partition, cut: ItemSet) -> CutResult {
    let inside = desired_half(v, p, cut);
    let outside = desired_half(v, p, p.ground() - cut);
    let (cut_count, complement_count) = (inside.len(), outside.len());
    let (side, satisfied) = if cut_count >= complement_count {
        (Side::Cut, inside)
    } else {
        (Side::Complement, outside)
    };
    CutResult {
        side,
        satisfied,
        cut_count,
        complement_count,
    }
}
