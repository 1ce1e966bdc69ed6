//! Fixed-width item sets.

use std::fmt;
use std::ops::{BitAnd, BitOr, Sub};

/// Largest item count any set in this crate can address.
pub const MAX_ITEMS: usize = 32;

/// A set of item indices `0..m` with `m <= 32`, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ItemSet(u32);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// The ground set `{0, .., m-1}`.
    ///
    /// # Panics
    /// If `m > 32`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS, "item count {m} exceeds {MAX_ITEMS}");
        if m == MAX_ITEMS {
            ItemSet(u32::MAX)
        } else {
            ItemSet((1u32 << m) - 1)
        }
    }

    pub fn singleton(item: usize) -> Self {
        assert!(item < MAX_ITEMS, "item index {item} out of range");
        ItemSet(1 << item)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items.into_iter().fold(ItemSet::EMPTY, |acc, i| acc.with(i))
    }

    pub fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 & (1 << item) != 0
    }

    pub fn with(self, item: usize) -> Self {
        self | ItemSet::singleton(item)
    }

    pub fn without(self, item: usize) -> Self {
        self - ItemSet::singleton(item)
    }

    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ItemSet) -> Self {
        ItemSet(self.0 & !other.0)
    }

    /// Complement with respect to `{0, .., m-1}`.
    pub fn complement(self, m: usize) -> Self {
        ItemSet::full(m).difference(self)
    }

    pub fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Largest index plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        (u32::BITS - self.0.leading_zeros()) as usize
    }

    pub fn iter(self) -> Items {
        Items(self.0)
    }

    /// All subsets of `self`, in increasing bitmask order, starting with the empty set.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Packs the members of `self` that lie in `within` into the low bits, in
    /// increasing index order of `within`.
    pub fn compress(self, within: ItemSet) -> u32 {
        let mut out = 0u32;
        for (pos, item) in within.iter().enumerate() {
            if self.contains(item) {
                out |= 1 << pos;
            }
        }
        out
    }

    /// Inverse of [`ItemSet::compress`].
    pub fn expand(local: u32, within: ItemSet) -> ItemSet {
        let mut out = ItemSet::EMPTY;
        for (pos, item) in within.iter().enumerate() {
            if local & (1 << pos) != 0 {
                out = out.with(item);
            }
        }
        out
    }
}

impl BitOr for ItemSet {
    type Output = ItemSet;
    fn bitor(self, rhs: ItemSet) -> ItemSet {
        self.union(rhs)
    }
}

impl BitAnd for ItemSet {
    type Output = ItemSet;
    fn bitand(self, rhs: ItemSet) -> ItemSet {
        self.intersection(rhs)
    }
}

impl Sub for ItemSet {
    type Output = ItemSet;
    fn sub(self, rhs: ItemSet) -> ItemSet {
        self.difference(rhs)
    }
}

impl FromIterator<usize> for ItemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ItemSet::from_items(iter)
    }
}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Items;
    fn into_iter(self) -> Items {
        self.iter()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, item) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("}")
    }
}

/// Iterator over the members of an [`ItemSet`], ascending.
#[derive(Clone, Debug)]
pub struct Items(u32);

impl Iterator for Items {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Items {}

/// Iterator over all submasks of a mask.
#[derive(Clone, Debug)]
pub struct Subsets {
    mask: u32,
    next: Option<u32>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let cur = self.next?;
        // Gosper-style increment restricted to `mask`.
        self.next = if cur == self.mask {
            None
        } else {
            Some((cur.wrapping_sub(self.mask)) & self.mask)
        };
        Some(ItemSet(cur))
    }
}
