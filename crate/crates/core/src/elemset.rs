//! Word-sized sets of element indices.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::MAX_ORDER;

/// A subset of `0..n` for `n <= 64`, stored as a single machine word.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ElemSet(u64);

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ElemSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(x: usize) -> Self {
        debug_assert!(x < MAX_ORDER);
        ElemSet(1u64 << x)
    }

    /// The whole universe `0..n`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_ORDER);
        if n == 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn insert(&mut self, x: usize) {
        debug_assert!(x < MAX_ORDER);
        self.0 |= 1u64 << x;
    }

    pub fn remove(&mut self, x: usize) {
        self.0 &= !(1u64 << x);
    }

    pub fn contains(self, x: usize) -> bool {
        x < MAX_ORDER && self.0 & (1u64 << x) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Least element, if any.
    pub fn least(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    pub fn union(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ElemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ElemSet::EMPTY;
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl IntoIterator for ElemSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

/// Ascending iterator over the members of an [`ElemSet`].
#[derive(Clone)]
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let x = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(x)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Iter {}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ElemSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ElemSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = items.iter().find(|&&x| x >= MAX_ORDER) {
            return Err(serde::de::Error::custom(format!(
                "element {bad} exceeds the order cap {MAX_ORDER}"
            )));
        }
        Ok(items.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_iter() {
        assert_eq!(ElemSet::full(0), ElemSet::EMPTY);
        assert_eq!(ElemSet::full(3).to_vec(), vec![0, 1, 2]);
        assert_eq!(ElemSet::full(64).len(), 64);
        let s: ElemSet = [5, 1, 63].into_iter().collect();
        assert_eq!(s.to_vec(), vec![1, 5, 63]);
        assert_eq!(s.least(), Some(1));
        assert!(s.contains(63) && !s.contains(64));
    }

    #[test]
    fn set_algebra() {
        let a: ElemSet = [0, 1, 2].into_iter().collect();
        let b: ElemSet = [2, 3].into_iter().collect();
        assert_eq!(a.intersection(b).to_vec(), vec![2]);
        assert_eq!(a.union(b).len(), 4);
        assert_eq!(a.difference(b).to_vec(), vec![0, 1]);
        assert!(ElemSet::singleton(2).is_subset(b));
        assert!(!a.is_disjoint(b));
    }

    #[test]
    fn json_is_sorted_list() {
        let s: ElemSet = [4, 0, 2].into_iter().collect();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0,2,4]");
        let back: ElemSet = serde_json::from_str("[2,4,0]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<ElemSet>("[64]").is_err());
    }
}
