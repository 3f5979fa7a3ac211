//! Finite point sets over a window, stored as sorted id vectors.
//!
//! Sorted storage gives deterministic iteration, cheap set algebra, and a
//! well-defined lexicographic order used for certificate tie-breaking.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// A finite set of window point ids, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct PointSet {
    ids: Vec<u32>,
}

impl PointSet {
    pub fn empty() -> Self {
        PointSet { ids: Vec::new() }
    }

    pub fn singleton(x: u32) -> Self {
        PointSet { ids: vec![x] }
    }

    /// Builds from arbitrary ids, sorting and deduplicating.
    pub fn from_ids(mut ids: Vec<u32>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        PointSet { ids }
    }

    /// `0..n`.
    pub fn full(n: u32) -> Self {
        PointSet {
            ids: (0..n).collect(),
        }
    }

    /// Contiguous id range `lo..hi`.
    pub fn range(lo: u32, hi: u32) -> Self {
        PointSet {
            ids: (lo..hi).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.ids.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.ids
    }

    pub fn insert(&mut self, x: u32) {
        if let Err(pos) = self.ids.binary_search(&x) {
            self.ids.insert(pos, x);
        }
    }

    pub fn remove(&mut self, x: u32) {
        if let Ok(pos) = self.ids.binary_search(&x) {
            self.ids.remove(pos);
        }
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                Ordering::Less => {
                    out.push(self.ids[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.ids[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(self.ids[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.ids[i..]);
        out.extend_from_slice(&other.ids[j..]);
        PointSet { ids: out }
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push(self.ids[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        PointSet { ids: out }
    }

    /// `self \ other`.
    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() {
            if j >= other.ids.len() || self.ids[i] < other.ids[j] {
                out.push(self.ids[i]);
                i += 1;
            } else if self.ids[i] == other.ids[j] {
                i += 1;
                j += 1;
            } else {
                j += 1;
            }
        }
        PointSet { ids: out }
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        let mut j = 0;
        for &x in &self.ids {
            while j < other.ids.len() && other.ids[j] < x {
                j += 1;
            }
            if j >= other.ids.len() || other.ids[j] != x {
                return false;
            }
        }
        true
    }

    pub fn is_disjoint_from(&self, other: &PointSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Lexicographic comparison of the sorted id sequences (certificate tie-break order).
    pub fn lex_cmp(&self, other: &PointSet) -> Ordering {
        self.ids.cmp(&other.ids)
    }
}

impl FromIterator<u32> for PointSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        PointSet::from_ids(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = PointSet::from_ids(vec![5, 1, 3, 3]);
        let b = PointSet::from_ids(vec![3, 4, 5]);
        assert_eq!(a.as_slice(), &[1, 3, 5]);
        assert_eq!(a.union(&b).as_slice(), &[1, 3, 4, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[3, 5]);
        assert_eq!(a.difference(&b).as_slice(), &[1]);
        assert!(a.intersection(&b).is_subset_of(&a));
        assert!(!a.is_subset_of(&b));
        assert!(PointSet::empty().is_subset_of(&a));
    }

    #[test]
    fn lex_order_prefers_smaller_leading_ids() {
        let a = PointSet::from_ids(vec![1, 5]);
        let b = PointSet::from_ids(vec![2, 3]);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
    }

    #[test]
    fn insert_remove_keep_order() {
        let mut s = PointSet::from_ids(vec![2, 8]);
        s.insert(5);
        s.insert(5);
        s.remove(2);
        assert_eq!(s.as_slice(), &[5, 8]);
    }
}
