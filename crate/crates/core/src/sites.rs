//! Fixed-width bit sets over site indices.

use smallvec::SmallVec;
use std::fmt;

pub(crate) type Words = SmallVec<[u64; 2]>;

#[inline]
pub(crate) fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

/// A set of sites drawn from `0..n`, stored as a packed bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteSet {
    n: usize,
    words: Words,
}

impl SiteSet {
    pub fn empty(n: usize) -> Self {
        SiteSet {
            n,
            words: smallvec::smallvec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    /// Builds a set from site indices. Panics if a site is `>= n`.
    pub fn from_sites(n: usize, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for i in sites {
            s.insert(i);
        }
        s
    }

    pub(crate) fn from_words(n: usize, words: Words) -> Self {
        debug_assert_eq!(words.len(), word_count(n));
        SiteSet { n, words }
    }

    /// Size of the ambient system.
    pub fn universe(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, site: usize) -> bool {
        site < self.n && (self.words[site / 64] >> (site % 64)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, site: usize) {
        assert!(site < self.n, "site {site} out of range for n = {}", self.n);
        self.words[site / 64] |= 1 << (site % 64);
    }

    #[inline]
    pub fn remove(&mut self, site: usize) {
        if site < self.n {
            self.words[site / 64] &= !(1 << (site % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &SiteSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn intersection_len(&self, other: &SiteSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_with(&mut self, other: &SiteSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &SiteSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    /// Complement within `0..n`.
    pub fn complement(&self) -> SiteSet {
        let mut out = SiteSet::full(self.n);
        out.difference_with(self);
        out
    }

    /// Sites in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_operations() {
        let mut a = SiteSet::from_sites(70, [0, 3, 65]);
        let b = SiteSet::from_sites(70, [3, 69]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(65) && !a.contains(64));
        assert!(a.intersects(&b));
        assert_eq!(a.intersection_len(&b), 1);
        a.union_with(&b);
        assert_eq!(a.to_vec(), vec![0, 3, 65, 69]);
        a.difference_with(&b);
        assert_eq!(a.to_vec(), vec![0, 65]);
        assert!(a.is_subset(&SiteSet::full(70)));
        assert_eq!(a.complement().len(), 68);
        a.remove(0);
        a.remove(65);
        assert!(a.is_empty());
    }
}
