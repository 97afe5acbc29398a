//! Fixed-capacity subset representation.
//!
//! A [`Subset`] is a bit vector over elements `0..MAX_ELEMENTS` with a cached
//! cardinality. It is `Copy` so that algorithms can pass subsets around by
//! value and use them directly as hash keys.

use std::fmt;

const WORDS: usize = 4;

/// Largest ground set a [`Subset`] can address.
pub const MAX_ELEMENTS: usize = WORDS * 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset {
    words: [u64; WORDS],
    len: u16,
}

impl Subset {
    pub const fn empty() -> Self {
        Subset { words: [0; WORDS], len: 0 }
    }

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ELEMENTS, "ground set too large: {n}");
        let mut s = Subset::empty();
        for w in 0..WORDS {
            let lo = w * 64;
            if n >= lo + 64 {
                s.words[w] = u64::MAX;
            } else if n > lo {
                s.words[w] = (1u64 << (n - lo)) - 1;
            }
        }
        s.len = n as u16;
        s
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elems: I) -> Self {
        let mut s = Subset::empty();
        for e in elems {
            s.insert(e);
        }
        s
    }

    /// Builds a subset from the low bits of a mask (elements `0..64`).
    pub fn from_mask(mask: u64) -> Self {
        let mut s = Subset::empty();
        s.words[0] = mask;
        s.len = mask.count_ones() as u16;
        s
    }

    /// Low 64 bits as a mask. Only meaningful for ground sets of at most 64 elements.
    #[inline]
    pub fn low_mask(&self) -> u64 {
        self.words[0]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        debug_assert!(e < MAX_ELEMENTS);
        self.words[e >> 6] >> (e & 63) & 1 == 1
    }

    /// Inserts `e`; returns `true` if it was absent.
    #[inline]
    pub fn insert(&mut self, e: usize) -> bool {
        assert!(e < MAX_ELEMENTS, "element {e} out of range");
        let bit = 1u64 << (e & 63);
        let w = &mut self.words[e >> 6];
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    /// Removes `e`; returns `true` if it was present.
    #[inline]
    pub fn remove(&mut self, e: usize) -> bool {
        if e >= MAX_ELEMENTS {
            return false;
        }
        let bit = 1u64 << (e & 63);
        let w = &mut self.words[e >> 6];
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    #[inline]
    pub fn with(mut self, e: usize) -> Self {
        self.insert(e);
        self
    }

    #[inline]
    pub fn without(mut self, e: usize) -> Self {
        self.remove(e);
        self
    }

    fn from_words(words: [u64; WORDS]) -> Self {
        let len = words.iter().map(|w| w.count_ones()).sum::<u32>() as u16;
        Subset { words, len }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut w = self.words;
        for (a, b) in w.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
        Subset::from_words(w)
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        let mut w = self.words;
        for (a, b) in w.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
        Subset::from_words(w)
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        let mut w = self.words;
        for (a, b) in w.iter_mut().zip(other.words.iter()) {
            *a &= !b;
        }
        Subset::from_words(w)
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & b == 0)
    }

    /// Largest element, if any.
    pub fn max_element(&self) -> Option<usize> {
        (0..WORDS).rev().find(|&w| self.words[w] != 0).map(|w| w * 64 + 63 - self.words[w].leading_zeros() as usize)
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> Elements {
        Elements { words: self.words, word: 0 }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lexicographic comparison of the sorted element lists.
    pub fn lex_cmp(&self, other: &Subset) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Displays 1-based labels, e.g. `{1,4,7}`.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (idx, e) in self.iter().enumerate() {
            if idx > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", e + 1)?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::from_elements(iter)
    }
}

pub struct Elements {
    words: [u64; WORDS],
    word: usize,
}

impl Iterator for Elements {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        while self.word < WORDS {
            let w = self.words[self.word];
            if w != 0 {
                let bit = w.trailing_zeros() as usize;
                self.words[self.word] = w & (w - 1);
                return Some(self.word * 64 + bit);
            }
            self.word += 1;
        }
        None
    }
}

/// Enumerates every subset of `{0..n}` with at most `max_card` elements, in
/// increasing order of the bitmask. Requires `n <= 63`.
pub fn subsets_up_to(n: usize, max_card: usize) -> impl Iterator<Item = Subset> {
    assert!(n <= 63, "exhaustive enumeration limited to 63 elements");
    (0u64..(1u64 << n)).filter(move |m| m.count_ones() as usize <= max_card).map(Subset::from_mask)
}

/// Enumerates all subsets of a mask (including the mask itself and zero).
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

/// `C(n, r)` as `f64`.
pub fn binomial(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of subsets of an `n`-set with at most `k` elements.
pub fn count_up_to(n: usize, k: usize) -> f64 {
    (0..=k.min(n)).map(|r| binomial(n, r)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_and_max_element() {
        let s = Subset::full(70);
        assert_eq!(s.len(), 70);
        assert_eq!(s.max_element(), Some(69));
        assert_eq!(Subset::empty().max_element(), None);
        assert_eq!(Subset::full(64).len(), 64);
    }

    #[test]
    fn display_is_one_based() {
        let s = Subset::from_elements([0, 3]);
        assert_eq!(s.to_string(), "{1,4}");
    }

    #[test]
    fn submasks_cover_powerset() {
        let all: Vec<u64> = submasks(0b1011).collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|m| m & !0b1011 == 0));
    }

    #[test]
    fn counting() {
        assert_eq!(binomial(8, 3), 56.0);
        assert_eq!(count_up_to(4, 2), 11.0);
        assert_eq!(subsets_up_to(6, 2).count(), 22);
    }

    proptest! {
        #[test]
        fn cardinality_tracks_bits(ops in proptest::collection::vec((0usize..200, any::<bool>()), 0..80)) {
            let mut s = Subset::empty();
            let mut reference = std::collections::BTreeSet::new();
            for (e, add) in ops {
                if add {
                    prop_assert_eq!(s.insert(e), reference.insert(e));
                } else {
                    prop_assert_eq!(s.remove(e), reference.remove(&e));
                }
                prop_assert_eq!(s.len(), reference.len());
            }
            prop_assert_eq!(s.to_vec(), reference.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(s, Subset::from_elements(reference.iter().copied()));
        }

        #[test]
        fn set_algebra(a in proptest::collection::btree_set(0usize..130, 0..20),
                       b in proptest::collection::btree_set(0usize..130, 0..20)) {
            let sa = Subset::from_elements(a.iter().copied());
            let sb = Subset::from_elements(b.iter().copied());
            prop_assert_eq!(sa.union(&sb).to_vec(), a.union(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.intersection(&sb).to_vec(), a.intersection(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.difference(&sb).to_vec(), a.difference(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(sa.is_subset_of(&sb), a.is_subset(&b));
            prop_assert_eq!(sa.is_disjoint(&sb), a.is_disjoint(&b));
        }
    }
}
