//! Bitset-backed subsets of the ground set `{0..n-1}`.

use std::cmp::Ordering;
use std::fmt;

const WORD_BITS: usize = 64;

/// A subset of the ground set `{0..n-1}`.
///
/// Every set carries its ground-set size; binary operations require both
/// operands to share it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    n: usize,
    words: Vec<u64>,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

impl ConstraintSet {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            words: vec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i * WORD_BITS;
            let bits = (n - lo).min(WORD_BITS);
            *w = if bits == WORD_BITS {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            };
        }
        s
    }

    /// Builds a set from member indices. Panics if an index is `>= n`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, members: I) -> Self {
        let mut s = Self::empty(n);
        for h in members {
            s.insert(h);
        }
        s
    }

    /// Builds a set from the low `n` bits of a mask. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= WORD_BITS, "from_mask requires n <= 64");
        assert!(
            n == WORD_BITS || mask >> n == 0,
            "mask has bits at or above n={n}"
        );
        let mut s = Self::empty(n);
        if n > 0 {
            s.words[0] = mask;
        }
        s
    }

    /// The set as a single machine word, if it fits.
    pub fn to_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => {
                if self.words[1..].iter().all(|&w| w == 0) {
                    Some(self.words[0])
                } else {
                    None
                }
            }
        }
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, h: usize) -> bool {
        assert!(h < self.n, "index {h} out of range for n={}", self.n);
        let (w, b) = (h / WORD_BITS, h % WORD_BITS);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    pub fn remove(&mut self, h: usize) -> bool {
        if h >= self.n {
            return false;
        }
        let (w, b) = (h / WORD_BITS, h % WORD_BITS);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        was
    }

    pub fn contains(&self, h: usize) -> bool {
        h < self.n && self.words[h / WORD_BITS] >> (h % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    fn check_same_ground(&self, other: &Self) {
        assert_eq!(
            self.n, other.n,
            "constraint sets over different ground sets"
        );
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        self.check_same_ground(other);
        Self {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> Self {
        Self::full(self.n).difference(self)
    }

    pub fn union_with(&mut self, other: &Self) {
        self.check_same_ground(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.check_same_ground(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(&a, &b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.check_same_ground(other);
        self.words.iter().zip(&other.words).all(|(&a, &b)| a & b == 0)
    }

    /// Same set with `h` added.
    pub fn with(&self, h: usize) -> Self {
        let mut s = self.clone();
        s.insert(h);
        s
    }

    /// Same set with `h` removed.
    pub fn without(&self, h: usize) -> Self {
        let mut s = self.clone();
        s.remove(h);
        s
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Order by cardinality, then lexicographically on the ascending member
    /// sequence. This is the enumeration order used throughout the crate.
    pub fn cmp_card_lex(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }

    /// Formats the members using `names`, joined by `sep`.
    pub fn display_with<'a, S: AsRef<str>>(&'a self, names: &'a [S], sep: &'a str) -> Named<'a, S> {
        Named {
            set: self,
            names,
            sep,
        }
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let b = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD_BITS + b);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl<'a> IntoIterator for &'a ConstraintSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, h) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{h}")?;
        }
        write!(f, "}}")
    }
}

pub struct Named<'a, S> {
    set: &'a ConstraintSet,
    names: &'a [S],
    sep: &'a str,
}

impl<S: AsRef<str>> fmt::Display for Named<'_, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, h) in self.set.iter().enumerate() {
            if i > 0 {
                f.write_str(self.sep)?;
            }
            match self.names.get(h) {
                Some(name) => f.write_str(name.as_ref())?,
                None => write!(f, "{h}")?,
            }
        }
        Ok(())
    }
}

/// Iterates all submasks of `mask`, from `mask` itself down to zero.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}
