//! Permutations of `[n]`, stored 0-based, with lexicographic ranking in the
//! factorial number system.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    /// `map[i]` is the image of `i`; must be a bijection on `0..map.len()`.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(invalid("permutation must act on at least one element"));
        }
        let mut seen = alloc::vec![false; n];
        for &m in &map {
            if m >= n || seen[m] {
                return Err(invalid(format!("{map:?} is not a permutation of 0..{n}")));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Self { map: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        }
    }

    /// Lexicographic rank among all permutations of the same length.
    pub fn lex_rank(&self) -> u128 {
        let n = self.map.len();
        let mut rank = 0u128;
        for i in 0..n {
            let smaller_later = self.map[i + 1..]
                .iter()
                .filter(|&&m| m < self.map[i])
                .count();
            rank += smaller_later as u128 * factorial(n - 1 - i);
        }
        rank
    }

    /// The permutation of `0..n` with the given lexicographic rank.
    pub fn from_lex_rank(n: usize, mut rank: u128) -> Result<Self> {
        if n == 0 || rank >= factorial(n) {
            return Err(invalid(format!("rank {rank} out of range for n = {n}")));
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let mut map = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let f = factorial(i);
            let digit = (rank / f) as usize;
            rank %= f;
            map.push(pool.remove(digit));
        }
        Ok(Self { map })
    }

    /// All permutations of `0..n`, in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Self { map: cur.clone() });
            if !next_lex(&mut cur) {
                return out;
            }
        }
    }
}

/// In-place next permutation in lexicographic order; `false` after the last.
pub fn next_lex(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `n!`, saturating at `u128::MAX`.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128)
        .try_fold(1u128, |acc, k| acc.checked_mul(k))
        .unwrap_or(u128::MAX)
}
