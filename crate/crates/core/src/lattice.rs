//! Subsets and t-chains of the Boolean lattice `B_n`.
//!
//! An element of `B_n` is an `n`-bit integer: bit `i` is set when element
//! `i + 1` of `[n]` is present. Chains are listed in the canonical order,
//! lexicographic on the tuple of member bitmasks.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Largest dimension accepted by the enumeration paths. Counting paths are
/// not subject to this limit.
pub const MAX_DIMENSION: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetMask(u32);

impl SubsetMask {
    pub fn new(bits: u32, n: usize) -> Result<Self> {
        check_dimension(n)?;
        if u64::from(bits) >= 1u64 << n {
            return param(format!("subset {bits} does not fit in B_{n}"));
        }
        Ok(SubsetMask(bits))
    }

    /// Builds a mask from 1-indexed ground-set elements.
    pub fn from_elements(elements: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &e in elements {
            if e == 0 || e > n {
                return param(format!("element {e} is not in [{n}]"));
            }
            bits |= 1 << (e - 1);
        }
        SubsetMask::new(bits, n)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    pub const fn rank(self) -> u32 {
        self.0.count_ones()
    }

    pub const fn is_subset_of(self, other: SubsetMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_proper_subset_of(self, other: SubsetMask) -> bool {
        self.0 != other.0 && self.is_subset_of(other)
    }

    /// 1-indexed members, ascending.
    pub fn elements(self) -> Vec<usize> {
        (0..32).filter(|i| self.0 >> i & 1 == 1).map(|i| i + 1).collect()
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A strictly inclusion-increasing tuple of subsets of `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TChain {
    n: usize,
    members: Vec<SubsetMask>,
}

impl TChain {
    pub fn new(n: usize, members: Vec<SubsetMask>) -> Result<Self> {
        check_dimension(n)?;
        if members.is_empty() {
            return param("a t-chain needs at least one member");
        }
        for m in &members {
            SubsetMask::new(m.bits(), n)?;
        }
        if let Some(w) = members.windows(2).find(|w| !w[0].is_proper_subset_of(w[1])) {
            return param(format!("{} is not a proper subset of {}", w[0], w[1]));
        }
        Ok(TChain { n, members })
    }

    pub fn from_bits(n: usize, bits: &[u32]) -> Result<Self> {
        TChain::new(n, bits.iter().map(|&b| SubsetMask(b)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[SubsetMask] {
        &self.members
    }

    pub fn bits(&self) -> Vec<u32> {
        self.members.iter().map(|m| m.bits()).collect()
    }
}

impl PartialOrd for TChain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TChain {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members.cmp(&other.members).then(self.n.cmp(&other.n))
    }
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n > MAX_DIMENSION {
        return param(format!("dimension {n} exceeds the enumeration limit {MAX_DIMENSION}"));
    }
    Ok(())
}

#[inline]
pub(crate) const fn is_subset(a: u32, b: u32) -> bool {
    a & !b == 0
}

/// Calls `f` on every proper superset of `x` within `full`, ascending.
#[inline]
pub(crate) fn for_each_proper_superset(x: u32, full: u32, mut f: impl FnMut(u32)) {
    let free = full & !x;
    let mut s = 0u32;
    loop {
        s = s.wrapping_sub(free) & free;
        if s == 0 {
            break;
        }
        f(x | s);
    }
}

/// Ranks `[lo, hi]` of the symmetric middle window of height `m` in `B_n`.
pub fn middle_window(n: usize, m: usize) -> Result<(usize, usize)> {
    if m == 0 || m > n {
        return param(format!("window height {m} must satisfy 1 <= m <= n = {n}"));
    }
    let lo = (n - m) / 2;
    Ok((lo, lo + m - 1))
}

/// Dense, canonically ordered list of the t-chains of `B_n` restricted to a
/// rank window. Chains are stored flat, `t` members per chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainList {
    n: usize,
    t: usize,
    flat: Vec<u32>,
}

impl ChainList {
    /// All t-chains of `B_n`.
    pub fn full(n: usize, t: usize) -> Result<Self> {
        check_dimension(n)?;
        if t == 0 || t > n + 1 {
            return param(format!("chain length t = {t} must satisfy 1 <= t <= n + 1 = {}", n + 1));
        }
        Ok(Self::build(n, t, 0, n))
    }

    /// The t-chains whose members all have rank in the middle window of
    /// height `m`.
    pub fn middle(n: usize, m: usize, t: usize) -> Result<Self> {
        check_dimension(n)?;
        let (lo, hi) = middle_window(n, m)?;
        if t == 0 || t > m {
            return param(format!("chain length t = {t} must satisfy 1 <= t <= m = {m}"));
        }
        Ok(Self::build(n, t, lo, hi))
    }

    fn build(n: usize, t: usize, lo: usize, hi: usize) -> Self {
        let full = ((1u64 << n) - 1) as u32;
        let in_window = |x: u32| (lo..=hi).contains(&(x.count_ones() as usize));
        let shards: Vec<Vec<u32>> = (0..=full)
            .into_par_iter()
            .filter(|&x| in_window(x))
            .map(|x| {
                let mut out = Vec::new();
                let mut stack = vec![x];
                extend_chain(&mut stack, t, full, &in_window, &mut out);
                out
            })
            .collect();
        ChainList { n, t, flat: shards.concat() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.t
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.flat[i * self.t..(i + 1) * self.t]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.flat.chunks_exact(self.t)
    }

    /// Canonical index of a chain given by its member bitmasks.
    pub fn index_of(&self, chain: &[u32]) -> Option<usize> {
        if chain.len() != self.t {
            return None;
        }
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(chain) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn to_tchains(&self) -> Vec<TChain> {
        self.iter()
            .map(|c| TChain {
                n: self.n,
                members: c.iter().map(|&b| SubsetMask(b)).collect(),
            })
            .collect()
    }
}

fn extend_chain(
    stack: &mut Vec<u32>,
    t: usize,
    full: u32,
    in_window: &impl Fn(u32) -> bool,
    out: &mut Vec<u32>,
) {
    if stack.len() == t {
        out.extend_from_slice(stack);
        return;
    }
    let top = *stack.last().expect("chain prefix is never empty");
    for_each_proper_superset(top, full, |y| {
        if in_window(y) {
            stack.push(y);
            extend_chain(stack, t, full, in_window, out);
            stack.pop();
        }
    });
}

/// Every t-chain of `B_n`, in canonical order.
pub fn enumerate_t_chains(n: usize, t: usize) -> Result<Vec<TChain>> {
    Ok(ChainList::full(n, t)?.to_tchains())
}

/// The t-chains lying in ranks `⌊(n-m)/2⌋ ..= ⌊(n-m)/2⌋ + m - 1`.
pub fn enumerate_middle_t_chains(n: usize, m: usize, t: usize) -> Result<Vec<TChain>> {
    Ok(ChainList::middle(n, m, t)?.to_tchains())
}

/// The t-chains of a family of subsets viewed as an induced subposet of
/// `B_n`. Each chain is listed bottom-up; the output is lexicographic.
pub fn chains_within(family: &[u32], t: usize) -> Vec<Vec<u32>> {
    let mut sorted = family.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(t);
    fn go(sorted: &[u32], start: usize, t: usize, stack: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if stack.len() == t {
            out.push(stack.clone());
            return;
        }
        for i in start..sorted.len() {
            let y = sorted[i];
            if stack.last().is_none_or(|&top| top != y && is_subset(top, y)) {
                stack.push(y);
                go(sorted, i + 1, t, stack, out);
                stack.pop();
            }
        }
    }
    if t > 0 {
        go(&sorted, 0, t, &mut stack, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_chain_counts() {
        assert_eq!(enumerate_t_chains(2, 2).unwrap().len(), 5);
        assert_eq!(enumerate_t_chains(3, 3).unwrap().len(), 18);
        for p in 0..6 {
            assert_eq!(enumerate_t_chains(p, 1).unwrap().len(), 1 << p);
        }
        assert_eq!(enumerate_t_chains(0, 1).unwrap().len(), 1);
    }

    #[test]
    fn full_chain_length_is_allowed() {
        assert_eq!(enumerate_t_chains(3, 4).unwrap().len(), 6);
        assert!(enumerate_t_chains(3, 5).is_err());
        assert!(enumerate_t_chains(3, 0).is_err());
    }

    #[test]
    fn middle_chain_examples() {
        assert_eq!(enumerate_middle_t_chains(3, 2, 2).unwrap().len(), 3);
        assert_eq!(enumerate_middle_t_chains(4, 2, 2).unwrap().len(), 12);
        assert_eq!(enumerate_middle_t_chains(4, 2, 1).unwrap().len(), 10);
        assert!(enumerate_middle_t_chains(4, 2, 3).is_err());
        assert!(enumerate_middle_t_chains(4, 5, 1).is_err());
    }

    #[test]
    fn b2_two_chains_are_canonical() {
        let chains: Vec<Vec<u32>> = enumerate_t_chains(2, 2).unwrap().iter().map(TChain::bits).collect();
        assert_eq!(chains, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn index_lookup_round_trips() {
        let list = ChainList::full(4, 3).unwrap();
        for (i, c) in list.iter().enumerate() {
            assert_eq!(list.index_of(c), Some(i));
        }
        assert_eq!(list.index_of(&[3, 1, 0]), None);
        assert_eq!(list.index_of(&[0, 1]), None);
    }

    #[test]
    fn tchain_rejects_non_chains() {
        assert!(TChain::from_bits(2, &[1, 2]).is_err());
        assert!(TChain::from_bits(2, &[1, 1]).is_err());
        assert!(TChain::from_bits(2, &[0, 4]).is_err());
        assert!(TChain::from_bits(2, &[0, 3]).is_ok());
    }

    #[test]
    fn subset_mask_basics() {
        let a = SubsetMask::from_elements(&[1, 3], 3).unwrap();
        assert_eq!(a.bits(), 0b101);
        assert_eq!(a.rank(), 2);
        assert_eq!(a.to_string(), "{1,3}");
        assert!(SubsetMask::new(8, 3).is_err());
        assert!(SubsetMask::from_elements(&[4], 3).is_err());
    }

    #[test]
    fn chains_within_family() {
        // B_2 as a family: its 2-chains are those of B_2.
        assert_eq!(chains_within(&[3, 0, 2, 1], 2).len(), 5);
        // An antichain has no 2-chains.
        assert!(chains_within(&[1, 2, 4], 2).is_empty());
    }
}
