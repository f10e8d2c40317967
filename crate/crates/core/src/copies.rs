//! Copies of `B_p` (or any pattern poset) inside `B_n`.
//!
//! A copy is identified with its image, the sorted list of its vertex
//! bitmasks. Embedding counts and image counts are tracked separately: for
//! `B_p` every image is hit by exactly `p!` strong embeddings.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::h_formula;
use crate::error::{param, Error, Result};
use crate::lattice::{chains_within, check_dimension, ChainList, SubsetMask, TChain};
use crate::numeric::falling_factorial;
use crate::posets::{embedding_images, is_induced_copy, EmbeddingKind, FinitePoset};

pub const DEFAULT_NODE_BUDGET: u64 = 200_000_000;

/// Resource limits for copy enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub node_budget: u64,
    /// Largest `p` for which weak copies of `B_p` are enumerated.
    pub max_weak_p: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { node_budget: DEFAULT_NODE_BUDGET, max_weak_p: 2 }
    }
}

impl Limits {
    pub fn with_budget(node_budget: u64) -> Self {
        Limits { node_budget, ..Limits::default() }
    }
}

/// An induced copy of `B_p` in `B_n`, given by its vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedCopy {
    pub n: usize,
    pub p: usize,
    pub vertices: Vec<SubsetMask>,
}

impl InducedCopy {
    /// Validates that `vertices` induce a copy of `B_p`.
    pub fn new(n: usize, p: usize, vertices: &[u32]) -> Result<Self> {
        check_dimension(n)?;
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let vertices = sorted.iter().map(|&b| SubsetMask::new(b, n)).collect::<Result<Vec<_>>>()?;
        let copy = InducedCopy { n, p, vertices };
        if !copy.verify() {
            return param(format!("{sorted:?} is not an induced copy of B_{p}"));
        }
        Ok(copy)
    }

    pub fn bits(&self) -> Vec<u32> {
        self.vertices.iter().map(|v| v.bits()).collect()
    }

    /// Checks the comparability pattern against `B_p` under some bijection.
    pub fn verify(&self) -> bool {
        self.p <= 10
            && self.vertices.len() == 1 << self.p
            && FinitePoset::boolean_lattice(self.p).is_ok_and(|bp| is_induced_copy(&bp, &self.bits()))
    }

    /// The t-chains of the copy, bottom-up, in canonical order.
    pub fn chains(&self, t: usize) -> Vec<TChain> {
        chains_within(&self.bits(), t)
            .into_iter()
            .map(|c| TChain::from_bits(self.n, &c).expect("members of a copy form valid chains"))
            .collect()
    }
}

/// Every copy of a pattern in `B_n`, canonically ordered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopySet {
    pub n: usize,
    pub mode: EmbeddingKind,
    pub pattern_size: usize,
    pub images: Vec<Vec<u32>>,
    pub embedding_count: u64,
}

impl CopySet {
    pub fn image_count(&self) -> usize {
        self.images.len()
    }
}

/// Copies of an arbitrary pattern poset.
pub fn enumerate_pattern_copies(pattern: &FinitePoset, n: usize, mode: EmbeddingKind, limits: &Limits) -> Result<CopySet> {
    check_dimension(n)?;
    let (images, embedding_count) = embedding_images(pattern, n, mode, limits.node_budget)?;
    Ok(CopySet { n, mode, pattern_size: pattern.size(), images, embedding_count })
}

/// Copies of `B_p` in `B_n`.
pub fn enumerate_copies(p: usize, n: usize, mode: EmbeddingKind, limits: &Limits) -> Result<CopySet> {
    if p > n {
        return param(format!("B_{p} does not fit in B_{n}"));
    }
    if mode == EmbeddingKind::Weak && p > limits.max_weak_p {
        return Err(Error::Unsupported(format!(
            "weak copies are limited to p <= {} (requested p = {p})",
            limits.max_weak_p
        )));
    }
    let pattern = FinitePoset::boolean_lattice(p)?;
    enumerate_pattern_copies(&pattern, n, mode, limits)
}

/// Counts of copies of `B_p` in `B_n`, optionally with per-chain incidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyCensus {
    pub p: usize,
    pub n: usize,
    #[serde(with = "crate::numeric::decimal")]
    pub embedding_count: BigUint,
    #[serde(with = "crate::numeric::decimal")]
    pub image_count: BigUint,
    /// `C_T` for every t-chain `T`, indexed by canonical chain index.
    pub per_chain: Option<Vec<u64>>,
    pub t: Option<usize>,
    /// Minimum of `C_T` over all t-chains of `B_n`.
    pub c_min: Option<u64>,
}

/// `N!/(N-m)! (a(m) - m)^{N-m}` and `N!/(N-m)! a(m)^{N-m}`.
pub fn aw_sandwich(m: usize, big_n: usize) -> Result<(BigUint, BigUint)> {
    if m > big_n {
        return param(format!("m = {m} exceeds N = {big_n}"));
    }
    let a = antichain_count(m)?;
    let ff = falling_factorial(big_n as u64, m as u64);
    let e = (big_n - m) as u32;
    let lower = &ff * (&a - BigUint::from(m)).pow(e);
    let upper = ff * a.pow(e);
    Ok((lower, upper))
}

/// Strong embedding and image counts of `B_p` in `B_n`.
pub fn g_counts(p: usize, n: usize, limits: &Limits) -> Result<CopyCensus> {
    match enumerate_copies(p, n, EmbeddingKind::Strong, limits) {
        Ok(set) => Ok(CopyCensus {
            p,
            n,
            embedding_count: BigUint::from(set.embedding_count),
            image_count: BigUint::from(set.image_count()),
            per_chain: None,
            t: None,
            c_min: None,
        }),
        Err(Error::BudgetExceeded { budget, .. }) => {
            let (lower, upper) = aw_sandwich(p, n)?;
            Err(Error::CountOutOfBudget { budget, lower: lower.to_string(), upper: upper.to_string() })
        }
        Err(e) => Err(e),
    }
}

/// Truth tables of the monotone Boolean functions on `k` variables.
fn monotone_functions(k: usize) -> Vec<u64> {
    let mut funcs = vec![0u64, 1u64];
    for level in 1..=k {
        let half = 1u32 << (level - 1);
        let mut next = Vec::new();
        for &hi in &funcs {
            for &lo in &funcs {
                if lo & !hi == 0 {
                    next.push(lo | hi << half);
                }
            }
        }
        funcs = next;
    }
    funcs
}

/// `a(m)`: the number of antichains of `B_m`, the empty antichain included.
///
/// Antichains correspond to monotone Boolean functions on `m` variables,
/// and those split as pairs `lo <= hi` of functions on `m - 1` variables.
pub fn antichain_count(m: usize) -> Result<BigUint> {
    if m > 6 {
        return Err(Error::Unsupported(format!("antichain counts are computed for m <= 6 (requested {m})")));
    }
    if m == 0 {
        return Ok(BigUint::from(2u32));
    }
    let smaller = monotone_functions(m - 1);
    let pairs: u64 = smaller
        .par_iter()
        .map(|&hi| smaller.iter().filter(|&&lo| lo & !hi == 0).count() as u64)
        .sum();
    Ok(BigUint::from(pairs))
}

/// Chains of `B_n` together with the copies that contain each of them.
#[derive(Clone, Debug)]
pub struct CopyTable {
    pub chains: ChainList,
    pub copies: CopySet,
    /// Canonical chain indices of each copy's t-chains.
    pub copy_chains: Vec<Vec<u32>>,
    /// Copy indices through each chain.
    pub incidence: Vec<Vec<u32>>,
}

impl CopyTable {
    pub fn new(copies: CopySet, t: usize) -> Result<Self> {
        let chains = ChainList::full(copies.n, t)?;
        let copy_chains: Vec<Vec<u32>> = copies
            .images
            .par_iter()
            .map(|img| {
                chains_within(img, t)
                    .iter()
                    .map(|c| chains.index_of(c).expect("chains of a copy are chains of B_n") as u32)
                    .collect()
            })
            .collect();
        let mut incidence = vec![Vec::new(); chains.len()];
        for (ci, cs) in copy_chains.iter().enumerate() {
            for &c in cs {
                incidence[c as usize].push(ci as u32);
            }
        }
        Ok(CopyTable { chains, copies, copy_chains, incidence })
    }

    pub fn for_boolean(p: usize, n: usize, t: usize, mode: EmbeddingKind, limits: &Limits) -> Result<Self> {
        if t == 0 || t > p + 1 {
            return param(format!("chain length t = {t} must satisfy 1 <= t <= p + 1 = {}", p + 1));
        }
        CopyTable::new(enumerate_copies(p, n, mode, limits)?, t)
    }

    pub fn n(&self) -> usize {
        self.chains.n()
    }

    pub fn t(&self) -> usize {
        self.chains.t()
    }

    pub fn copy_count(&self) -> usize {
        self.copy_chains.len()
    }

    /// `C_T` for every chain.
    pub fn per_chain_counts(&self) -> Vec<u64> {
        self.incidence.iter().map(|v| v.len() as u64).collect()
    }

    /// `C_min` over a set of chain indices; `None` for an empty set.
    pub fn c_min_over(&self, chain_set: &[usize]) -> Option<u64> {
        chain_set.iter().map(|&c| self.incidence[c].len() as u64).min()
    }

    /// Largest number of other copies sharing at least one chain with a copy.
    pub fn dependency_degree(&self) -> u64 {
        (0..self.copy_count())
            .into_par_iter()
            .map_init(
                || vec![u32::MAX; self.copy_count()],
                |stamp, s| {
                    let mut count = 0u64;
                    for &c in &self.copy_chains[s] {
                        for &other in &self.incidence[c as usize] {
                            if other as usize != s && stamp[other as usize] != s as u32 {
                                stamp[other as usize] = s as u32;
                                count += 1;
                            }
                        }
                    }
                    count
                },
            )
            .max()
            .unwrap_or(0)
    }

    /// Chain indices of a chain list given as bitmask tuples.
    pub fn chain_indices(&self, chains: &[TChain]) -> Result<Vec<usize>> {
        chains
            .iter()
            .map(|c| {
                if c.n() != self.n() {
                    return param(format!("chain lives in B_{}, expected B_{}", c.n(), self.n()));
                }
                self.chains
                    .index_of(&c.bits())
                    .ok_or_else(|| Error::Parameter(format!("{:?} is not a {}-chain", c.bits(), self.t())))
            })
            .collect()
    }
}

/// Census with `C_T` for every t-chain of `B_n` and `C_min` over all of them.
pub fn chain_copy_counts(p: usize, n: usize, t: usize, limits: &Limits) -> Result<CopyCensus> {
    let table = CopyTable::for_boolean(p, n, t, EmbeddingKind::Strong, limits)?;
    let per_chain = table.per_chain_counts();
    let c_min = per_chain.iter().copied().min();
    Ok(CopyCensus {
        p,
        n,
        embedding_count: BigUint::from(table.copies.embedding_count),
        image_count: BigUint::from(table.copy_count()),
        per_chain: Some(per_chain),
        t: Some(t),
        c_min,
    })
}

/// Result of [`concentration_witness`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Concentration {
    Witness { copy: InducedCopy, hits: usize },
    PremiseNotMet { chain_count: usize, c_min: u64, image_count: u64, s: usize },
}

/// Finds an induced copy with at least `s` of its t-chains in `chain_set`,
/// provided `|chain_set| · C_min(chain_set) >= s · g(p, n)`.
pub fn concentration_witness(
    p: usize,
    n: usize,
    t: usize,
    chain_set: &[TChain],
    s: usize,
    limits: &Limits,
) -> Result<Concentration> {
    let hp = h_formula(p, t)?;
    if s == 0 || BigUint::from(s) > hp {
        return param(format!("s = {s} must satisfy 1 <= s <= h_{p}({t}) = {hp}"));
    }
    let table = CopyTable::for_boolean(p, n, t, EmbeddingKind::Strong, limits)?;
    let mut indices = table.chain_indices(chain_set)?;
    indices.sort_unstable();
    indices.dedup();
    let image_count = table.copy_count() as u64;
    let c_min = table.c_min_over(&indices).unwrap_or(0);
    let premise = c_min > 0 && (indices.len() as u128) * (c_min as u128) >= (s as u128) * (image_count as u128);
    if !premise {
        return Ok(Concentration::PremiseNotMet { chain_count: indices.len(), c_min, image_count, s });
    }
    match densest_copy(&table, &indices) {
        Some((idx, hits)) if hits >= s => Ok(Concentration::Witness {
            copy: InducedCopy::new(n, p, &table.copies.images[idx])?,
            hits,
        }),
        _ => unreachable!("averaging guarantees a copy with at least s chains in the set"),
    }
}

/// The copy meeting `chain_set` in the most chains (first in canonical order
/// on ties), with its hit count.
pub fn densest_copy(table: &CopyTable, chain_set: &[usize]) -> Option<(usize, usize)> {
    let mut member = vec![false; table.chains.len()];
    for &c in chain_set {
        member[c] = true;
    }
    table
        .copy_chains
        .iter()
        .enumerate()
        .map(|(i, cs)| (i, cs.iter().filter(|&&c| member[c as usize]).count()))
        .fold(None, |best: Option<(usize, usize)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
}

/// `p!` as a big integer, the size of `Aut(B_p)`.
pub fn boolean_automorphisms(p: usize) -> BigUint {
    (1..=p as u64).fold(BigUint::one(), |acc, i| acc * i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_t_chains;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    /// Brute force over all injections `B_p → B_n` (test oracle).
    fn brute_force_embeddings(p: usize, n: usize, weak: bool) -> (u64, usize) {
        let size = 1usize << p;
        let host = 1u32 << n;
        let mut count = 0;
        let mut images = std::collections::BTreeSet::new();
        let mut f = vec![0u32; size];
        fn rec(
            i: usize,
            f: &mut Vec<u32>,
            host: u32,
            weak: bool,
            count: &mut u64,
            images: &mut std::collections::BTreeSet<Vec<u32>>,
        ) {
            let size = f.len();
            if i == size {
                for x in 0..size {
                    for y in 0..size {
                        let pat = (x & !y) == 0;
                        let img = f[x] & !f[y] == 0;
                        if (weak && pat && !img) || (!weak && pat != img) {
                            return;
                        }
                    }
                }
                *count += 1;
                let mut s = f.clone();
                s.sort_unstable();
                images.insert(s);
                return;
            }
            for v in 0..host {
                if !f[..i].contains(&v) {
                    f[i] = v;
                    rec(i + 1, f, host, weak, count, images);
                }
            }
        }
        rec(0, &mut f, host, weak, &mut count, &mut images);
        (count, images.len())
    }

    #[test]
    fn copy_examples() {
        let l = Limits::default();
        let s = enumerate_copies(2, 2, EmbeddingKind::Strong, &l).unwrap();
        assert_eq!((s.image_count(), s.embedding_count), (1, 2));
        assert_eq!(enumerate_copies(1, 2, EmbeddingKind::Strong, &l).unwrap().image_count(), 5);
        assert_eq!(enumerate_copies(1, 3, EmbeddingKind::Strong, &l).unwrap().image_count(), 19);
        assert!(enumerate_copies(3, 2, EmbeddingKind::Strong, &l).is_err());
        assert!(matches!(enumerate_copies(3, 3, EmbeddingKind::Weak, &l), Err(Error::Unsupported(_))));
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for (p, n) in [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3)] {
            for weak in [false, true] {
                let mode = if weak { EmbeddingKind::Weak } else { EmbeddingKind::Strong };
                let s = enumerate_copies(p, n, mode, &Limits::default()).unwrap();
                assert_eq!(
                    (s.embedding_count, s.image_count()),
                    brute_force_embeddings(p, n, weak),
                    "p={p} n={n} weak={weak}"
                );
            }
        }
    }

    #[test]
    fn g_count_examples() {
        let l = Limits::default();
        assert_eq!(g_counts(1, 3, &l).unwrap().embedding_count, big(19));
        let c = g_counts(2, 2, &l).unwrap();
        assert_eq!((c.embedding_count, c.image_count), (big(2), big(1)));
        let c = g_counts(2, 3, &l).unwrap();
        assert_eq!((c.embedding_count, c.image_count), (big(30), big(15)));
    }

    #[test]
    fn g_count_budget_reports_interval() {
        match g_counts(2, 4, &Limits::with_budget(5)) {
            Err(Error::CountOutOfBudget { lower, upper, .. }) => {
                assert_eq!(lower, "192");
                assert_eq!(upper, "432");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn antichain_counts() {
        // Brute force over all families of B_m (test oracle).
        for m in 0..=3usize {
            let size = 1u32 << m;
            let mut brute = 0u64;
            for fam in 0u64..(1 << size) {
                let members: Vec<u32> = (0..size).filter(|x| fam >> x & 1 == 1).collect();
                if members.iter().all(|&a| members.iter().all(|&b| a == b || a & !b != 0)) {
                    brute += 1;
                }
            }
            assert_eq!(antichain_count(m).unwrap(), big(brute));
        }
        assert_eq!(antichain_count(1).unwrap(), big(3));
        assert_eq!(antichain_count(2).unwrap(), big(6));
        assert_eq!(antichain_count(3).unwrap(), big(20));
        assert_eq!(antichain_count(4).unwrap(), big(168));
        assert_eq!(antichain_count(5).unwrap(), big(7581));
        assert!(antichain_count(7).is_err());
    }

    #[test]
    fn per_chain_examples() {
        let l = Limits::default();
        let c = chain_copy_counts(2, 2, 2, &l).unwrap();
        assert_eq!(c.per_chain.as_deref(), Some(&[1u64, 1, 1, 1, 1][..]));
        assert_eq!(c.c_min, Some(1));
        let c = chain_copy_counts(1, 2, 2, &l).unwrap();
        assert_eq!(c.per_chain.as_deref(), Some(&[1u64; 5][..]));
        assert!(matches!(chain_copy_counts(1, 2, 3, &l), Err(Error::Parameter(_))));
        let c = chain_copy_counts(1, 2, 1, &l).unwrap();
        assert_eq!(c.per_chain.as_deref(), Some(&[3u64, 2, 2, 3][..]));
    }

    #[test]
    fn per_chain_table_b2_in_b3() {
        // Frozen from an exhaustive scan over all 4-tuples of B_3.
        let c = chain_copy_counts(2, 3, 2, &Limits::default()).unwrap();
        let expected = [5u64, 5, 4, 5, 4, 4, 9, 2, 2, 4, 2, 2, 4, 5, 2, 2, 4, 5, 5];
        assert_eq!(c.per_chain.as_deref(), Some(&expected[..]));
        assert_eq!(c.c_min, Some(2));
        let total: u64 = expected.iter().sum();
        assert_eq!(big(total), c.image_count * 5u32);
    }

    #[test]
    fn concentration_examples() {
        let l = Limits::default();
        let all = enumerate_t_chains(2, 2).unwrap();
        match concentration_witness(2, 2, 2, &all, 5, &l).unwrap() {
            Concentration::Witness { copy, hits } => {
                assert_eq!(copy.bits(), vec![0, 1, 2, 3]);
                assert_eq!(hits, 5);
            }
            other => panic!("{other:?}"),
        }
        let four = &all[..4];
        assert!(matches!(
            concentration_witness(2, 2, 2, four, 5, &l).unwrap(),
            Concentration::PremiseNotMet { chain_count: 4, c_min: 1, image_count: 1, s: 5 }
        ));
        assert!(concentration_witness(2, 2, 2, &all, 6, &l).is_err());
    }

    #[test]
    fn block_copy_is_found_by_scan() {
        let l = Limits::default();
        let block = InducedCopy::new(3, 2, &[1, 3, 5, 7]).unwrap();
        let chains = block.chains(2);
        // 5 chains with C_min = 2 against 15 images: the averaging premise fails.
        assert!(matches!(
            concentration_witness(2, 3, 2, &chains, 5, &l).unwrap(),
            Concentration::PremiseNotMet { chain_count: 5, c_min: 2, image_count: 15, s: 5 }
        ));
        let table = CopyTable::for_boolean(2, 3, 2, EmbeddingKind::Strong, &l).unwrap();
        let idx = table.chain_indices(&chains).unwrap();
        let (best, hits) = densest_copy(&table, &idx).unwrap();
        assert_eq!(hits, 5);
        assert_eq!(table.copies.images[best], vec![1, 3, 5, 7]);
    }

    #[test]
    fn induced_copy_validation() {
        assert!(InducedCopy::new(3, 2, &[7, 5, 3, 1]).is_ok());
        assert!(InducedCopy::new(3, 2, &[0, 1, 3, 7]).is_err());
        assert_eq!(InducedCopy::new(2, 2, &[0, 1, 2, 3]).unwrap().chains(2).len(), 5);
    }

    #[test]
    fn dependency_degrees() {
        let l = Limits::default();
        let d = |p, n, t| CopyTable::for_boolean(p, n, t, EmbeddingKind::Strong, &l).unwrap().dependency_degree();
        assert_eq!(d(2, 2, 2), 0);
        assert_eq!(d(2, 3, 2), 14);
        assert_eq!(d(2, 3, 1), 14);
        assert_eq!(d(1, 3, 1), 12);
    }

    #[test]
    fn automorphism_factor() {
        for p in 0..=3 {
            for n in p..=5 {
                let c = g_counts(p, n, &Limits::default()).unwrap();
                assert_eq!(c.embedding_count, c.image_count * boolean_automorphisms(p), "p={p} n={n}");
            }
        }
    }
}
