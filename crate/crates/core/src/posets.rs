//! Finite posets, their t-chain counts, and embeddings into Boolean lattices.
//!
//! Embeddings are found by backtracking over the pattern's elements in a
//! fixed linear extension. An element whose predecessors are already placed
//! can only map to supersets of the union of their images, which keeps the
//! candidate sets small.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::lattice::{check_dimension, for_each_proper_superset, is_subset, SubsetMask, MAX_DIMENSION};

/// A finite poset stored as its full order relation.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitePoset {
    size: usize,
    leq: Vec<bool>,
}

impl fmt::Debug for FinitePoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinitePoset")
            .field("size", &self.size)
            .field("covers", &self.covers())
            .finish()
    }
}

impl FinitePoset {
    /// Builds a poset from the full relation matrix (`leq[i * size + j]` iff
    /// `i <= j`), checking the poset axioms.
    pub fn from_relation(size: usize, leq: Vec<bool>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidPoset("a poset needs at least one element".into()));
        }
        if leq.len() != size * size {
            return param(format!("relation has {} entries, expected {}", leq.len(), size * size));
        }
        let at = |i: usize, j: usize| leq[i * size + j];
        for i in 0..size {
            if !at(i, i) {
                return Err(Error::InvalidPoset(format!("element {} is not related to itself", i + 1)));
            }
            for j in 0..size {
                if i != j && at(i, j) && at(j, i) {
                    return Err(Error::InvalidPoset(format!(
                        "elements {} and {} are mutually related",
                        i + 1,
                        j + 1
                    )));
                }
                for k in 0..size {
                    if at(i, j) && at(j, k) && !at(i, k) {
                        return Err(Error::InvalidPoset(format!(
                            "relation is not transitive at {} <= {} <= {}",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(FinitePoset { size, leq })
    }

    /// Builds a poset from 0-indexed pairs `(i, j)` meaning `i < j`, taking
    /// the reflexive-transitive closure.
    pub fn from_covers(size: usize, covers: &[(usize, usize)]) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidPoset("a poset needs at least one element".into()));
        }
        let mut leq = vec![false; size * size];
        for i in 0..size {
            leq[i * size + i] = true;
        }
        for &(i, j) in covers {
            if i >= size || j >= size {
                return param(format!("pair ({}, {}) is out of range for {size} elements", i + 1, j + 1));
            }
            if i == j {
                return Err(Error::InvalidPoset(format!("element {} cannot cover itself", i + 1)));
            }
            leq[i * size + j] = true;
        }
        // Warshall closure.
        for k in 0..size {
            for i in 0..size {
                if leq[i * size + k] {
                    for j in 0..size {
                        if leq[k * size + j] {
                            leq[i * size + j] = true;
                        }
                    }
                }
            }
        }
        FinitePoset::from_relation(size, leq)
    }

    /// Parses the text format: a first line with the element count `m`,
    /// then one line `i j` per covering pair (element `i` covered by `j`),
    /// 1-indexed. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (first_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing element count".into(),
        })?;
        let size: usize = header.parse().map_err(|_| Error::Parse {
            line: first_line,
            message: format!("expected an element count, found {header:?}"),
        })?;
        if size == 0 {
            return Err(Error::Parse { line: first_line, message: "element count must be positive".into() });
        }
        let mut covers = Vec::new();
        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected two element indices, found {content:?}"),
                });
            }
            let mut pair = [0usize; 2];
            for (slot, field) in pair.iter_mut().zip(&fields) {
                let v: usize = field.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("{field:?} is not an element index"),
                })?;
                if v == 0 || v > size {
                    return Err(Error::Parse {
                        line,
                        message: format!("element index {v} is outside 1..={size}"),
                    });
                }
                *slot = v - 1;
            }
            if pair[0] == pair[1] {
                return Err(Error::Parse { line, message: format!("element {} cannot cover itself", pair[0] + 1) });
            }
            covers.push((pair[0], pair[1]));
        }
        FinitePoset::from_covers(size, &covers).map_err(|e| match e {
            Error::InvalidPoset(message) => Error::Parse { line: first_line, message },
            other => other,
        })
    }

    /// The chain `C_m`: `0 < 1 < … < m-1`.
    pub fn chain(m: usize) -> Result<Self> {
        let covers: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        FinitePoset::from_covers(m, &covers)
    }

    /// The antichain `A_m`.
    pub fn antichain(m: usize) -> Result<Self> {
        FinitePoset::from_covers(m, &[])
    }

    /// `B_p` materialized as a poset; element `i` is the subset with bitmask `i`.
    pub fn boolean_lattice(p: usize) -> Result<Self> {
        if p > 10 {
            return param(format!("B_{p} is too large to materialize as a poset"));
        }
        let size = 1usize << p;
        let mut leq = vec![false; size * size];
        for i in 0..size {
            for j in 0..size {
                leq[i * size + j] = is_subset(i as u32, j as u32);
            }
        }
        Ok(FinitePoset { size, leq })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.size + j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq(i, j) || self.leq(j, i)
    }

    /// Cover relations `(i, j)`, 0-indexed, lexicographic.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.size;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.lt(i, j) && !(0..n).any(|k| self.lt(i, k) && self.lt(k, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Serializes to the text format accepted by [`FinitePoset::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.size);
        for (i, j) in self.covers() {
            s.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        s
    }

    /// A linear extension: elements ordered by down-set size, then index.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by_key(|&x| ((0..self.size).filter(|&y| self.leq(y, x)).count(), x));
        order
    }

    /// Size of a largest chain.
    pub fn height(&self) -> usize {
        let order = self.linear_extension();
        let mut longest = vec![1usize; self.size];
        for (pos, &x) in order.iter().enumerate() {
            for &y in &order[..pos] {
                if self.lt(y, x) {
                    longest[x] = longest[x].max(longest[y] + 1);
                }
            }
        }
        longest.into_iter().max().unwrap_or(0)
    }
}

/// `h(P, t)`: the number of t-element chains of `P`.
pub fn t_chain_count_poset(poset: &FinitePoset, t: usize) -> Result<BigUint> {
    if t == 0 {
        return param("chain length t must be at least 1");
    }
    let order = poset.linear_extension();
    // ending[x] = number of j-chains with top element x.
    let mut ending = vec![BigUint::from(1u32); poset.size()];
    for _ in 1..t {
        let mut next = vec![BigUint::zero(); poset.size()];
        for (pos, &x) in order.iter().enumerate() {
            for &y in &order[..pos] {
                if poset.lt(y, x) && !ending[y].is_zero() {
                    next[x] += &ending[y];
                }
            }
        }
        ending = next;
    }
    Ok(ending.into_iter().sum())
}

/// The down-set map `x ↦ {y : y <= x}`, a strong embedding of `P` into
/// `B_{|P|}`. The result is verified before it is returned.
pub fn downset_embedding(poset: &FinitePoset) -> Result<Vec<SubsetMask>> {
    let m = poset.size();
    check_dimension(m)?;
    let images: Vec<u32> = (0..m)
        .map(|x| (0..m).filter(|&y| poset.leq(y, x)).fold(0u32, |acc, y| acc | 1 << y))
        .collect();
    if !is_strong_embedding(poset, &images) {
        unreachable!("down-set images always reflect the order");
    }
    images.into_iter().map(|b| SubsetMask::new(b, m)).collect()
}

/// Checks that `images[x]` is injective and `x <= y ⇔ images[x] ⊆ images[y]`.
pub fn is_strong_embedding(poset: &FinitePoset, images: &[u32]) -> bool {
    let m = poset.size();
    images.len() == m
        && (0..m).all(|x| {
            (0..m).all(|y| {
                (x == y || images[x] != images[y]) && (poset.leq(x, y) == is_subset(images[x], images[y]))
            })
        })
}

/// Checks that `images` is an order-preserving injection.
pub fn is_weak_embedding(poset: &FinitePoset, images: &[u32]) -> bool {
    let m = poset.size();
    images.len() == m
        && (0..m).all(|x| {
            (0..m).all(|y| {
                (x == y || images[x] != images[y]) && (!poset.leq(x, y) || is_subset(images[x], images[y]))
            })
        })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingKind {
    /// Injections preserving comparability and incomparability.
    Strong,
    /// Order-preserving injections.
    Weak,
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingKind::Strong => "strong",
            EmbeddingKind::Weak => "weak",
        })
    }
}

impl std::str::FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(EmbeddingKind::Strong),
            "weak" => Ok(EmbeddingKind::Weak),
            other => param(format!("unknown mode {other:?}, expected strong or weak")),
        }
    }
}

/// Backtracking state for embedding a pattern poset into `B_n`.
struct EmbeddingSearch<'a> {
    kind: EmbeddingKind,
    full: u32,
    /// Pattern elements in linear-extension order.
    order: Vec<usize>,
    /// For each position, earlier positions whose element lies below it.
    below: Vec<Vec<usize>>,
    /// For each position, earlier positions incomparable to it.
    incomparable: Vec<Vec<usize>>,
    host: Option<&'a [bool]>,
    budget: u64,
    nodes: u64,
    placed: Vec<u32>,
    scratch: Vec<u32>,
}

enum Flow {
    Continue,
    Stop,
}

impl<'a> EmbeddingSearch<'a> {
    fn new(pattern: &FinitePoset, n: usize, kind: EmbeddingKind, host: Option<&'a [bool]>, budget: u64) -> Self {
        let order = pattern.linear_extension();
        let below = (0..order.len())
            .map(|pos| (0..pos).filter(|&q| pattern.lt(order[q], order[pos])).collect())
            .collect();
        let incomparable = (0..order.len())
            .map(|pos| (0..pos).filter(|&q| !pattern.comparable(order[q], order[pos])).collect())
            .collect();
        EmbeddingSearch {
            kind,
            full: ((1u64 << n) - 1) as u32,
            order,
            below,
            incomparable,
            host,
            budget,
            nodes: 0,
            placed: Vec::with_capacity(pattern.size()),
            scratch: vec![0; pattern.size()],
        }
    }

    fn admissible(&self, pos: usize, x: u32) -> bool {
        if let Some(host) = self.host {
            if !host[x as usize] {
                return false;
            }
        }
        if self.placed.contains(&x) {
            return false;
        }
        match self.kind {
            EmbeddingKind::Weak => true,
            EmbeddingKind::Strong => self.incomparable[pos].iter().all(|&q| {
                let y = self.placed[q];
                !is_subset(x, y) && !is_subset(y, x)
            }),
        }
    }

    fn try_place(&mut self, x: u32, visit: &mut impl FnMut(&[u32]) -> Flow) -> Result<Flow> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget, explored: self.nodes });
        }
        let pos = self.placed.len();
        if !self.admissible(pos, x) {
            return Ok(Flow::Continue);
        }
        self.placed.push(x);
        let flow = self.descend(visit);
        self.placed.pop();
        flow
    }

    fn descend(&mut self, visit: &mut impl FnMut(&[u32]) -> Flow) -> Result<Flow> {
        let pos = self.placed.len();
        if pos == self.order.len() {
            for (q, &e) in self.order.iter().enumerate() {
                self.scratch[e] = self.placed[q];
            }
            return Ok(visit(&self.scratch));
        }
        let floor = self.below[pos].iter().fold(0u32, |acc, &q| acc | self.placed[q]);
        let candidates = self.candidates(pos, floor);
        for x in candidates {
            if let Flow::Stop = self.try_place(x, visit)? {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }

    fn candidates(&self, pos: usize, floor: u32) -> Vec<u32> {
        if self.below[pos].is_empty() {
            return (0..=self.full).collect();
        }
        let mut out = vec![floor];
        for_each_proper_superset(floor, self.full, |y| out.push(y));
        out
    }
}

/// Calls `visit` with every embedding of `pattern` into `B_n` (indexed by
/// pattern element), optionally restricted to host elements with
/// `host[x] == true`. Returns the number of search nodes used.
pub fn for_each_embedding(
    pattern: &FinitePoset,
    n: usize,
    kind: EmbeddingKind,
    host: Option<&[bool]>,
    budget: u64,
    mut visit: impl FnMut(&[u32]),
) -> Result<u64> {
    check_dimension(n)?;
    if let Some(h) = host {
        if h.len() != 1 << n {
            return param("host filter must have one entry per element of B_n");
        }
    }
    let mut search = EmbeddingSearch::new(pattern, n, kind, host, budget);
    search.descend(&mut |e: &[u32]| {
        visit(e);
        Flow::Continue
    })?;
    Ok(search.nodes)
}

/// First embedding found, if any.
pub fn find_embedding(
    pattern: &FinitePoset,
    n: usize,
    kind: EmbeddingKind,
    host: Option<&[bool]>,
    budget: u64,
) -> Result<Option<Vec<u32>>> {
    check_dimension(n)?;
    let mut search = EmbeddingSearch::new(pattern, n, kind, host, budget);
    let mut found = None;
    search.descend(&mut |e: &[u32]| {
        found = Some(e.to_vec());
        Flow::Stop
    })?;
    Ok(found)
}

/// Images, embedding count and nodes used by one shard.
type Shard = (Vec<Vec<u32>>, u64, u64);

/// All images (sorted vertex lists, canonically ordered) of embeddings of
/// `pattern` into `B_n`, plus the number of embeddings.
///
/// The search is sharded on the image of the first pattern element; every
/// shard gets the full node budget, results are merged in shard order and
/// the summed node count is checked against the budget again.
pub fn embedding_images(
    pattern: &FinitePoset,
    n: usize,
    kind: EmbeddingKind,
    budget: u64,
) -> Result<(Vec<Vec<u32>>, u64)> {
    check_dimension(n)?;
    let full = ((1u64 << n) - 1) as u32;
    let shards: Vec<Result<Shard>> = (0..=full)
        .into_par_iter()
        .map(|first| {
            let mut search = EmbeddingSearch::new(pattern, n, kind, None, budget);
            let mut images = Vec::new();
            let mut count = 0u64;
            search.try_place(first, &mut |e: &[u32]| {
                let mut img = e.to_vec();
                img.sort_unstable();
                images.push(img);
                count += 1;
                Flow::Continue
            })?;
            Ok((images, count, search.nodes))
        })
        .collect();
    let mut all = BTreeSet::new();
    let mut embeddings = 0u64;
    let mut nodes = 0u64;
    let mut overflow = false;
    for shard in shards {
        match shard {
            Ok((images, count, used)) => {
                all.extend(images);
                embeddings += count;
                nodes += used;
            }
            Err(Error::BudgetExceeded { explored, .. }) => {
                overflow = true;
                nodes += explored;
            }
            Err(e) => return Err(e),
        }
    }
    if overflow || nodes > budget {
        return Err(Error::BudgetExceeded { budget, explored: nodes });
    }
    Ok((all.into_iter().collect(), embeddings))
}

/// Whether the family `vertices` is an induced copy of `pattern`, i.e. some
/// bijection `pattern → vertices` is a strong embedding.
pub fn is_induced_copy(pattern: &FinitePoset, vertices: &[u32]) -> bool {
    if vertices.len() != pattern.size() {
        return false;
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != vertices.len() {
        return false;
    }
    let Some(&max) = sorted.last() else {
        return false;
    };
    let n = (32 - max.leading_zeros()) as usize;
    if n > MAX_DIMENSION {
        return false;
    }
    let mut host = vec![false; 1 << n];
    for &v in &sorted {
        host[v as usize] = true;
    }
    matches!(find_embedding(pattern, n, EmbeddingKind::Strong, Some(&host), u64::MAX), Ok(Some(_)))
}

/// Outcome of [`min_strong_embedding_dimension`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddingDimension {
    /// The least `n` admitting a strong embedding.
    Exact { n: usize },
    /// No strong embedding into `B_n` for any `n <= n_max`.
    AboveMax { n_max: usize },
    /// The budget ran out while deciding dimension `lower`; no embedding
    /// exists below it.
    Unknown { lower: usize },
}

/// Least `n <= n_max` such that `P` strongly embeds into `B_n`.
///
/// The first element of the linear extension is minimal; up to permuting
/// the ground set its image may be taken to be `{1, …, k}` for some rank `k`.
pub fn min_strong_embedding_dimension(poset: &FinitePoset, n_max: usize, budget: u64) -> Result<EmbeddingDimension> {
    let n_max = n_max.min(MAX_DIMENSION);
    let height = poset.height();
    let mut used = 0u64;
    for n in 0..=n_max {
        if (1usize << n) < poset.size() || height > n + 1 {
            continue;
        }
        for rank in 0..=n {
            let mut search = EmbeddingSearch::new(poset, n, EmbeddingKind::Strong, None, budget.saturating_sub(used));
            let mut found = false;
            let res = search.try_place(((1u64 << rank) - 1) as u32, &mut |_: &[u32]| {
                found = true;
                Flow::Stop
            });
            used += search.nodes;
            match res {
                Ok(_) if found => return Ok(EmbeddingDimension::Exact { n }),
                Ok(_) => {}
                Err(Error::BudgetExceeded { .. }) => return Ok(EmbeddingDimension::Unknown { lower: n }),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(EmbeddingDimension::AboveMax { n_max })
}
