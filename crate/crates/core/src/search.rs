//! Exhaustive searches: exact coloring numbers, strong Boolean Ramsey
//! numbers, extremal chain counts, and the block constructions.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::chains::h_formula;
use crate::coloring::{validate_against, ChainColoring};
use crate::copies::{enumerate_copies, enumerate_pattern_copies, CopySet, CopyTable, InducedCopy, Limits};
use crate::error::{param, Error, Result};
use crate::lattice::{check_dimension, middle_window, ChainList};
use crate::posets::{find_embedding, min_strong_embedding_dimension, EmbeddingDimension, EmbeddingKind, FinitePoset};

pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SearchValue {
    Exact(u64),
    Interval { lower: u64, upper: u64 },
    AtLeast { at_least: u64 },
}

impl SearchValue {
    pub fn exact(&self) -> Option<u64> {
        match *self {
            SearchValue::Exact(v) => Some(v),
            _ => None,
        }
    }

    pub fn lower(&self) -> u64 {
        match *self {
            SearchValue::Exact(v) => v,
            SearchValue::Interval { lower, .. } => lower,
            SearchValue::AtLeast { at_least } => at_least,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Witness {
    Coloring(ChainColoring),
    /// Elements of `B_n` as bitmasks.
    Family(Vec<u32>),
    /// Chains as bitmask tuples.
    ChainSet(Vec<Vec<u32>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub value: SearchValue,
    pub witness: Option<Witness>,
    pub nodes_explored: u64,
    pub budget_exhausted: bool,
}

impl SearchOutcome {
    pub fn coloring(&self) -> Option<&ChainColoring> {
        match &self.witness {
            Some(Witness::Coloring(c)) => Some(c),
            _ => None,
        }
    }
}

enum Feasibility {
    Found(Vec<u32>),
    Infeasible,
    Exhausted,
}

struct OutOfBudget;

/// Branch and bound for a K-coloring of the chains in which every copy
/// sees at least `q` colors.
struct ColorSearch<'a> {
    table: &'a CopyTable,
    q: u32,
    k: u32,
    colors: Vec<u32>,
    /// Per copy, the multiplicity of each color among its colored chains.
    counts: Vec<u16>,
    distinct: Vec<u32>,
    uncolored: Vec<u32>,
    nodes: u64,
    budget: u64,
}

impl<'a> ColorSearch<'a> {
    fn new(table: &'a CopyTable, q: usize, k: u32, budget: u64) -> Self {
        let copies = table.copy_count();
        ColorSearch {
            table,
            q: q as u32,
            k,
            colors: vec![0; table.chains.len()],
            counts: vec![0; copies * (k as usize + 1)],
            distinct: vec![0; copies],
            uncolored: table.copy_chains.iter().map(|c| c.len() as u32).collect(),
            nodes: 0,
            budget,
        }
    }

    fn can_reach(&self, s: usize) -> bool {
        let d = self.distinct[s];
        d + self.uncolored[s].min(self.k - d) >= self.q
    }

    fn assign(&mut self, chain: usize, color: u32) -> bool {
        self.colors[chain] = color;
        let width = self.k as usize + 1;
        let mut ok = true;
        for &s in &self.table.incidence[chain] {
            let s = s as usize;
            let slot = &mut self.counts[s * width + color as usize];
            *slot += 1;
            if *slot == 1 {
                self.distinct[s] += 1;
            }
            self.uncolored[s] -= 1;
            ok &= self.can_reach(s);
        }
        ok
    }

    fn unassign(&mut self, chain: usize) {
        let color = self.colors[chain];
        let width = self.k as usize + 1;
        for &s in &self.table.incidence[chain] {
            let s = s as usize;
            let slot = &mut self.counts[s * width + color as usize];
            *slot -= 1;
            if *slot == 0 {
                self.distinct[s] -= 1;
            }
            self.uncolored[s] += 1;
        }
        self.colors[chain] = 0;
    }

    /// First uncolored chain of the copy with the least slack, ties broken
    /// by fewer uncolored chains and then by copy index. `None` once every
    /// copy is fully colored.
    fn next_chain(&self) -> Option<usize> {
        let mut best: Option<(u32, u32, usize)> = None;
        for s in 0..self.distinct.len() {
            let u = self.uncolored[s];
            if u == 0 {
                continue;
            }
            let d = self.distinct[s];
            let key = (d + u.min(self.k - d) - self.q, u, s);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let (_, _, s) = best?;
        self.table.copy_chains[s].iter().map(|&c| c as usize).find(|&c| self.colors[c] == 0)
    }

    fn descend(&mut self, max_used: u32) -> std::result::Result<bool, OutOfBudget> {
        let Some(chain) = self.next_chain() else {
            for c in self.colors.iter_mut().filter(|c| **c == 0) {
                *c = 1;
            }
            return Ok(true);
        };
        let top = (max_used + 1).min(self.k);
        for color in 1..=top {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(OutOfBudget);
            }
            let ok = self.assign(chain, color);
            if ok && self.descend(max_used.max(color))? {
                return Ok(true);
            }
            self.unassign(chain);
        }
        Ok(false)
    }

    fn run(mut self) -> (Feasibility, u64) {
        if (0..self.table.copy_count()).any(|s| !self.can_reach(s)) {
            return (Feasibility::Infeasible, 0);
        }
        let result = match self.descend(0) {
            Ok(true) => Feasibility::Found(std::mem::take(&mut self.colors)),
            Ok(false) => Feasibility::Infeasible,
            Err(OutOfBudget) => Feasibility::Exhausted,
        };
        (result, self.nodes.min(self.budget))
    }
}

fn solve(table: &CopyTable, q: usize, k: u32, budget: u64) -> (Feasibility, u64) {
    ColorSearch::new(table, q, k, budget).run()
}

fn validated_coloring(table: &CopyTable, q: usize, k: u32, colors: Vec<u32>) -> Result<ChainColoring> {
    let coloring = ChainColoring::new(table.n(), table.t(), k, colors)?;
    if !validate_against(&coloring, table, q)?.is_valid() {
        unreachable!("search returned a coloring that fails validation");
    }
    Ok(coloring)
}

fn check_coloring_params(n: usize, p: usize, q: usize, t: usize) -> Result<()> {
    if t == 0 || t > p {
        return param(format!("chain length t = {t} must satisfy 1 <= t <= p = {p}"));
    }
    if p > n {
        return param(format!("p = {p} exceeds n = {n}"));
    }
    let h = h_formula(p, t)?;
    if q == 0 || BigUint::from(q) > h {
        return param(format!("q = {q} must satisfy 1 <= q <= h_{p}({t}) = {h}"));
    }
    Ok(())
}

/// Least number of colors over the copies in `table`, by iterative
/// deepening on `K` starting from 1.
pub fn exact_f_on(table: &CopyTable, q: usize, budget: u64) -> Result<SearchOutcome> {
    let total = table.chains.len() as u64;
    let mut used = 0u64;
    for k in 1..=total.max(1) as u32 {
        let (result, nodes) = solve(table, q, k, budget - used);
        used += nodes;
        match result {
            Feasibility::Found(colors) => {
                return Ok(SearchOutcome {
                    value: SearchValue::Exact(k as u64),
                    witness: Some(Witness::Coloring(validated_coloring(table, q, k, colors)?)),
                    nodes_explored: used,
                    budget_exhausted: false,
                });
            }
            Feasibility::Infeasible => {}
            Feasibility::Exhausted => {
                let witness = ChainColoring::all_distinct(table.n(), table.t())?;
                return Ok(SearchOutcome {
                    value: SearchValue::Interval { lower: k as u64, upper: total },
                    witness: Some(Witness::Coloring(witness)),
                    nodes_explored: used,
                    budget_exhausted: true,
                });
            }
        }
    }
    Err(Error::Parameter(format!("no coloring reaches {q} colors on every copy")))
}

/// `f_t(n, p, q)` (weak) or its strong variant, by exhaustive search.
pub fn exact_f(n: usize, p: usize, q: usize, t: usize, mode: EmbeddingKind, budget: u64) -> Result<SearchOutcome> {
    check_coloring_params(n, p, q, t)?;
    let table = CopyTable::for_boolean(p, n, t, mode, &Limits::default())?;
    exact_f_on(&table, q, budget)
}

/// Whether a `k`-coloring of the t-chains of `B_n` exists with at least `q`
/// colors on every copy.
pub fn find_coloring(table: &CopyTable, q: usize, k: u32, budget: u64) -> Result<SearchOutcome> {
    let (result, nodes) = solve(table, q, k, budget);
    Ok(match result {
        Feasibility::Found(colors) => SearchOutcome {
            value: SearchValue::Exact(1),
            witness: Some(Witness::Coloring(validated_coloring(table, q, k, colors)?)),
            nodes_explored: nodes,
            budget_exhausted: false,
        },
        Feasibility::Infeasible => SearchOutcome {
            value: SearchValue::Exact(0),
            witness: None,
            nodes_explored: nodes,
            budget_exhausted: false,
        },
        Feasibility::Exhausted => SearchOutcome {
            value: SearchValue::Interval { lower: 0, upper: 1 },
            witness: None,
            nodes_explored: nodes,
            budget_exhausted: true,
        },
    })
}

/// The poset whose monochromatic induced copies are sought.
#[derive(Clone, Debug)]
pub enum RamseyTarget {
    Boolean(usize),
    Poset(FinitePoset),
}

impl RamseyTarget {
    fn copies(&self, n: usize, limits: &Limits) -> Result<CopySet> {
        match self {
            RamseyTarget::Boolean(p) => enumerate_copies(*p, n, EmbeddingKind::Strong, limits),
            RamseyTarget::Poset(q) => enumerate_pattern_copies(q, n, EmbeddingKind::Strong, limits),
        }
    }

    fn height(&self) -> usize {
        match self {
            RamseyTarget::Boolean(p) => p + 1,
            RamseyTarget::Poset(q) => q.height(),
        }
    }
}

/// Least `n` such that every `k`-coloring of the t-chains of `B_n` has an
/// induced copy of the target whose chains are monochromatic.
pub fn ramsey_number(k: u32, t: usize, target: &RamseyTarget, n_max: usize, budget: u64) -> Result<SearchOutcome> {
    if k == 0 {
        return param("at least one color is required");
    }
    if t == 0 || t > target.height() {
        return param(format!("the target has no {t}-chains"));
    }
    let n_max = n_max.min(crate::lattice::MAX_DIMENSION);
    let start = match target {
        RamseyTarget::Boolean(p) => *p,
        RamseyTarget::Poset(q) => match min_strong_embedding_dimension(q, n_max, budget)? {
            EmbeddingDimension::Exact { n } => n,
            EmbeddingDimension::AboveMax { n_max } => {
                return Ok(SearchOutcome {
                    value: SearchValue::AtLeast { at_least: n_max as u64 + 1 },
                    witness: None,
                    nodes_explored: 0,
                    budget_exhausted: false,
                })
            }
            EmbeddingDimension::Unknown { lower } => {
                return Ok(SearchOutcome {
                    value: SearchValue::AtLeast { at_least: lower as u64 },
                    witness: None,
                    nodes_explored: budget,
                    budget_exhausted: true,
                })
            }
        },
    };
    let mut used = 0u64;
    let mut last_valid = None;
    for n in start..=n_max {
        let table = CopyTable::new(target.copies(n, &Limits::default())?, t)?;
        let (result, nodes) = solve(&table, 2, k, budget - used);
        used += nodes;
        match result {
            Feasibility::Found(colors) => last_valid = Some(validated_coloring(&table, 2, k, colors)?),
            Feasibility::Infeasible => {
                return Ok(SearchOutcome {
                    value: SearchValue::Exact(n as u64),
                    witness: last_valid.map(Witness::Coloring),
                    nodes_explored: used,
                    budget_exhausted: false,
                })
            }
            Feasibility::Exhausted => {
                return Ok(SearchOutcome {
                    value: SearchValue::AtLeast { at_least: n as u64 },
                    witness: last_valid.map(Witness::Coloring),
                    nodes_explored: used,
                    budget_exhausted: true,
                })
            }
        }
    }
    Ok(SearchOutcome {
        value: SearchValue::AtLeast { at_least: n_max as u64 + 1 },
        witness: last_valid.map(Witness::Coloring),
        nodes_explored: used,
        budget_exhausted: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum ExtremalObject {
    /// Families of elements with no copy of `B_m`; value counts their t-chains.
    Family,
    /// Sets of t-chains containing no copy's full chain set.
    Chainset,
}

impl std::str::FromStr for ExtremalObject {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "family" => Ok(ExtremalObject::Family),
            "chainset" => Ok(ExtremalObject::Chainset),
            other => param(format!("unknown object {other:?}, expected family or chainset")),
        }
    }
}

/// Include/exclude search for a largest item set that contains no
/// forbidden set, scoring the targets whose items are all included.
struct PackingSearch {
    forbidden_len: Vec<u32>,
    forbidden_of_item: Vec<Vec<u32>>,
    targets_of_item: Vec<Vec<u32>>,
    included_count: Vec<u32>,
    excluded_count: Vec<u32>,
    alive: usize,
    chosen: Vec<bool>,
    best: usize,
    best_set: Vec<bool>,
    nodes: u64,
    budget: u64,
}

impl PackingSearch {
    fn new(items: usize, forbidden: &[Vec<u32>], targets: &[Vec<u32>], budget: u64) -> Self {
        let mut forbidden_of_item = vec![Vec::new(); items];
        for (f, set) in forbidden.iter().enumerate() {
            for &i in set {
                forbidden_of_item[i as usize].push(f as u32);
            }
        }
        let mut targets_of_item = vec![Vec::new(); items];
        for (g, set) in targets.iter().enumerate() {
            for &i in set {
                targets_of_item[i as usize].push(g as u32);
            }
        }
        PackingSearch {
            forbidden_len: forbidden.iter().map(|f| f.len() as u32).collect(),
            forbidden_of_item,
            targets_of_item,
            included_count: vec![0; forbidden.len()],
            excluded_count: vec![0; targets.len()],
            alive: targets.len(),
            chosen: vec![false; items],
            best: 0,
            best_set: vec![false; items],
            nodes: 0,
            budget,
        }
    }

    fn tick(&mut self) -> std::result::Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.nodes > self.budget {
            Err(OutOfBudget)
        } else {
            Ok(())
        }
    }

    fn descend(&mut self, item: usize) -> std::result::Result<(), OutOfBudget> {
        if self.alive <= self.best {
            return Ok(());
        }
        if item == self.chosen.len() {
            self.best = self.alive;
            self.best_set.clone_from(&self.chosen);
            return Ok(());
        }
        self.tick()?;
        let mut ok = true;
        for &f in &self.forbidden_of_item[item] {
            self.included_count[f as usize] += 1;
            ok &= self.included_count[f as usize] < self.forbidden_len[f as usize];
        }
        self.chosen[item] = true;
        let result = if ok { self.descend(item + 1) } else { Ok(()) };
        self.chosen[item] = false;
        for &f in &self.forbidden_of_item[item] {
            self.included_count[f as usize] -= 1;
        }
        result?;

        self.tick()?;
        for &g in &self.targets_of_item[item] {
            self.excluded_count[g as usize] += 1;
            if self.excluded_count[g as usize] == 1 {
                self.alive -= 1;
            }
        }
        let result = self.descend(item + 1);
        for &g in &self.targets_of_item[item] {
            self.excluded_count[g as usize] -= 1;
            if self.excluded_count[g as usize] == 0 {
                self.alive += 1;
            }
        }
        result
    }
}

/// `La_t` / `L_t` (weak) or their strong variants for the forbidden `B_m`.
pub fn extremal_max_chains(
    n: usize,
    m: usize,
    t: usize,
    object: ExtremalObject,
    mode: EmbeddingKind,
    budget: u64,
) -> Result<SearchOutcome> {
    check_dimension(n)?;
    if m > n {
        return param(format!("B_{m} does not fit in B_{n}"));
    }
    if t == 0 || t > n + 1 {
        return param(format!("chain length t = {t} must satisfy 1 <= t <= n + 1 = {}", n + 1));
    }
    let cap = match object {
        ExtremalObject::Family => 6,
        ExtremalObject::Chainset => 4,
    };
    if n > cap {
        return Err(Error::Unsupported(format!("{object:?} search is limited to n <= {cap}")));
    }
    let chains = ChainList::full(n, t)?;
    let copies = enumerate_copies(m, n, mode, &Limits::default())?;
    let (items, forbidden, targets): (usize, Vec<Vec<u32>>, Vec<Vec<u32>>) = match object {
        ExtremalObject::Family => (1 << n, copies.images.clone(), chains.iter().map(<[u32]>::to_vec).collect()),
        ExtremalObject::Chainset => {
            let table = CopyTable::new(copies, t)?;
            (chains.len(), table.copy_chains, (0..chains.len() as u32).map(|c| vec![c]).collect())
        }
    };
    if forbidden.iter().any(Vec::is_empty) {
        return param(format!("copies of B_{m} have no {t}-chains, so every chain set contains one"));
    }
    let mut search = PackingSearch::new(items, &forbidden, &targets, budget);
    let exhausted = search.descend(0).is_err();
    let chosen: Vec<u32> = (0..items as u32).filter(|&i| search.best_set[i as usize]).collect();
    let witness = match object {
        ExtremalObject::Family => Witness::Family(chosen),
        ExtremalObject::Chainset => Witness::ChainSet(chosen.iter().map(|&c| chains.get(c as usize).to_vec()).collect()),
    };
    let best = search.best as u64;
    Ok(SearchOutcome {
        value: if exhausted {
            SearchValue::Interval { lower: best, upper: targets.len() as u64 }
        } else {
            SearchValue::Exact(best)
        },
        witness: Some(witness),
        nodes_explored: search.nodes.min(budget),
        budget_exhausted: exhausted,
    })
}

/// Whether a family avoids every (strong or weak) copy of `B_m`.
pub fn family_is_free(n: usize, m: usize, mode: EmbeddingKind, family: &[u32]) -> Result<bool> {
    check_dimension(n)?;
    let mut host = vec![false; 1 << n];
    for &x in family {
        *host.get_mut(x as usize).ok_or_else(|| Error::Parameter(format!("{x} is not an element of B_{n}")))? = true;
    }
    let pattern = FinitePoset::boolean_lattice(m)?;
    Ok(find_embedding(&pattern, n, mode, Some(&host), u64::MAX)?.is_none())
}

/// Whether no copy of `B_m` has all of its t-chains inside `chain_set`.
pub fn chain_set_is_free(n: usize, m: usize, t: usize, mode: EmbeddingKind, chain_set: &[Vec<u32>]) -> Result<bool> {
    let table = CopyTable::new(enumerate_copies(m, n, mode, &Limits::default())?, t)?;
    let mut member = vec![false; table.chains.len()];
    for c in chain_set {
        let idx = table
            .chains
            .index_of(c)
            .ok_or_else(|| Error::Parameter(format!("{c:?} is not a {t}-chain of B_{n}")))?;
        member[idx] = true;
    }
    Ok(!table.copy_chains.iter().any(|cs| cs.iter().all(|&c| member[c as usize])))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constructions {
    pub n: usize,
    pub m: usize,
    /// Lowest and highest rank of the middle family.
    pub window: (usize, usize),
    pub middle: Vec<u32>,
    pub blocks: Vec<InducedCopy>,
}

/// The middle `m` ranks of `B_n` and the disjoint block copies of `B_m`.
///
/// Block `k` uses coordinates `k(m+1)+1 ..= (k+1)(m+1)`; its distinguished
/// coordinate is the least one.
pub fn build_constructions(n: usize, m: usize) -> Result<Constructions> {
    check_dimension(n)?;
    if m == 0 {
        return param("m must be at least 1");
    }
    let window = middle_window(n, m)?;
    let middle = (0..1u32 << n)
        .filter(|x| (window.0..=window.1).contains(&(x.count_ones() as usize)))
        .collect();
    let mut blocks = Vec::new();
    for k in 0..n / (m + 1) {
        let base = k * (m + 1);
        let d = 1u32 << base;
        let rest: Vec<u32> = (1..=m).map(|i| 1u32 << (base + i)).collect();
        let vertices: Vec<u32> = (0..1u32 << m)
            .map(|a| d | (0..m).filter(|&i| a >> i & 1 == 1).fold(0, |acc, i| acc | rest[i]))
            .collect();
        blocks.push(InducedCopy::new(n, m, &vertices)?);
    }
    Ok(Constructions { n, m, window, middle, blocks })
}
