//! Colorings of the t-chains of `B_n` and their validity against copies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copies::{CopyTable, InducedCopy, Limits};
use crate::error::{param, Error, Result};
use crate::lattice::ChainList;
use crate::posets::EmbeddingKind;

/// A total coloring of the t-chains of `B_n` with colors `1..=k`,
/// indexed by canonical chain index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ColoringJson", into = "ColoringJson")]
pub struct ChainColoring {
    n: usize,
    t: usize,
    k: u32,
    colors: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ColoringJson {
    n: usize,
    t: usize,
    #[serde(rename = "K")]
    k: u32,
    chains: Vec<Vec<u32>>,
    colors: Vec<u32>,
}

impl From<ChainColoring> for ColoringJson {
    fn from(c: ChainColoring) -> Self {
        let chains = ChainList::full(c.n, c.t)
            .expect("coloring dimensions were validated")
            .iter()
            .map(<[u32]>::to_vec)
            .collect();
        ColoringJson { n: c.n, t: c.t, k: c.k, chains, colors: c.colors }
    }
}

impl TryFrom<ColoringJson> for ChainColoring {
    type Error = Error;

    fn try_from(raw: ColoringJson) -> Result<Self> {
        let list = ChainList::full(raw.n, raw.t)?;
        if raw.chains.len() != list.len() || raw.chains.iter().zip(list.iter()).any(|(a, b)| a.as_slice() != b) {
            return param("chains must list every t-chain of B_n in canonical order");
        }
        ChainColoring::new(raw.n, raw.t, raw.k, raw.colors)
    }
}

impl ChainColoring {
    pub fn new(n: usize, t: usize, k: u32, colors: Vec<u32>) -> Result<Self> {
        let expected = ChainList::full(n, t)?.len();
        if colors.len() != expected {
            return param(format!("expected {expected} colors for the {t}-chains of B_{n}, got {}", colors.len()));
        }
        if let Some(bad) = colors.iter().find(|&&c| c == 0 || c > k) {
            return param(format!("color {bad} outside 1..={k}"));
        }
        Ok(ChainColoring { n, t, k, colors })
    }

    pub fn monochromatic(n: usize, t: usize) -> Result<Self> {
        let len = ChainList::full(n, t)?.len();
        Ok(ChainColoring { n, t, k: 1, colors: vec![1; len] })
    }

    /// Every chain gets its own color.
    pub fn all_distinct(n: usize, t: usize) -> Result<Self> {
        let len = ChainList::full(n, t)?.len();
        Ok(ChainColoring { n, t, k: len as u32, colors: (1..=len as u32).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color(&self, chain_index: usize) -> u32 {
        self.colors[chain_index]
    }

    /// Number of colors actually used.
    pub fn used_colors(&self) -> usize {
        let mut seen = self.colors.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coloring serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The coloring induced on the canonical `B_{n1}`, the subsets of `[n1]`.
    pub fn restrict(&self, n1: usize) -> Result<ChainColoring> {
        if n1 > self.n {
            return param(format!("cannot restrict B_{} to the larger B_{n1}", self.n));
        }
        let big = ChainList::full(self.n, self.t)?;
        let small = ChainList::full(n1, self.t)?;
        let colors = small
            .iter()
            .map(|c| self.colors[big.index_of(c).expect("chains of B_n1 are chains of B_n")])
            .collect();
        Ok(ChainColoring { n: n1, t: self.t, k: self.k, colors })
    }
}

pub(crate) fn distinct_colors(colors: &[u32], chain_indices: &[u32]) -> usize {
    let mut seen: Vec<u32> = chain_indices.iter().map(|&c| colors[c as usize]).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Number of distinct colors on the t-chains of `copy`.
pub fn colors_on_copy(coloring: &ChainColoring, copy: &InducedCopy) -> Result<usize> {
    if copy.n != coloring.n {
        return param(format!("copy lives in B_{}, coloring in B_{}", copy.n, coloring.n));
    }
    let list = ChainList::full(coloring.n, coloring.t)?;
    let mut seen: Vec<u32> = copy
        .chains(coloring.t)
        .iter()
        .map(|c| coloring.colors[list.index_of(&c.bits()).expect("chains of a copy are chains of B_n")])
        .collect();
    seen.sort_unstable();
    seen.dedup();
    Ok(seen.len())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Validity {
    Valid,
    /// The first copy in canonical order seeing fewer than `q` colors.
    Violation { copy_index: usize, vertices: Vec<u32>, colors_seen: usize },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Checks that every copy in `table` sees at least `q` colors.
pub fn validate_against(coloring: &ChainColoring, table: &CopyTable, q: usize) -> Result<Validity> {
    if table.n() != coloring.n || table.t() != coloring.t {
        return param(format!(
            "coloring is on {}-chains of B_{}, copies on {}-chains of B_{}",
            coloring.t,
            coloring.n,
            table.t(),
            table.n()
        ));
    }
    let first = table
        .copy_chains
        .par_iter()
        .position_first(|cs| distinct_colors(&coloring.colors, cs) < q);
    Ok(match first {
        None => Validity::Valid,
        Some(i) => Validity::Violation {
            copy_index: i,
            vertices: table.copies.images[i].clone(),
            colors_seen: distinct_colors(&coloring.colors, &table.copy_chains[i]),
        },
    })
}

/// Checks the (p, q, t)-condition for every strong or weak copy of `B_p`.
pub fn validate_coloring(
    coloring: &ChainColoring,
    p: usize,
    q: usize,
    mode: EmbeddingKind,
    limits: &Limits,
) -> Result<Validity> {
    let t = coloring.t;
    if t == 0 || t > p {
        return param(format!("chain length t = {t} must satisfy 1 <= t <= p = {p}"));
    }
    let hp = crate::chains::h_formula(p, t)?;
    if q == 0 || num_bigint::BigUint::from(q) > hp {
        return param(format!("q = {q} must satisfy 1 <= q <= h_{p}({t}) = {hp}"));
    }
    if p > coloring.n {
        return Ok(Validity::Valid);
    }
    let table = CopyTable::for_boolean(p, coloring.n, t, mode, limits)?;
    validate_against(coloring, &table, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copies::enumerate_copies;

    fn strong(c: &ChainColoring, p: usize, q: usize) -> Validity {
        validate_coloring(c, p, q, EmbeddingKind::Strong, &Limits::default()).unwrap()
    }

    #[test]
    fn colors_on_copy_examples() {
        let copy = InducedCopy::new(2, 2, &[0, 1, 2, 3]).unwrap();
        assert_eq!(colors_on_copy(&ChainColoring::monochromatic(2, 2).unwrap(), &copy).unwrap(), 1);
        assert_eq!(colors_on_copy(&ChainColoring::all_distinct(2, 2).unwrap(), &copy).unwrap(), 5);
        let one = ChainColoring::new(2, 2, 2, vec![1, 1, 2, 1, 1]).unwrap();
        assert_eq!(colors_on_copy(&one, &copy).unwrap(), 2);
        let other = InducedCopy::new(3, 2, &[0, 1, 2, 3]).unwrap();
        assert!(colors_on_copy(&one, &other).is_err());
    }

    #[test]
    fn validity_examples() {
        let mono = ChainColoring::monochromatic(2, 2).unwrap();
        assert_eq!(
            strong(&mono, 2, 2),
            Validity::Violation { copy_index: 0, vertices: vec![0, 1, 2, 3], colors_seen: 1 }
        );
        let one = ChainColoring::new(2, 2, 2, vec![1, 2, 1, 1, 1]).unwrap();
        assert!(strong(&one, 2, 2).is_valid());
        for n in 1..=3 {
            assert!(strong(&ChainColoring::monochromatic(n, 1).unwrap(), 1, 1).is_valid());
        }
        assert!(validate_coloring(&mono, 2, 6, EmbeddingKind::Strong, &Limits::default()).is_err());
    }

    #[test]
    fn first_violation_is_canonical() {
        // Rank coloring of B_3 elements: comparable pairs of equal rank do not
        // exist, so only q = 2 on B_1 copies with t = 1 matters.
        let colors = (0..8u32).map(|x| 1 + x.count_ones()).collect();
        let c = ChainColoring::new(3, 1, 4, colors).unwrap();
        assert!(strong(&c, 1, 2).is_valid());
        let colors = (0..8u32).map(|x| 1 + (x.count_ones() >= 2) as u32).collect();
        let c = ChainColoring::new(3, 1, 2, colors).unwrap();
        let copies = enumerate_copies(1, 3, EmbeddingKind::Strong, &Limits::default()).unwrap();
        let expected = copies
            .images
            .iter()
            .position(|img| c.color(img[0] as usize) == c.color(img[1] as usize))
            .unwrap();
        match strong(&c, 1, 2) {
            Validity::Violation { copy_index, .. } => assert_eq!(copy_index, expected),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let c = ChainColoring::new(2, 2, 2, vec![1, 2, 1, 1, 1]).unwrap();
        let text = c.to_json();
        assert_eq!(text, r#"{"n":2,"t":2,"K":2,"chains":[[0,1],[0,2],[0,3],[1,3],[2,3]],"colors":[1,2,1,1,1]}"#);
        assert_eq!(ChainColoring::from_json(&text).unwrap(), c);
        let shuffled = r#"{"n":2,"t":2,"K":2,"chains":[[0,2],[0,1],[0,3],[1,3],[2,3]],"colors":[1,2,1,1,1]}"#;
        assert!(ChainColoring::from_json(shuffled).is_err());
        assert!(ChainColoring::new(2, 2, 1, vec![1, 2, 1, 1, 1]).is_err());
    }

    #[test]
    fn restriction_keeps_validity() {
        let colors: Vec<u32> = (0..19u32).map(|i| 1 + i % 3).collect();
        let c = ChainColoring::new(3, 2, 3, colors).unwrap();
        let r = c.restrict(2).unwrap();
        assert_eq!(r.colors().len(), 5);
        if strong(&c, 2, 2).is_valid() {
            assert!(strong(&r, 2, 2).is_valid());
        }
        assert!(c.restrict(4).is_err());
    }

    #[test]
    fn weak_violations_cover_strong_ones() {
        let mut state = 7u64;
        for _ in 0..40 {
            let colors: Vec<u32> = (0..19)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    1 + (state >> 60) as u32 % 3
                })
                .collect();
            let c = ChainColoring::new(3, 2, 3, colors).unwrap();
            for q in 1..=5 {
                let weak = validate_coloring(&c, 2, q, EmbeddingKind::Weak, &Limits::default()).unwrap();
                if weak.is_valid() {
                    assert!(strong(&c, 2, q).is_valid());
                }
                if strong(&c, 2, q).is_valid() {
                    for q2 in 1..q {
                        assert!(strong(&c, 2, q2).is_valid());
                    }
                }
            }
        }
    }
}
