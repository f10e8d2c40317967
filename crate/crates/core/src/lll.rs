//! Local-lemma color thresholds and Moser–Tardos resampling.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chains::h_formula;
use crate::coloring::{distinct_colors, validate_against, ChainColoring};
use crate::copies::{aw_sandwich, CopyTable, Limits};
use crate::error::{param, Error, Result};
use crate::numeric::{binomial, ln_big, surjections};
use crate::posets::EmbeddingKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// `e²(q-1)^h (d+1) <= K^{h-q+1}`.
    PaperBound,
    /// `e(d+1) Pr[A_S] <= 1` with the exact bad-event probability.
    ExactProb,
}

impl std::str::FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-bound" => Ok(ThresholdMode::PaperBound),
            "exact-prob" => Ok(ThresholdMode::ExactProb),
            other => param(format!("unknown threshold mode {other:?} (expected paper-bound or exact-prob)")),
        }
    }
}

/// Where a dependency degree came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeSource {
    /// Maximum over enumerated copies.
    Enumeration,
    /// `h_p(t)` times an upper bound on the number of copies.
    Bound,
    /// No bad events can occur.
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedK {
    pub k: u64,
    #[serde(with = "crate::numeric::decimal")]
    pub d: BigUint,
    pub d_source: DegreeSource,
    pub mode: ThresholdMode,
    pub h: u64,
}

/// Dependency degree of the bad-event graph, exact when the copies can be
/// enumerated within budget.
pub fn dependency_degree(p: usize, t: usize, n: usize, limits: &Limits) -> Result<(BigUint, DegreeSource)> {
    match CopyTable::for_boolean(p, n, t, EmbeddingKind::Strong, limits) {
        Ok(table) => Ok((BigUint::from(table.dependency_degree()), DegreeSource::Enumeration)),
        Err(Error::BudgetExceeded { .. }) => {
            let h = h_formula(p, t)?;
            let (_, upper) = aw_sandwich(p, n)?;
            Ok((h * upper, DegreeSource::Bound))
        }
        Err(e) => Err(e),
    }
}

fn check_params(p: usize, q: usize, t: usize, n: usize) -> Result<u64> {
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
    u64::try_from(h).map_err(|_| Error::Unsupported("h_p(t) beyond 64 bits".into()))
}

fn closed_form_condition(k: u64, h: u64, q: u64, ln_d1: f64) -> bool {
    let lhs = 2.0 + h as f64 * ((q - 1) as f64).ln() + ln_d1;
    lhs <= (h - q + 1) as f64 * (k as f64).ln()
}

fn exact_condition(k: u64, h: u64, q: u64, ln_d1: f64) -> bool {
    let bad: BigUint = (1..q.min(k + 1)).map(|s| binomial(k, s) * surjections(h, s)).sum();
    1.0 + ln_d1 + ln_big(&bad) <= h as f64 * (k as f64).ln()
}

/// Least `k >= 1` satisfying a condition that is monotone in `k`.
fn least_satisfying(ok: impl Fn(u64) -> bool) -> u64 {
    let mut hi = 1u64;
    while !ok(hi) {
        hi = hi.checked_mul(2).expect("threshold exceeds 64 bits");
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Smallest `K` for which the local-lemma condition holds, given `d`.
pub fn certified_k_with_degree(h: u64, q: u64, d: &BigUint, mode: ThresholdMode) -> u64 {
    if q <= 1 {
        return 1;
    }
    let ln_d1 = ln_big(&(d + 1u32));
    match mode {
        ThresholdMode::PaperBound => least_satisfying(|k| closed_form_condition(k, h, q, ln_d1)),
        ThresholdMode::ExactProb => least_satisfying(|k| k >= 1 && exact_condition(k, h, q, ln_d1)),
    }
}

pub fn certified_k(p: usize, q: usize, t: usize, n: usize, mode: ThresholdMode, limits: &Limits) -> Result<CertifiedK> {
    let h = check_params(p, q, t, n)?;
    if q == 1 {
        return Ok(CertifiedK { k: 1, d: BigUint::from(0u32), d_source: DegreeSource::Trivial, mode, h });
    }
    let (d, d_source) = dependency_degree(p, t, n, limits)?;
    let k = certified_k_with_degree(h, q as u64, &d, mode);
    Ok(CertifiedK { k, d, d_source, mode, h })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleStats {
    pub seed: u64,
    #[serde(rename = "K")]
    pub k: u32,
    pub resamples: u64,
    pub iterations: u64,
    pub succeeded: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_coloring: Option<ChainColoring>,
}

impl ResampleStats {
    /// `{seed, K, resamples, iterations, succeeded}` without the coloring.
    pub fn summary_json(&self) -> String {
        serde_json::json!({
            "seed": self.seed,
            "K": self.k,
            "resamples": self.resamples,
            "iterations": self.iterations,
            "succeeded": self.succeeded,
        })
        .to_string()
    }
}

/// Moser–Tardos on a prepared copy table: always resamples the violating
/// copy of least index.
pub fn moser_tardos_on(table: &CopyTable, q: usize, k: u32, seed: u64, max_resamples: u64) -> Result<ResampleStats> {
    if k == 0 {
        return param("at least one color is required");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colors: Vec<u32> = (0..table.chains.len()).map(|_| rng.random_range(1..=k)).collect();
    let deficient = |colors: &[u32], s: usize| distinct_colors(colors, &table.copy_chains[s]) < q;
    let mut violating: BTreeSet<usize> = (0..table.copy_count()).filter(|&s| deficient(&colors, s)).collect();
    let mut resamples = 0u64;
    let mut iterations = 0u64;
    loop {
        iterations += 1;
        let Some(&s) = violating.iter().next() else {
            let coloring = ChainColoring::new(table.n(), table.t(), k, colors)?;
            if !validate_against(&coloring, table, q)?.is_valid() {
                unreachable!("no copy is deficient, so the coloring is valid");
            }
            return Ok(ResampleStats { seed, k, resamples, iterations, succeeded: true, final_coloring: Some(coloring) });
        };
        if resamples >= max_resamples {
            return Ok(ResampleStats { seed, k, resamples, iterations, succeeded: false, final_coloring: None });
        }
        resamples += 1;
        for &c in &table.copy_chains[s] {
            colors[c as usize] = rng.random_range(1..=k);
        }
        for &c in &table.copy_chains[s] {
            for &other in &table.incidence[c as usize] {
                let other = other as usize;
                if deficient(&colors, other) {
                    violating.insert(other);
                } else {
                    violating.remove(&other);
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn moser_tardos(
    p: usize,
    q: usize,
    t: usize,
    n: usize,
    k: u32,
    seed: u64,
    max_resamples: u64,
    limits: &Limits,
) -> Result<ResampleStats> {
    check_params(p, q, t, n)?;
    let table = CopyTable::for_boolean(p, n, t, EmbeddingKind::Strong, limits)?;
    moser_tardos_on(&table, q, k, seed, max_resamples)
}
