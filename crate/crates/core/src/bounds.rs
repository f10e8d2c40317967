//! Closed-form bound calculators.
//!
//! Every report says whether a `(1 + o(1))` factor was replaced by 1
//! (`Asymptotic`), whether it rests on proven inequalities fed with exact
//! counts (`Certified`), or is a plain evaluation of an exact expression.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::chains::{h_formula, h_window};
use crate::copies::{chain_copy_counts, Limits};
use crate::error::{param, Error, Result};
use crate::lll::{certified_k, DegreeSource, ThresholdMode};
use crate::numeric::{binomial, ceil_div};
use crate::posets::{t_chain_count_poset, FinitePoset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    Asymptotic,
    Certified,
    Exact,
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMode::Asymptotic => "asymptotic",
            BoundMode::Certified => "certified",
            BoundMode::Exact => "exact",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Formula,
    Enumeration,
    Bound,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Formula => "formula",
            Source::Enumeration => "enumeration",
            Source::Bound => "bound",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundInput {
    pub name: String,
    pub value: String,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    Integer(BigUint),
    Real(f64),
    /// No crossover up to the scanned limit.
    Beyond(u64),
}

impl BoundValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            BoundValue::Integer(v) => v.to_f64().unwrap_or(f64::INFINITY),
            BoundValue::Real(v) => *v,
            BoundValue::Beyond(k) => *k as f64,
        }
    }

    pub fn as_integer(&self) -> Option<&BigUint> {
        match self {
            BoundValue::Integer(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Integer(v) => write!(f, "{v}"),
            BoundValue::Real(v) => write!(f, "{v:.4}"),
            BoundValue::Beyond(k) => write!(f, "> {k}"),
        }
    }
}

impl Serialize for BoundValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BoundValue::Integer(v) => match v.to_u64() {
                Some(small) => s.serialize_u64(small),
                None => s.collect_str(v),
            },
            BoundValue::Real(v) => s.serialize_f64(*v),
            BoundValue::Beyond(k) => s.collect_str(&format_args!("> {k}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub params: BTreeMap<String, i64>,
    pub value: BoundValue,
    /// `log2` of the value when it may not fit a double.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log2_value: Option<f64>,
    pub mode: BoundMode,
    /// Set when a `(1 + o(1))` factor was replaced by 1.
    pub o1_zeroed: bool,
    pub precision: &'static str,
    pub inputs: Vec<BoundInput>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

const DOUBLE: &str = "double precision, shown to 4 decimals";
const EXACT: &str = "exact integer";

impl BoundReport {
    fn new(name: &str, params: &[(&str, i64)], value: BoundValue, mode: BoundMode) -> Self {
        let precision = match value {
            BoundValue::Integer(_) => EXACT,
            _ => DOUBLE,
        };
        BoundReport {
            name: name.to_string(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            value,
            log2_value: None,
            mode,
            o1_zeroed: mode == BoundMode::Asymptotic,
            precision,
            inputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn input(mut self, name: &str, value: impl ToString, source: Source) -> Self {
        self.inputs.push(BoundInput { name: name.to_string(), value: value.to_string(), source });
        self
    }

    fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    /// `p=2;t=2;k=3` style parameter string.
    pub fn params_string(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }

    /// `h=5:formula;d=14:enumeration` style provenance string.
    pub fn provenance_string(&self) -> String {
        self.inputs.iter().map(|i| format!("{}={}:{}", i.name, i.value, i.source)).collect::<Vec<_>>().join(";")
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) = {} [{}]", self.name, self.params_string(), self.value, self.mode)
    }
}

/// `C(p, ⌊p/2⌋)`, the width of `B_p`.
pub fn middle_binomial(p: usize) -> BigUint {
    binomial(p as u64, (p / 2) as u64)
}

fn small(x: &BigUint, what: &str) -> Result<f64> {
    x.to_f64().filter(|v| v.is_finite()).ok_or_else(|| Error::Unsupported(format!("{what} is too large")))
}

fn h_checked(p: usize, q: usize, t: usize) -> Result<(BigUint, f64)> {
    if t == 0 || t > p {
        return param(format!("chain length t = {t} must satisfy 1 <= t <= p = {p}"));
    }
    let h = h_formula(p, t)?;
    if q < 2 || BigUint::from(q) > h {
        return param(format!("q = {q} must satisfy 2 <= q <= h_{p}({t}) = {h}"));
    }
    let hf = small(&h, "h_p(t)")?;
    Ok((h, hf))
}

fn ln_lll_constant(hf: f64, q: usize) -> f64 {
    let ln_m = std::f64::consts::LN_2 + hf.ln() + 2.0 + hf * ((q - 1) as f64).ln();
    ln_m / (hf - q as f64 + 1.0)
}

/// `c = M^{1/(h-q+1)}` with `M = 2 h e² (q-1)^h`, `h = h_p(t)`.
pub fn lll_constant(p: usize, q: usize, t: usize) -> Result<f64> {
    let (_, hf) = h_checked(p, q, t)?;
    Ok(ln_lll_constant(hf, q).exp())
}

pub fn lll_constant_report(p: usize, q: usize, t: usize) -> Result<BoundReport> {
    let (h, hf) = h_checked(p, q, t)?;
    let ln_c = ln_lll_constant(hf, q);
    let mut r = BoundReport::new(
        "lll_constant",
        &[("p", p as i64), ("q", q as i64), ("t", t as i64)],
        BoundValue::Real(ln_c.exp()),
        BoundMode::Exact,
    )
    .input("h", &h, Source::Formula);
    r.log2_value = Some(ln_c / std::f64::consts::LN_2);
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpperMode {
    Asymptotic,
    Certified,
}

impl std::str::FromStr for UpperMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "asymptotic" => Ok(UpperMode::Asymptotic),
            "certified" => Ok(UpperMode::Certified),
            other => param(format!("unknown mode {other:?}, expected asymptotic or certified")),
        }
    }
}

/// Upper bound on the strong coloring number.
pub fn f_upper(p: usize, q: usize, t: usize, n: usize, mode: UpperMode, limits: &Limits) -> Result<BoundReport> {
    let params = [("p", p as i64), ("q", q as i64), ("t", t as i64), ("n", n as i64)];
    if p > n {
        return param(format!("p = {p} exceeds n = {n}"));
    }
    if q == 1 {
        if t == 0 || t > p {
            return param(format!("chain length t = {t} must satisfy 1 <= t <= p = {p}"));
        }
        return Ok(BoundReport::new("f_upper", &params, BoundValue::Integer(BigUint::from(1u32)), BoundMode::Exact)
            .note("one color suffices when q = 1"));
    }
    let (h, hf) = h_checked(p, q, t)?;
    match mode {
        UpperMode::Asymptotic => {
            let cp = middle_binomial(p);
            let cpf = small(&cp, "C(p, p/2)")?;
            let log2 = ln_lll_constant(hf, q) / std::f64::consts::LN_2 + (n - p) as f64 * cpf / (hf - q as f64 + 1.0);
            let mut r = BoundReport::new("f_upper", &params, BoundValue::Real(log2.exp2()), BoundMode::Asymptotic)
                .input("h", &h, Source::Formula)
                .input("C_p", &cp, Source::Formula);
            r.log2_value = Some(log2);
            Ok(r)
        }
        UpperMode::Certified => {
            let ck = certified_k(p, q, t, n, ThresholdMode::PaperBound, limits)?;
            let source = match ck.d_source {
                DegreeSource::Bound => Source::Bound,
                _ => Source::Enumeration,
            };
            Ok(BoundReport::new("f_upper", &params, BoundValue::Integer(BigUint::from(ck.k)), BoundMode::Certified)
                .input("h", &h, Source::Formula)
                .input("d", &ck.d, source))
        }
    }
}

/// Lower bound `max(term1, term2)` on the strong coloring number for
/// `n >= 2p + 1`. The copy count in term 2 is the number of images.
pub fn f_lower_th123(n: usize, p: usize, t: usize, q: usize, limits: &Limits) -> Result<BoundReport> {
    if p == 0 {
        return param("p must be at least 1");
    }
    if n < 2 * p + 1 {
        return param(format!("n = {n} must be at least 2p + 1 = {}", 2 * p + 1));
    }
    let (hp, _) = h_checked(p, q, t)?;
    let hn = h_formula(n, t)?;
    let blocks = BigUint::from(n / (p + 1));
    let term1 = ceil_div(&hn, &(&hn - &blocks));
    let params = [("n", n as i64), ("p", p as i64), ("t", t as i64), ("q", q as i64)];
    let base = |value: BigUint| {
        BoundReport::new("f_lower_th123", &params, BoundValue::Integer(value), BoundMode::Certified)
            .input("h_n", &hn, Source::Formula)
            .input("h_p", &hp, Source::Formula)
    };
    match chain_copy_counts(p, n, t, limits) {
        Ok(census) => {
            let c_min = BigUint::from(census.c_min.unwrap_or(0));
            let term2 = ceil_div(&(&hn * &c_min), &(&census.image_count * &hp));
            Ok(base(term1.clone().max(term2.clone()))
                .input("g_images", &census.image_count, Source::Enumeration)
                .input("g_embeddings", &census.embedding_count, Source::Enumeration)
                .input("C_min", &c_min, Source::Enumeration)
                .input("term1", &term1, Source::Formula)
                .input("term2", &term2, Source::Enumeration)
                .note("g is read as the number of copy images"))
        }
        Err(Error::BudgetExceeded { .. }) => Ok(base(term1.clone())
            .input("term1", &term1, Source::Formula)
            .note("copy enumeration exceeded its budget; term 2 omitted")),
        Err(e) => Err(e),
    }
}

/// `(h_window, h_n - s C(m, t-1), h_n - s)` with `s = ⌊n/(m+1)⌋`: a lower
/// and an upper bound for the family quantity, an upper bound for the
/// chain-set quantity.
pub fn la_l_bounds(n: usize, m: usize, t: usize) -> Result<[BoundReport; 3]> {
    if m < 2 {
        return param("m must be at least 2");
    }
    if t == 0 || t > m {
        return param(format!("chain length t = {t} must satisfy 1 <= t <= m = {m}"));
    }
    if n < m + 1 {
        return param(format!("n = {n} must be at least m + 1 = {}", m + 1));
    }
    let hn = h_formula(n, t)?;
    let window = h_window(n, m, t)?;
    let s = BigUint::from(n / (m + 1));
    let per_block = binomial(m as u64, (t - 1) as u64);
    let params = [("n", n as i64), ("m", m as i64), ("t", t as i64)];
    let report = |name: &str, value: BigUint| {
        BoundReport::new(name, &params, BoundValue::Integer(value), BoundMode::Exact)
            .input("h_n", &hn, Source::Formula)
            .input("blocks", &s, Source::Formula)
    };
    Ok([
        report("la_lower", window.clone()).input("h_window", &window, Source::Formula),
        report("la_upper", &hn - &s * &per_block).input("C(m,t-1)", &per_block, Source::Formula),
        report("l_upper", &hn - &s),
    ])
}

fn r2_value(p: usize, t: usize, k: u64) -> Result<(f64, f64, f64, f64)> {
    let (_, hf) = h_checked(p, 2, t)?;
    let cpf = small(&middle_binomial(p), "C(p, p/2)")?;
    let log2c = ln_lll_constant(hf, 2) / std::f64::consts::LN_2;
    Ok((p as f64 + (hf - 1.0) * ((k as f64).log2() - log2c) / cpf, hf, cpf, log2c))
}

/// `R₂ = p + (h-1)(log₂k - log₂c)/C_p` with `c = c(p, 2, t)`.
pub fn r_lower_boolean(p: usize, t: usize, k: u64) -> Result<BoundReport> {
    if k < 2 {
        return param("k must be at least 2");
    }
    let (value, hf, cpf, log2c) = r2_value(p, t, k)?;
    Ok(BoundReport::new(
        "r_lower_boolean",
        &[("p", p as i64), ("t", t as i64), ("k", k as i64)],
        BoundValue::Real(value),
        BoundMode::Asymptotic,
    )
    .input("h", hf, Source::Formula)
    .input("C_p", cpf, Source::Formula)
    .input("log2_c", format!("{log2c:.6}"), Source::Formula))
}

/// `((h-1)/m)(log₂k - log₂c_Q)` with `c_Q = (2e²h)^{1/(h-1)}`,
/// `h = h(Q, t)`, `m = |Q|`.
pub fn r_lower_general(poset: &FinitePoset, t: usize, k: u64) -> Result<BoundReport> {
    let h = t_chain_count_poset(poset, t)?;
    if h < BigUint::from(2u32) {
        return param(format!("the poset has {h} {t}-chains; at least 2 are required"));
    }
    if k < 1 {
        return param("k must be at least 1");
    }
    let hf = small(&h, "h(Q, t)")?;
    let m = poset.size() as f64;
    let log2_cq = (1.0 + hf.log2() + 2.0 / std::f64::consts::LN_2) / (hf - 1.0);
    let value = (hf - 1.0) / m * ((k as f64).log2() - log2_cq);
    Ok(BoundReport::new(
        "r_lower_general",
        &[("m", poset.size() as i64), ("t", t as i64), ("k", k as i64)],
        BoundValue::Real(value),
        BoundMode::Asymptotic,
    )
    .input("h", &h, Source::Formula)
    .input("log2_c_Q", format!("{log2_cq:.6}"), Source::Formula))
}

fn kmow_terms(p: usize, t: usize, k: u64) -> Result<(f64, f64)> {
    if k < 3 {
        return param("k must be at least 3");
    }
    if t < 2 || t - 1 > p {
        return param(format!("t = {t} must satisfy 1 <= t - 1 <= p = {p}"));
    }
    let hf = small(&h_formula(p, t)?, "h_p(t)")?;
    let cpf = small(&middle_binomial(p), "C(p, p/2)")?;
    let t1 = p as f64 + (hf + (hf - 1.0) * ((k - 1) as f64).log2() - 1.0) / (4.0 * cpf);
    let t2 = p as f64 + (hf - 1.0) / (2.0 * cpf);
    Ok((t1, t2))
}

/// `R₁ = min(T₁(k), T₂)`.
pub fn kmow_lower(p: usize, t: usize, k: u64) -> Result<BoundReport> {
    let (t1, t2) = kmow_terms(p, t, k)?;
    Ok(BoundReport::new(
        "kmow",
        &[("p", p as i64), ("t", t as i64), ("k", k as i64)],
        BoundValue::Real(t1.min(t2)),
        BoundMode::Exact,
    )
    .input("T1", t1, Source::Formula)
    .input("T2", t2, Source::Formula))
}

/// Least `k` in `3..=k_max` with `R₂(k) > R₁(k)`.
pub fn compare_crossover(p: usize, t: usize, k_max: u64) -> Result<BoundReport> {
    kmow_terms(p, t, 3)?;
    let mut found = None;
    for k in 3..=k_max {
        let (t1, t2) = kmow_terms(p, t, k)?;
        if r2_value(p, t, k)?.0 > t1.min(t2) {
            found = Some(k);
            break;
        }
    }
    let value = match found {
        Some(k) => BoundValue::Integer(BigUint::from(k)),
        None => BoundValue::Beyond(k_max),
    };
    let mut r = BoundReport::new(
        "crossover",
        &[("p", p as i64), ("t", t as i64), ("k_max", k_max as i64)],
        value,
        BoundMode::Asymptotic,
    );
    if let Some(k) = found {
        let (t1, t2) = kmow_terms(p, t, k)?;
        r = r
            .input("R1", t1.min(t2), Source::Formula)
            .input("R2", r2_value(p, t, k)?.0, Source::Formula);
    }
    Ok(r)
}

/// Evaluates a bound by name from integer parameters.
pub fn evaluate(name: &str, params: &BTreeMap<String, i64>, limits: &Limits) -> Result<Vec<BoundReport>> {
    let get = |key: &str| -> Result<i64> {
        params.get(key).copied().ok_or_else(|| Error::Parameter(format!("bound {name} needs parameter {key}")))
    };
    let u = |key: &str| -> Result<usize> {
        usize::try_from(get(key)?).map_err(|_| Error::Parameter(format!("{key} must be nonnegative")))
    };
    let k = |key: &str| -> Result<u64> {
        u64::try_from(get(key)?).map_err(|_| Error::Parameter(format!("{key} must be nonnegative")))
    };
    Ok(match name {
        "lll_constant" => vec![lll_constant_report(u("p")?, u("q")?, u("t")?)?],
        "f_upper" | "f_upper_certified" => {
            let mode = if name == "f_upper" { UpperMode::Asymptotic } else { UpperMode::Certified };
            vec![f_upper(u("p")?, u("q")?, u("t")?, u("n")?, mode, limits)?]
        }
        "f_lower_th123" => vec![f_lower_th123(u("n")?, u("p")?, u("t")?, u("q")?, limits)?],
        "la_l_bounds" => la_l_bounds(u("n")?, u("m")?, u("t")?)?.to_vec(),
        "r_lower_boolean" => vec![r_lower_boolean(u("p")?, u("t")?, k("k")?)?],
        "r_lower_general" => {
            let m = u("m")?;
            let kind = params.get("kind").copied().unwrap_or(0);
            let poset = match kind {
                0 => FinitePoset::chain(m)?,
                1 => FinitePoset::antichain(m)?,
                _ => return param("kind must be 0 (chain) or 1 (antichain); use a poset file otherwise"),
            };
            let mut r = r_lower_general(&poset, u("t")?, k("k")?)?;
            r.params.insert("kind".into(), kind);
            vec![r]
        }
        "kmow" => vec![kmow_lower(u("p")?, u("t")?, k("k")?)?],
        "crossover" => vec![compare_crossover(u("p")?, u("t")?, k("k_max")?)?],
        other => return param(format!("unknown bound {other:?}")),
    })
}

pub const BOUND_NAMES: &[&str] = &[
    "lll_constant",
    "f_upper",
    "f_upper_certified",
    "f_lower_th123",
    "la_l_bounds",
    "r_lower_boolean",
    "r_lower_general",
    "kmow",
    "crossover",
];
