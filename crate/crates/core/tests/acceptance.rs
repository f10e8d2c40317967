//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Criteria 1-10 are run in rayon pools of 1, 2 and 8 threads and once more
//! at 8 threads; criterion 11 compares the digests of all four runs.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use chainlab_core::bounds::{
    compare_crossover, f_lower_th123, f_upper, kmow_lower, la_l_bounds, lll_constant, BoundValue, UpperMode,
};
use chainlab_core::chains::{h_formula, h_rank_dp, h_window};
use chainlab_core::coloring::validate_coloring;
use chainlab_core::copies::{antichain_count, aw_sandwich, boolean_automorphisms, chain_copy_counts, g_counts, Limits};
use chainlab_core::lattice::enumerate_t_chains;
use chainlab_core::lll::{certified_k, moser_tardos, ThresholdMode};
use chainlab_core::posets::EmbeddingKind::{self, Strong, Weak};
use chainlab_core::search::{
    chain_set_is_free, exact_f, extremal_max_chains, family_is_free, ramsey_number, ExtremalObject, RamseyTarget,
    SearchValue, Witness,
};

const TABLE_BUDGET: u64 = 2_000_000;
const EXACT_BUDGET: u64 = 50_000_000;

struct Check {
    failures: Vec<String>,
    digest: String,
    checks: usize,
}

impl Check {
    fn new() -> Self {
        Check { failures: Vec::new(), digest: String::new(), checks: 0 }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn record(&mut self, item: impl std::fmt::Debug) {
        let _ = write!(self.digest, "{item:?};");
    }
}

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn bits_subset(a: u32, b: u32) -> bool {
    a & !b == 0
}

/// Nested loops over bitmasks counting strictly increasing t-tuples.
fn loop_count(n: usize, t: usize, ranks: Option<(u32, u32)>) -> u64 {
    let ok = |x: u32| ranks.is_none_or(|(lo, hi)| (lo..=hi).contains(&x.count_ones()));
    fn rec(prev: Option<u32>, left: usize, n: usize, ok: &dyn Fn(u32) -> bool) -> u64 {
        if left == 0 {
            return 1;
        }
        (0..1u32 << n)
            .filter(|&x| ok(x) && prev.is_none_or(|p| p != x && bits_subset(p, x)))
            .map(|x| rec(Some(x), left - 1, n, ok))
            .sum()
    }
    rec(None, t, n, &ok)
}

type FKey = (EmbeddingKind, usize, usize, usize, usize);

/// Exact coloring numbers for p <= 2, n <= 4, t <= p, all q, both modes.
fn f_table() -> BTreeMap<FKey, SearchValue> {
    let mut table = BTreeMap::new();
    for mode in [Strong, Weak] {
        for p in 1..=2usize {
            for n in p..=4usize {
                for t in 1..=p {
                    let h: u64 = h_formula(p, t).unwrap().try_into().unwrap();
                    for q in 1..=h as usize {
                        let out = exact_f(n, p, q, t, mode, TABLE_BUDGET).unwrap();
                        table.insert((mode, n, p, q, t), out.value);
                    }
                }
            }
        }
    }
    table
}

fn criterion_1(c: &mut Check) {
    for p in 0..=6usize {
        for t in 1..=p + 1 {
            let f = h_formula(p, t).unwrap();
            let dp = h_rank_dp(p, t).unwrap();
            let brute = big(enumerate_t_chains(p, t).unwrap().len() as u64);
            c.record((p, t, &f));
            c.expect(f == dp && dp == brute, || format!("p={p} t={t}: formula {f}, dp {dp}, enumeration {brute}"));
        }
    }
}

fn criterion_2(c: &mut Check) {
    let cases = [(2usize, 2usize, 5u64), (3, 2, 19), (3, 3, 18), (5, 2, 211)];
    for (p, t, want) in cases {
        let oracle = loop_count(p, t, None);
        let got = h_formula(p, t).unwrap();
        c.record((p, t, oracle));
        c.expect(oracle == want && got == big(want), || format!("h_{p}({t}) = {got}, loops {oracle}, want {want}"));
    }
    let oracle = loop_count(4, 2, Some((1, 2)));
    let got = h_window(4, 2, 2).unwrap();
    c.record(oracle);
    c.expect(oracle == 12 && got == big(12), || format!("h_window(4,2,2) = {got}, loops {oracle}"));
}

fn criterion_3(c: &mut Check) {
    let l = Limits::default();
    let g = g_counts(1, 3, &l).unwrap();
    c.expect(g.embedding_count == big(19), || format!("embeddings(1,3) = {}", g.embedding_count));
    let g = g_counts(2, 2, &l).unwrap();
    c.expect(g.embedding_count == big(2) && g.image_count == big(1), || format!("(2,2) gave {g:?}"));
    for p in 0..=3 {
        for n in p..=5 {
            let g = g_counts(p, n, &l).unwrap();
            c.record((p, n, &g.embedding_count, &g.image_count));
            c.expect(g.embedding_count == &g.image_count * boolean_automorphisms(p), || {
                format!("p={p} n={n}: {} embeddings vs {} images", g.embedding_count, g.image_count)
            });
        }
    }
    for (m, a) in [(1, 3u64), (2, 6), (3, 20)] {
        let got = antichain_count(m).unwrap();
        c.expect(got == big(a), || format!("a({m}) = {got}"));
    }
    for m in 1..=3 {
        for big_n in m..=6 {
            let emb = g_counts(m, big_n, &l).unwrap().embedding_count;
            let (lo, hi) = aw_sandwich(m, big_n).unwrap();
            c.record((m, big_n, &emb));
            c.expect(lo <= emb && emb <= hi, || format!("m={m} N={big_n}: {lo} <= {emb} <= {hi} fails"));
        }
    }
}

fn criterion_4(c: &mut Check) {
    for (p, t) in [(1usize, 1usize), (1, 2), (2, 2)] {
        for n in p..=4 {
            let census = chain_copy_counts(p, n, t, &Limits::default()).unwrap();
            let total: u64 = census.per_chain.as_ref().unwrap().iter().sum();
            let want = &census.image_count * h_formula(p, t).unwrap();
            c.record((p, t, n, total));
            c.expect(big(total) == want, || format!("p={p} t={t} n={n}: sum C_T = {total}, want {want}"));
        }
    }
}

fn strong_f(n: usize, p: usize, q: usize, t: usize) -> Option<u64> {
    exact_f(n, p, q, t, Strong, EXACT_BUDGET).unwrap().value.exact()
}

fn criterion_5(c: &mut Check) {
    for p in 1..=2usize {
        for n in p..=4 {
            for t in 1..=p {
                let v = strong_f(n, p, 1, t);
                c.expect(v == Some(1), || format!("f(n={n},p={p},q=1,t={t}) = {v:?}"));
            }
        }
    }
    let v = strong_f(2, 2, 2, 2);
    c.expect(v == Some(2), || format!("f_2(2,2,2) = {v:?}"));
    for n in 1..=4usize {
        let v = strong_f(n, 1, 2, 1);
        c.record((n, v));
        c.expect(v == Some(n as u64 + 1), || format!("f_1(n={n},1,2) = {v:?}"));
    }
    for p in 1..=2usize {
        for t in 1..=p {
            let h: u64 = h_formula(p, t).unwrap().try_into().unwrap();
            for q in 1..=h as usize {
                let v = strong_f(p, p, q, t);
                c.record((p, t, q, v));
                c.expect(v == Some(q as u64), || format!("f_{t}(p={p},p,q={q}) = {v:?}"));
            }
        }
    }
}

fn criterion_6(c: &mut Check, table: &BTreeMap<FKey, SearchValue>) {
    let exact = |k: FKey| table.get(&k).and_then(SearchValue::exact);
    let mut compared = 0;
    for (&(mode, n, p, q, t), v) in table {
        c.record((mode, n, p, q, t, v));
        let Some(v) = v.exact() else { continue };
        if mode == Weak {
            if let Some(s) = exact((Strong, n, p, q, t)) {
                compared += 1;
                c.expect(v >= s, || format!("weak {v} < strong {s} at n={n} p={p} q={q} t={t}"));
            }
            continue;
        }
        if let Some(smaller) = exact((Strong, n, p - 1, q, t)) {
            compared += 1;
            c.expect(v <= smaller, || format!("f(n={n},p={p},q={q},t={t}) = {v} > f at p-1 = {smaller}"));
        }
        if let Some(prev) = exact((Strong, n, p, q - 1, t)).filter(|_| q > 1) {
            compared += 1;
            c.expect(prev <= v, || format!("f at q-1 = {prev} > f(n={n},p={p},q={q},t={t}) = {v}"));
        }
        if q == 2 {
            for n1 in p..n {
                if let Some(lower) = exact((Strong, n1, p, 2, t)) {
                    compared += 1;
                    c.expect(lower <= v, || format!("f(n={n1}) = {lower} > f(n={n}) = {v} at p={p} t={t}"));
                }
            }
        }
    }
    c.expect(compared > 0, || "no comparable pairs in the table".into());
}

fn ramsey_boolean(k: u32, t: usize, p: usize, n_max: usize) -> SearchValue {
    ramsey_number(k, t, &RamseyTarget::Boolean(p), n_max, EXACT_BUDGET).unwrap().value
}

fn criterion_7(c: &mut Check, table: &BTreeMap<FKey, SearchValue>) {
    let r = ramsey_boolean(2, 1, 1, 6);
    c.expect(r == SearchValue::Exact(2), || format!("R_2,1(B|B_1) = {r:?}"));
    for p in 1..=3usize {
        for t in 1..=p {
            let r = ramsey_boolean(1, t, p, 6);
            c.record((p, t, r));
            c.expect(r == SearchValue::Exact(p as u64), || format!("R_1,{t}(B|B_{p}) = {r:?}"));
        }
    }
    for (&(mode, n, p, q, t), v) in table {
        let (Strong, 2, Some(k)) = (mode, q, v.exact()) else { continue };
        let above = ramsey_boolean(k as u32, t, p, n);
        c.record((n, p, t, k, above));
        c.expect(above.lower() > n as u64, || format!("f(n={n},p={p},2,t={t}) = {k} but R_{k} = {above:?}"));
        if k >= 2 {
            let below = ramsey_boolean(k as u32 - 1, t, p, n);
            c.expect(below.exact().is_some_and(|r| r <= n as u64), || {
                format!("f(n={n},p={p},2,t={t}) = {k} but R_{} = {below:?}", k - 1)
            });
        }
    }
}

fn criterion_8(c: &mut Check) {
    let m = 2;
    let mut values = BTreeMap::new();
    for (object, n_max) in [(ExtremalObject::Family, 4usize), (ExtremalObject::Chainset, 3)] {
        for n in 2..=n_max {
            for t in 1..=2usize {
                for mode in [Strong, Weak] {
                    let out = extremal_max_chains(n, m, t, object, mode, EXACT_BUDGET).unwrap();
                    let Some(v) = out.value.exact() else {
                        c.expect(false, || format!("{object:?} n={n} t={t} {mode} not solved: {:?}", out.value));
                        continue;
                    };
                    let free = match &out.witness {
                        Some(Witness::Family(f)) => family_is_free(n, m, mode, f).unwrap(),
                        Some(Witness::ChainSet(cs)) => chain_set_is_free(n, m, t, mode, cs).unwrap(),
                        _ => false,
                    };
                    c.expect(free, || format!("{object:?} n={n} t={t} {mode}: witness contains a copy"));
                    c.record((object, n, t, mode, v));
                    values.insert((object, n, t, mode), v);
                }
            }
        }
    }
    let la3 = values[&(ExtremalObject::Family, 3, 2, Strong)];
    c.expect((3..=17).contains(&la3), || format!("La_2(3,B_2) = {la3} outside [3,17]"));
    let l2 = values[&(ExtremalObject::Chainset, 2, 2, Strong)];
    c.expect(l2 == 4, || format!("L_2(2,B_2) = {l2}"));
    for (&(object, n, t, mode), &v) in &values {
        if mode == Weak {
            let s = values[&(object, n, t, Strong)];
            c.expect(v <= s, || format!("{object:?} n={n} t={t}: weak {v} > strong {s}"));
        }
        if object == ExtremalObject::Family && t <= m + 1 {
            if let Some(&l) = values.get(&(ExtremalObject::Chainset, n, t, mode)) {
                c.expect(v <= l, || format!("n={n} t={t} {mode}: La {v} > L {l}"));
            }
        }
        if n > m {
            let [lo, up_la, up_l] = la_l_bounds(n, m, t).unwrap().map(|r| r.value.as_integer().unwrap().clone());
            let v = big(v);
            match object {
                ExtremalObject::Family => {
                    c.expect(lo <= v && v <= up_la, || format!("La n={n} t={t} {mode}: {v} outside [{lo},{up_la}]"))
                }
                ExtremalObject::Chainset => {
                    c.expect(v <= up_l, || format!("L n={n} t={t} {mode}: {v} above {up_l}"))
                }
            }
        }
    }
}

fn criterion_9(c: &mut Check) {
    let l = Limits::default();
    let k = certified_k(2, 2, 2, 2, ThresholdMode::PaperBound, &l).unwrap().k;
    c.expect(k == 2, || format!("certified K(2,2,2,2) = {k}"));
    let mut seed = 20_260_000u64;
    for p in 1..=2usize {
        for t in 1..=p {
            for n in p..=4 {
                seed += 1;
                let ck = certified_k(p, 2, t, n, ThresholdMode::PaperBound, &l).unwrap();
                let run = moser_tardos(p, 2, t, n, ck.k as u32, seed, 1_000_000, &l).unwrap();
                let again = moser_tardos(p, 2, t, n, ck.k as u32, seed, 1_000_000, &l).unwrap();
                let bytes = serde_json::to_string(&run).unwrap();
                c.expect(bytes == serde_json::to_string(&again).unwrap(), || format!("p={p} t={t} n={n}: rerun differs"));
                c.record((p, t, n, ck.k, &ck.d, run.resamples));
                let valid = run
                    .final_coloring
                    .as_ref()
                    .is_some_and(|col| validate_coloring(col, p, 2, Strong, &l).unwrap().is_valid());
                c.expect(run.succeeded && valid, || format!("p={p} t={t} n={n} K={}: {}", ck.k, run.summary_json()));
            }
        }
    }
}

fn criterion_10(c: &mut Check, table: &BTreeMap<FKey, SearchValue>) {
    let l = Limits::default();
    let lc = lll_constant(2, 2, 2).unwrap();
    c.expect((lc - (10.0 * E * E).powf(0.25)).abs() < 1e-6, || format!("lll_constant(2,2,2) = {lc}"));
    let r = kmow_lower(2, 2, 3).unwrap();
    let t1 = &r.inputs.iter().find(|i| i.name == "T1").unwrap().value;
    let t2 = &r.inputs.iter().find(|i| i.name == "T2").unwrap().value;
    c.expect(r.value == BoundValue::Real(3.0) && t1 == t2, || format!("kmow(2,2,3) = {r}, T1 {t1}, T2 {t2}"));
    let k0 = compare_crossover(2, 2, 1_000_000).unwrap().value;
    c.expect(k0 == BoundValue::Integer(big(5)), || format!("crossover(2,2) = {k0}"));
    let r = f_lower_th123(5, 2, 2, 2, &l).unwrap();
    let term1 = &r.inputs.iter().find(|i| i.name == "term1").unwrap().value;
    c.expect(term1 == "2", || format!("f_lower(5,2,2,2) term 1 = {term1}"));
    c.record(&r.value);
    let mut lower_checks = 0;
    for (&(mode, n, p, q, t), v) in table {
        let (Strong, Some(v)) = (mode, v.exact()) else { continue };
        let upper = f_upper(p, q, t, n, UpperMode::Certified, &l).unwrap().value;
        let up = upper.as_integer().unwrap();
        c.record((n, p, q, t, up));
        c.expect(&big(v) <= up, || format!("exact f(n={n},p={p},q={q},t={t}) = {v} above certified {up}"));
        if q >= 2 && n > 2 * p {
            let lower = f_lower_th123(n, p, t, q, &l).unwrap().value;
            let lo = lower.as_integer().unwrap();
            lower_checks += 1;
            c.expect(lo <= &big(v), || format!("lower {lo} above exact f(n={n},p={p},q={q},t={t}) = {v}"));
        }
    }
    c.expect(lower_checks > 0, || "no instance admitted the lower bound".into());
}

struct Line {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    elapsed: Duration,
    check: Check,
}

impl Line {
    fn pass(&self) -> bool {
        self.check.failures.is_empty() && self.limit.is_none_or(|l| self.elapsed < l)
    }
}

fn timed(id: u32, title: &'static str, limit: Option<u64>, f: impl FnOnce(&mut Check)) -> Line {
    let mut check = Check::new();
    let start = Instant::now();
    f(&mut check);
    Line { id, title, limit: limit.map(Duration::from_secs), elapsed: start.elapsed(), check }
}

fn run_suite() -> Vec<Line> {
    let mut lines = vec![
        timed(1, "chain-count formula, rank DP and enumeration agree", Some(10), criterion_1),
        timed(2, "known chain counts reproduced", None, criterion_2),
        timed(3, "copy counts, automorphism factor and sandwich", Some(60), criterion_3),
        timed(4, "double count of chain/copy incidences", None, criterion_4),
        timed(5, "exact coloring values", Some(120), criterion_5),
    ];
    let mut table = BTreeMap::new();
    let mut line = timed(6, "monotonicity over the exact table", None, |c| {
        table = f_table();
        criterion_6(c, &table);
    });
    let solved = table.values().filter(|v| v.exact().is_some()).count();
    line.check.record(("solved", solved, table.len()));
    lines.push(line);
    lines.push(timed(7, "Ramsey numbers consistent with the table", None, |c| criterion_7(c, &table)));
    lines.push(timed(8, "extremal values inside the block/middle sandwich", None, criterion_8));
    lines.push(timed(9, "certified K and Moser-Tardos construction", None, criterion_9));
    lines.push(timed(10, "bound arithmetic and lower <= exact <= upper", None, |c| criterion_10(c, &table)));
    lines
}

fn main() {
    let mut digests = Vec::new();
    let mut primary = None;
    for (label, threads) in [("8 threads", 8), ("1 thread", 1), ("2 threads", 2), ("8 threads, repeat", 8)] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let lines = pool.install(run_suite);
        let digest: String = lines
            .iter()
            .map(|l| format!("{}:{}:{}|", l.id, l.check.failures.len(), l.check.digest))
            .collect();
        digests.push((label, digest));
        if primary.is_none() {
            primary = Some(lines);
        }
    }
    let lines = primary.expect("suite ran");
    let mut failed = 0;
    for l in &lines {
        let status = if l.pass() { "PASS" } else { "FAIL" };
        let limit = l.limit.map(|d| format!(", limit {} s", d.as_secs())).unwrap_or_default();
        println!(
            "criterion {:>2} {status}  {} ({} checks, {:.2} s{limit})",
            l.id,
            l.title,
            l.check.checks,
            l.elapsed.as_secs_f64()
        );
        for f in &l.check.failures {
            println!("    {f}");
        }
        if !l.pass() {
            failed += 1;
        }
    }
    let reference = &digests[0].1;
    let differing: Vec<&str> = digests.iter().filter(|(_, d)| d != reference).map(|(l, _)| *l).collect();
    let all_pass_everywhere = lines.iter().all(Line::pass);
    let deterministic = differing.is_empty() && all_pass_everywhere;
    println!(
        "criterion 11 {}  results identical across 1, 2, 8 threads and a repeated run{}",
        if deterministic { "PASS" } else { "FAIL" },
        if differing.is_empty() { String::new() } else { format!(" (differs: {})", differing.join(", ")) }
    );
    if !deterministic {
        failed += 1;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
