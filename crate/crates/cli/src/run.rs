//! Command dispatch, caching and exit codes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use chainlab_core::bounds::{evaluate, r_lower_general, BoundReport};
use chainlab_core::cache::{cache_key, ResultCache};
use chainlab_core::chains::{h_formula, h_window};
use chainlab_core::copies::{aw_sandwich, enumerate_copies, CopyTable, Limits};
use chainlab_core::lll::{certified_k, moser_tardos, ThresholdMode};
use chainlab_core::posets::{EmbeddingKind, FinitePoset};
use chainlab_core::search::{
    build_constructions, exact_f, extremal_max_chains, ramsey_number, ExtremalObject, RamseyTarget, SearchOutcome,
    Witness,
};
use chainlab_core::{Error, Result, VERSION};

use crate::emit::{print, render};
use crate::{BoundsArgs, BoundsCommand, Cli, Command, Format, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_PARAMETER: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Result fields and provenance of one command.
#[derive(Default)]
struct Body {
    fields: Map<String, Value>,
    provenance: Map<String, Value>,
    partial: bool,
}

impl Body {
    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    fn source(&mut self, key: &str, source: &str) {
        self.provenance.insert(key.to_string(), Value::from(source));
    }
}

/// A finished document and whether it is a partial result.
struct Outcome {
    doc: Value,
    partial: bool,
}

fn document(command: &str, params: &Map<String, Value>, body: Body) -> Outcome {
    let mut doc = body.fields;
    doc.insert("command".into(), command.into());
    doc.insert("version".into(), VERSION.into());
    doc.insert("params".into(), Value::Object(params.clone()));
    doc.insert("provenance".into(), Value::Object(body.provenance));
    Outcome { doc: Value::Object(doc), partial: body.partial }
}

fn big(v: &BigUint) -> Value {
    match u64::try_from(v) {
        Ok(small) => small.into(),
        Err(_) => v.to_string().into(),
    }
}

fn decimal(s: &str) -> Value {
    s.parse::<u64>().map(Value::from).unwrap_or_else(|_| s.into())
}

fn kind(mode: Mode) -> EmbeddingKind {
    match mode {
        Mode::Strong => EmbeddingKind::Strong,
        Mode::Weak => EmbeddingKind::Weak,
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Strong => "strong",
        Mode::Weak => "weak",
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize to JSON")
}

struct Ctx {
    cache: Option<ResultCache>,
}

impl Ctx {
    /// Looks the command up in the cache, otherwise computes it; budget
    /// errors become partial documents.
    fn run(
        &mut self,
        command: &str,
        params: Map<String, Value>,
        compute: impl FnOnce(&mut Body) -> Result<()>,
    ) -> Result<Outcome> {
        let key = cache_key(command, params.iter().map(|(k, v)| (k.as_str(), param_text(v))));
        if let Some(doc) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            return Ok(Outcome { doc: doc.clone(), partial: false });
        }
        let mut body = Body::default();
        match compute(&mut body) {
            Ok(()) => {}
            Err(Error::BudgetExceeded { budget, explored }) => {
                body = Body { partial: true, ..Body::default() };
                body.set("budget_exhausted", true);
                body.set("nodes_explored", explored);
                body.set("error", format!("budget of {budget} nodes exceeded"));
            }
            Err(Error::CountOutOfBudget { budget, lower, upper }) => {
                body = Body { partial: true, ..Body::default() };
                body.set("budget_exhausted", true);
                body.set("embeddings", json!({ "lower": decimal(&lower), "upper": decimal(&upper) }));
                body.source("embeddings", "bound");
                body.set("error", format!("budget of {budget} nodes exceeded; embedding count is bracketed"));
            }
            Err(e) => return Err(e),
        }
        let out = document(command, &params, body);
        if !out.partial {
            if let Some(cache) = self.cache.as_mut() {
                if let Err(e) = cache.put(key, out.doc.clone()) {
                    eprintln!("warning: could not write cache: {e}");
                }
            }
        }
        Ok(out)
    }
}

fn param_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn load_poset(path: &Path) -> Result<FinitePoset> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read poset file {}: {e}", path.display())))?;
    FinitePoset::parse(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parameter(format!("{}:{line}: {message}", path.display())),
        other => other,
    })
}

fn search_body(body: &mut Body, outcome: SearchOutcome, value_source: &str) {
    body.partial = outcome.budget_exhausted;
    body.set("value", to_value(&outcome.value));
    body.set("witness", to_value(&outcome.witness));
    body.set("nodes_explored", outcome.nodes_explored);
    body.set("budget_exhausted", outcome.budget_exhausted);
    body.source("copies", "enumeration");
    body.source("value", if outcome.budget_exhausted { "search interval" } else { value_source });
}

fn dispatch(command: Command, ctx: &mut Ctx) -> Result<(Outcome, Format)> {
    let json_out = |o: Outcome| Ok((o, Format::Json));
    match command {
        Command::CountChains { n, t, window } => {
            let mut p = params(&[("n", n.into()), ("t", t.into())]);
            if let Some(m) = window {
                p.insert("window".into(), m.into());
            }
            json_out(ctx.run("count-chains", p, |b| {
                match window {
                    None => {
                        b.set("h", big(&h_formula(n, t)?));
                        b.source("h", "formula");
                    }
                    Some(m) => {
                        b.set("h", big(&h_window(n, m, t)?));
                        b.source("h", "rank-window count");
                    }
                }
                Ok(())
            })?)
        }
        Command::CountCopies { p, n, mode, t, budget } => {
            let mut ps = params(&[("p", p.into()), ("n", n.into()), ("mode", mode_name(mode).into()), ("budget", budget.into())]);
            if let Some(t) = t {
                ps.insert("t".into(), t.into());
            }
            json_out(ctx.run("count-copies", ps, |b| {
                let limits = Limits::with_budget(budget);
                let set = match enumerate_copies(p, n, kind(mode), &limits) {
                    Err(Error::BudgetExceeded { budget, .. }) if mode == Mode::Strong => {
                        let (lower, upper) = aw_sandwich(p, n)?;
                        return Err(Error::CountOutOfBudget { budget, lower: lower.to_string(), upper: upper.to_string() });
                    }
                    other => other?,
                };
                b.set("embeddings", set.embedding_count);
                b.set("images", set.image_count());
                b.source("embeddings", "enumeration");
                b.source("images", "enumeration");
                if let Some(t) = t {
                    let table = CopyTable::new(set, t)?;
                    let per_chain = table.per_chain_counts();
                    b.set("c_min", per_chain.iter().copied().min());
                    b.set("per_chain", per_chain);
                    b.source("per_chain", "enumeration");
                }
                Ok(())
            })?)
        }
        Command::ExactF { n, p, q, t, mode, budget } => {
            let ps = params(&[
                ("n", n.into()),
                ("p", p.into()),
                ("q", q.into()),
                ("t", t.into()),
                ("mode", mode_name(mode).into()),
                ("budget", budget.into()),
            ]);
            json_out(ctx.run("exact-f", ps, |b| {
                search_body(b, exact_f(n, p, q, t, kind(mode), budget)?, "exhaustive search");
                Ok(())
            })?)
        }
        Command::Ramsey { k, t, p, poset, n_max, budget } => {
            let mut ps = params(&[("k", k.into()), ("t", t.into()), ("n_max", n_max.into()), ("budget", budget.into())]);
            let target = match (p, poset) {
                (Some(p), _) => {
                    ps.insert("p".into(), p.into());
                    RamseyTarget::Boolean(p)
                }
                (None, Some(path)) => {
                    let poset = load_poset(&path)?;
                    ps.insert("poset".into(), poset.to_text().into());
                    RamseyTarget::Poset(poset)
                }
                (None, None) => return Err(Error::Parameter("one of --p or --poset is required".into())),
            };
            json_out(ctx.run("ramsey", ps, |b| {
                search_body(b, ramsey_number(k, t, &target, n_max, budget)?, "exhaustive search");
                Ok(())
            })?)
        }
        Command::Extremal { n, m, t, object, mode, budget } => {
            let obj: ExtremalObject = object.parse()?;
            let ps = params(&[
                ("n", n.into()),
                ("m", m.into()),
                ("t", t.into()),
                ("object", object.into()),
                ("mode", mode_name(mode).into()),
                ("budget", budget.into()),
            ]);
            json_out(ctx.run("extremal", ps, |b| {
                search_body(b, extremal_max_chains(n, m, t, obj, kind(mode), budget)?, "exhaustive search");
                Ok(())
            })?)
        }
        Command::Lll { p, q, t, n, k, seed, max_resamples, threshold, budget } => {
            let seed = seed.unwrap_or_else(rand::random);
            let threshold_mode: ThresholdMode = threshold.parse()?;
            let mut ps = params(&[
                ("p", p.into()),
                ("q", q.into()),
                ("t", t.into()),
                ("n", n.into()),
                ("seed", seed.into()),
                ("max_resamples", max_resamples.into()),
                ("threshold", threshold.into()),
                ("budget", budget.into()),
            ]);
            if let Some(k) = k {
                ps.insert("K".into(), k.into());
            }
            json_out(ctx.run("lll", ps, |b| {
                let limits = Limits::with_budget(budget);
                let colors = match k {
                    Some(k) => k,
                    None => {
                        let cert = certified_k(p, q, t, n, threshold_mode, &limits)?;
                        b.set("certified", to_value(&cert));
                        b.source("certified_K", "local lemma threshold");
                        b.source("dependency_degree", to_value(&cert.d_source).as_str().unwrap_or(""));
                        u32::try_from(cert.k)
                            .map_err(|_| Error::Unsupported(format!("certified K = {} exceeds 32 bits", cert.k)))?
                    }
                };
                let stats = moser_tardos(p, q, t, n, colors, seed, max_resamples, &limits)?;
                b.partial = !stats.succeeded;
                b.set("K", stats.k);
                b.set("resamples", stats.resamples);
                b.set("iterations", stats.iterations);
                b.set("succeeded", stats.succeeded);
                b.set("budget_exhausted", !stats.succeeded);
                b.set("witness", to_value(&stats.final_coloring.map(Witness::Coloring)));
                b.source("copies", "enumeration");
                b.source("witness", "moser-tardos resampling");
                Ok(())
            })?)
        }
        Command::Bounds(args) => bounds(args, ctx),
        Command::Constructions { n, m } => json_out(ctx.run("constructions", params(&[("n", n.into()), ("m", m.into())]), |b| {
            let c = build_constructions(n, m)?;
            b.set("window", to_value(&c.window));
            b.set("middle", to_value(&c.middle));
            b.set("blocks", to_value(&c.blocks));
            b.source("middle", "formula");
            b.source("blocks", "formula");
            Ok(())
        })?),
    }
}

fn parse_params(text: &str) -> Result<BTreeMap<String, i64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("expected key=value, found {item:?}")))?;
        let v: i64 = v.trim().parse().map_err(|_| Error::Parameter(format!("{k} must be an integer, found {v:?}")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

/// `NAME:key=lo..hi,key=v` into every parameter combination, last key fastest.
fn parse_sweep(spec: &str) -> Result<Vec<(String, BTreeMap<String, i64>)>> {
    let (name, body) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parameter(format!("sweep {spec:?} must look like NAME:key=lo..hi,...")))?;
    let mut ranges: BTreeMap<String, Vec<i64>> = BTreeMap::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("expected key=value or key=lo..hi, found {item:?}")))?;
        let int = |s: &str| -> Result<i64> {
            s.trim().parse().map_err(|_| Error::Parameter(format!("{k}: {s:?} is not an integer")))
        };
        let values: Vec<i64> = match v.split_once("..") {
            Some((lo, hi)) => (int(lo)?..=int(hi)?).collect(),
            None => vec![int(v)?],
        };
        if values.is_empty() {
            return Err(Error::Parameter(format!("empty range for {k} in sweep {spec:?}")));
        }
        ranges.insert(k.trim().to_string(), values);
    }
    let mut combos = vec![BTreeMap::new()];
    for (k, values) in &ranges {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.insert(k.clone(), v);
                    c
                })
            })
            .collect();
    }
    Ok(combos.into_iter().map(|c| (name.trim().to_string(), c)).collect())
}

fn report_body(b: &mut Body, reports: &[BoundReport]) {
    if let [only] = reports {
        b.set("name", only.name.clone());
        b.set("value", to_value(&only.value));
        b.set("mode", to_value(&only.mode));
        b.set("o1_zeroed", only.o1_zeroed);
    }
    for r in reports {
        for input in &r.inputs {
            let key = if reports.len() == 1 { input.name.clone() } else { format!("{}.{}", r.name, input.name) };
            b.source(&key, &input.source.to_string());
        }
    }
    b.set("reports", to_value(&reports));
}

fn bounds(args: BoundsArgs, ctx: &mut Ctx) -> Result<(Outcome, Format)> {
    match args.table {
        Some(BoundsCommand::Table { sweep, budget }) => {
            let mut jobs = Vec::new();
            for spec in &sweep {
                jobs.extend(parse_sweep(spec)?);
            }
            let ps = params(&[("sweep", sweep.join(" ").into()), ("budget", budget.into())]);
            let out = ctx.run("bounds-table", ps, |b| {
                let limits = Limits::with_budget(budget);
                let results: Vec<Result<Vec<BoundReport>>> =
                    jobs.par_iter().map(|(name, p)| evaluate(name, p, &limits)).collect();
                let mut reports = Vec::new();
                let mut skipped = Vec::new();
                for ((name, p), r) in jobs.iter().zip(results) {
                    match r {
                        Ok(rs) => reports.extend(rs),
                        Err(e @ (Error::Parameter(_) | Error::Unsupported(_))) => {
                            let ps: Vec<String> = p.iter().map(|(k, v)| format!("{k}={v}")).collect();
                            skipped.push(format!("{name}({}): {e}", ps.join(";")));
                        }
                        Err(e) => return Err(e),
                    }
                }
                for r in &reports {
                    for input in &r.inputs {
                        b.source(&input.name, &input.source.to_string());
                    }
                }
                b.set("rows", reports.len());
                b.set("skipped", skipped);
                b.set("reports", to_value(&reports));
                Ok(())
            })?;
            Ok((out, Format::Csv))
        }
        None => {
            let name = args.name.ok_or_else(|| Error::Parameter("bounds needs --name NAME or the table subcommand".into()))?;
            let parsed = parse_params(&args.params)?;
            let mut ps: Map<String, Value> = parsed.iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect();
            ps.insert("name".into(), name.clone().into());
            ps.insert("budget".into(), args.budget.into());
            let poset = match &args.poset {
                Some(path) if name == "r_lower_general" => {
                    let poset = load_poset(path)?;
                    ps.insert("poset".into(), poset.to_text().into());
                    Some(poset)
                }
                Some(_) => return Err(Error::Parameter("--poset only applies to r_lower_general".into())),
                None => None,
            };
            let out = ctx.run("bounds", ps, |b| {
                let reports = match &poset {
                    Some(poset) => {
                        let get = |k: &str| -> Result<i64> {
                            parsed.get(k).copied().ok_or_else(|| Error::Parameter(format!("r_lower_general needs parameter {k}")))
                        };
                        let t = usize::try_from(get("t")?).map_err(|_| Error::Parameter("t must be nonnegative".into()))?;
                        let k = u64::try_from(get("k")?).map_err(|_| Error::Parameter("k must be nonnegative".into()))?;
                        vec![r_lower_general(poset, t, k)?]
                    }
                    None => evaluate(&name, &parsed, &Limits::with_budget(args.budget))?,
                };
                report_body(b, &reports);
                Ok(())
            })?;
            Ok((out, Format::Json))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } | Error::CountOutOfBudget { .. } => EXIT_BUDGET,
        Error::Io(_) | Error::Json(_) => EXIT_INTERNAL,
        _ => EXIT_PARAMETER,
    }
}

pub fn execute(cli: Cli) -> u8 {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_PARAMETER;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return EXIT_INTERNAL;
        }
    }
    let cache = cli.cache.as_ref().map(ResultCache::open);
    if let Some(w) = cache.as_ref().and_then(ResultCache::warning) {
        eprintln!("warning: {w}");
    }
    let mut ctx = Ctx { cache };
    let (outcome, default_format) = match dispatch(cli.command, &mut ctx) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = match render(&outcome.doc, cli.format.unwrap_or(default_format)) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INTERNAL;
        }
    };
    if let Err(e) = print(&text) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_INTERNAL;
    }
    if outcome.partial {
        eprintln!("budget exhausted; partial result written");
        EXIT_BUDGET
    } else {
        EXIT_OK
    }
}
