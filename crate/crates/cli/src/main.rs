//! `chainlab`: command-line front end for the chain-coloring library.

mod emit;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chainlab_core::copies::DEFAULT_NODE_BUDGET;
use chainlab_core::search::DEFAULT_SEARCH_BUDGET;

#[derive(Parser, Debug)]
#[command(name = "chainlab", version, about = "Exact and randomized t-chain coloring computations on Boolean lattices")]
pub struct Cli {
    /// Output format; defaults to csv for `bounds table` and json elsewhere.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// JSON result cache shared across invocations.
    #[arg(long, global = true, value_name = "FILE")]
    pub cache: Option<PathBuf>,

    /// Worker threads. Never changes any output.
    #[arg(long, global = true, env = "CHAINLAB_THREADS", value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Strong,
    Weak,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number of t-chains of B_n, optionally inside the middle M ranks.
    CountChains {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, value_name = "M")]
        window: Option<usize>,
    },
    /// Embeddings and induced copies of B_p in B_n.
    CountCopies {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "strong")]
        mode: Mode,
        /// Also report how many copies contain each t-chain.
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Least number of colors such that every copy of B_p sees q colors.
    ExactF {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, value_enum, default_value = "strong")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Least n forcing a monochromatic copy of the target under k colors.
    Ramsey {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: usize,
        #[arg(long, conflicts_with = "poset", required_unless_present = "poset")]
        p: Option<usize>,
        /// Poset file: element count, then one `i j` cover pair per line.
        #[arg(long, value_name = "FILE")]
        poset: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Most t-chains in a B_m-free family or chain set of B_n.
    Extremal {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, value_parser = ["family", "chainset"])]
        object: String,
        #[arg(long, value_enum, default_value = "weak")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Local-lemma color count and a Moser–Tardos coloring.
    Lll {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n: usize,
        /// Colors to use; defaults to the certified count.
        #[arg(long = "K", value_name = "K")]
        k: Option<u32>,
        /// Generated and recorded when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        max_resamples: u64,
        #[arg(long, value_parser = ["paper-bound", "exact-prob"], default_value = "paper-bound")]
        threshold: String,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Evaluate a named bound, or sweep bounds into a table.
    Bounds(BoundsArgs),
    /// Middle-rank family and disjoint block copies of B_m in B_n.
    Constructions {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Args, Debug)]
#[command(args_conflicts_with_subcommands = true)]
pub struct BoundsArgs {
    #[command(subcommand)]
    pub table: Option<BoundsCommand>,

    #[arg(long)]
    pub name: Option<String>,

    /// Comma-separated `key=value` integers, e.g. `p=2,t=2,k=3`.
    #[arg(long, default_value = "")]
    pub params: String,

    /// Target poset for `r_lower_general`.
    #[arg(long, value_name = "FILE")]
    pub poset: Option<PathBuf>,

    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
}

#[derive(Subcommand, Debug)]
pub enum BoundsCommand {
    /// One row per bound evaluation over parameter ranges.
    Table {
        /// `NAME:key=lo..hi,key=v`; repeatable.
        #[arg(long, required = true)]
        sweep: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(run::execute(cli))
}
