mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{parse_duration_flag, ConfigFile};

/// Bounded-memory stream analytics: approximate OLAP densities, dynamic
/// community detection over edge streams, and stream correlation.
#[derive(Parser, Debug)]
#[command(name = "streamint", version)]
struct Cli {
    /// Root seed; every run is reproducible from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random graph and its edge stream.
    Generate(GenerateFlags),
    /// Exact and reservoir-estimated density of a dimension.
    Olap(OlapFlags),
    /// Dynamic community detection over an edge stream or a tweet file.
    Detect(DetectFlags),
    /// Correlate finished detection runs.
    Integrate(IntegrateFlags),
    /// Run a named experiment and report pass/fail.
    Experiment(ExperimentFlags),
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateFlags {
    /// gnp | pa | ddelta | ddelta2
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability for gnp.
    #[arg(long)]
    pub p: Option<f64>,
    /// Links per arriving node for pa.
    #[arg(long)]
    pub m: Option<usize>,
    /// Degree counts, e.g. 4,3,2 (four nodes of degree 1, ...).
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<u64>>,
    /// Target edge count of the power-law degree distribution when no --delta is given.
    #[arg(long)]
    pub edges: Option<u64>,
    /// Number of copies for ddelta2.
    #[arg(long)]
    pub communities: Option<usize>,
    #[arg(long)]
    pub bridge_fraction: Option<f64>,
    /// Concentrate the ddelta core.
    #[arg(long)]
    pub concentrated: Option<bool>,
    /// Event-time span of the emitted stream, e.g. 4h. Defaults to one edge per second.
    #[arg(long, value_parser = parse_duration_flag)]
    pub span: Option<i64>,
    #[arg(long)]
    pub start: Option<i64>,
}

#[derive(Args, Debug, Serialize)]
pub struct OlapFlags {
    /// Delimited file with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Dimension column; several comma-separated columns form a composite dimension.
    #[arg(long)]
    pub dimension: Option<String>,
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    /// Reservoir size; computed from --epsilon/--delta when absent.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Dimension cardinality for sizing k without an input file.
    #[arg(long)]
    pub cardinality: Option<usize>,
    /// Selection `column=value`, repeatable.
    #[arg(long = "select")]
    pub selection: Vec<String>,
    /// reject | other
    #[arg(long)]
    pub unknown: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct DetectFlags {
    /// Edge file: `src,dst,timestamp` lines or JSON lines.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Tweet file (JSON lines with sender, tags, timestamp) instead of an edge file.
    #[arg(long)]
    pub tweets: Option<PathBuf>,
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long, value_parser = parse_duration_flag)]
    pub tau: Option<i64>,
    #[arg(long, value_parser = parse_duration_flag)]
    pub window: Option<i64>,
    /// exact | compat
    #[arg(long)]
    pub window_mode: Option<String>,
    /// reject | clamp
    #[arg(long)]
    pub late: Option<String>,
    /// Tag whose edges are dropped, repeatable.
    #[arg(long = "exclude-tag")]
    pub exclude_tags: Vec<String>,
    #[arg(long)]
    pub from: Option<String>,
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct IntegrateFlags {
    /// Detection output directories.
    pub inputs: Vec<PathBuf>,
    /// Labels for the matrix, comma-separated; default s0, s1, ...
    #[arg(long, value_delimiter = ',')]
    pub labels: Option<Vec<String>>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExperimentFlags {
    /// lemma1 | theorem1 | theorem2 | bookkeeping | split-reservoir | stability | integrate-planted
    pub name: String,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub edges_per_community: Option<u64>,
    /// Edge file for split-reservoir and stability; defaults to a synthetic tweet session.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long)]
    pub c: Option<usize>,
    #[arg(long, value_parser = parse_duration_flag)]
    pub tau: Option<i64>,
    #[arg(long, value_parser = parse_duration_flag)]
    pub window: Option<i64>,
    /// Tolerance for integrate-planted.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// integrate-planted: both streams carry the same shared-block edges.
    #[arg(long)]
    pub shared_graph: Option<bool>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ConfigFile::load(cli.config.as_deref()).and_then(|file| {
        let seed = cli.seed.or(file.seed()?).unwrap_or(streamint::RngSeed::default().0);
        let ctx = commands::Context {
            seed: streamint::RngSeed(seed),
            out: cli.out.clone(),
            file,
        };
        match &cli.command {
            Command::Generate(f) => commands::generate(&ctx, f),
            Command::Olap(f) => commands::olap(&ctx, f),
            Command::Detect(f) => commands::detect(&ctx, f),
            Command::Integrate(f) => commands::integrate(&ctx, f),
            Command::Experiment(f) => commands::experiment(&ctx, f),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("streamint: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
