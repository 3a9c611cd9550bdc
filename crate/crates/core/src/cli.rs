//! Command-line front end: `compress`, `decompress`, `eval` and `search`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ga::{default_max_dim, run_search, run_search_with_threads, GaConfig, SearchOutcome};
use crate::io::{load_input, save_output, write_history_csv, RunReport, TtArchive};
use crate::tensor::{DenseTensor, Shape};
use crate::tt::{decompose_shape, evaluate_shape, tt_reconstruct, FitnessRecord};

/// Environment variable capping the number of fitness-evaluation workers.
pub const THREADS_ENV: &str = "TTSHAPE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ttshape", version, about = "Tensor-train compression with genetic shape search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a shape (or use --shape), decompose, and write an archive.
    Compress(CompressArgs),
    /// Rebuild a tensor or PNG image from an archive.
    Decompress(DecompressArgs),
    /// Score the input's own shape and the given candidate shapes.
    Eval(EvalArgs),
    /// Run the genetic shape search only.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// PNG / binary PPM image, or a `.json` tensor.
    #[arg(long)]
    pub input: PathBuf,
    /// Resize images so the longest side has this many pixels.
    #[arg(long)]
    pub resize_longest: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SearchFlags {
    /// Relative error bound.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Order of the reshaped tensor.
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Smallest dimension size.
    #[arg(long = "min", default_value_t = 2)]
    pub min_dim: usize,
    /// Largest dimension size [default: min(|X|, 4096)].
    #[arg(long = "max")]
    pub max_dim: Option<usize>,
    #[arg(long = "gens", default_value_t = 50)]
    pub generations: usize,
    #[arg(long = "pop", default_value_t = 100)]
    pub population: usize,
    #[arg(long, default_value_t = 30)]
    pub parents: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-gene mutation probability [default: 1/order].
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    /// Keep candidate shapes at most this many times the input size.
    #[arg(long, default_value_t = 2)]
    pub max_pad_factor: u64,
    /// Search all shapes up to max^order regardless of padding.
    #[arg(long)]
    pub no_pad_cap: bool,
    /// Re-run TT-SVD for genomes seen before.
    #[arg(long)]
    pub no_cache: bool,
}

impl SearchFlags {
    pub fn config(&self, data_cardinality: usize) -> GaConfig {
        let mut cfg = GaConfig::new(
            self.order,
            self.min_dim,
            self.max_dim.unwrap_or_else(|| default_max_dim(data_cardinality)),
            self.eps,
        )
        .with_budget(self.generations, self.population, self.parents)
        .with_seed(self.seed);
        if let Some(rate) = self.mutation_rate {
            cfg.mutation_rate = rate;
        }
        cfg.max_pad_factor = (!self.no_pad_cap).then_some(self.max_pad_factor);
        cfg.cache = !self.no_cache;
        cfg
    }
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchFlags,
    /// Skip the search and decompose with this shape, e.g. `222,16,60`.
    #[arg(long)]
    pub shape: Option<Shape>,
    /// Archive path.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report path [default: <out>.report.json].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV history path [default: <out>.history.csv].
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct DecompressArgs {
    /// Archive path.
    #[arg(long)]
    pub input: PathBuf,
    /// `.png` writes an image, anything else a JSON tensor.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Candidate shape; may be repeated.
    #[arg(long, required = true)]
    pub shape: Vec<Shape>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchFlags,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

/// Worker cap from `TTSHAPE_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| Error::InvalidConfig(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::InvalidConfig(format!("{THREADS_ENV}: {e}"))),
    }
}

fn search(data: &DenseTensor, cfg: &GaConfig) -> Result<SearchOutcome> {
    match threads_from_env()? {
        Some(n) => run_search_with_threads(data, cfg, n),
        None => run_search(data, cfg),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn describe(input: &InputArgs) -> String {
    let mut s = input.input.display().to_string();
    if let Some(n) = input.resize_longest {
        s.push_str(&format!(" (resized, longest side {n})"));
    }
    s
}

fn search_report(
    input: &InputArgs,
    data: &DenseTensor,
    cfg: &GaConfig,
    outcome: &SearchOutcome,
) -> RunReport {
    let mut report = RunReport::new(
        describe(input),
        data.shape().clone(),
        cfg.eps,
        &outcome.best.fitness,
    );
    report.search = Some(cfg.clone());
    report.evaluations = Some(outcome.history.evaluations);
    report.cache_hits = Some(outcome.history.cache_hits);
    report.history = outcome.history.generations.clone();
    report
}

pub fn cmd_compress(args: &CompressArgs) -> Result<RunReport> {
    let started = Instant::now();
    let data = load_input(&args.input.input, args.input.resize_longest)?;

    let (shape, mut report) = match &args.shape {
        Some(shape) => {
            let rec = evaluate_shape(&data, shape, args.search.eps)?;
            let report = RunReport::new(describe(&args.input), data.shape().clone(), args.search.eps, &rec);
            (shape.clone(), report)
        }
        None => {
            let cfg = args.search.config(data.len());
            let outcome = search(&data, &cfg)?;
            let history_path = args
                .history
                .clone()
                .unwrap_or_else(|| sibling(&args.out, ".history.csv"));
            write_history_csv(&outcome.history.generations, history_path)?;
            let report = search_report(&args.input, &data, &cfg, &outcome);
            (outcome.best.genome, report)
        }
    };

    let (decomposition, record) = decompose_shape(&data, &shape, args.search.eps)?;
    debug_assert_eq!(record.compression_ratio, report.compression_ratio);
    let archive = TtArchive::new(
        decomposition.cores,
        data.shape().clone(),
        shape,
        args.search.eps,
    )?;
    archive.write(&args.out)?;

    if args.timing {
        report.wall_time_secs = Some(started.elapsed().as_secs_f64());
    }
    report.write(args.report.clone().unwrap_or_else(|| sibling(&args.out, ".report.json")))?;
    Ok(report)
}

/// Reconstructs the original tensor stored in an archive.
pub fn decompress_archive(archive: &TtArchive) -> Result<DenseTensor> {
    tt_reconstruct(&archive.cores).unpad(&archive.original_shape)
}

pub fn cmd_decompress(args: &DecompressArgs) -> Result<DenseTensor> {
    let archive = TtArchive::read(&args.input)?;
    let out = decompress_archive(&archive)?;
    save_output(&out, &args.out)?;
    Ok(out)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<Vec<FitnessRecord>> {
    let data = load_input(&args.input.input, args.input.resize_longest)?;
    std::iter::once(data.shape())
        .chain(&args.shape)
        .map(|shape| evaluate_shape(&data, shape, args.eps))
        .collect()
}

pub fn cmd_search(args: &SearchArgs) -> Result<RunReport> {
    let started = Instant::now();
    let data = load_input(&args.input.input, args.input.resize_longest)?;
    let cfg = args.search.config(data.len());
    let outcome = search(&data, &cfg)?;
    let mut report = search_report(&args.input, &data, &cfg, &outcome);
    if args.timing {
        report.wall_time_secs = Some(started.elapsed().as_secs_f64());
    }
    if let Some(path) = &args.history {
        write_history_csv(&outcome.history.generations, path)?;
    }
    if let Some(path) = &args.report {
        report.write(path)?;
    }
    Ok(report)
}

fn print_summary(report: &RunReport) {
    println!("best shape  {}", report.best_shape);
    println!("C           {:.6}", report.compression_ratio);
    println!("E           {:.6}", report.relative_error);
    println!("ranks       {:?}", report.ranks);
}

#[derive(Serialize)]
struct CliError<'a> {
    error: &'a str,
    message: String,
}

/// Runs a parsed command, printing results on stdout. Errors are returned
/// for the caller to report.
pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Compress(args) => {
            let report = cmd_compress(args)?;
            print_summary(&report);
            println!("archive     {}", args.out.display());
        }
        Command::Decompress(args) => {
            let out = cmd_decompress(args)?;
            println!("wrote {} with shape {}", args.out.display(), out.shape());
        }
        Command::Eval(args) => {
            let records = cmd_eval(args)?;
            if args.json {
                let text = serde_json::to_string_pretty(&records)
                    .map_err(|e| Error::UnsupportedFormat(e.to_string()))?;
                println!("{text}");
            } else {
                println!("{:<20} {:>10} {:>10}  ranks", "shape", "C", "E");
                for r in &records {
                    println!(
                        "{:<20} {:>10.6} {:>10.6}  {:?}",
                        r.shape.to_string(),
                        r.compression_ratio,
                        r.relative_error,
                        r.ranks
                    );
                }
            }
        }
        Command::Search(args) => print_summary(&cmd_search(args)?),
    }
    Ok(())
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    serde_json::to_string(&CliError {
        error: err.kind(),
        message: err.to_string(),
    })
    .expect("error serializes")
}
