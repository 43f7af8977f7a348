//! `binquant` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 numerical non-convergence. Summaries are printed to stdout as JSON;
//! data artifacts go to the files named by flags.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use binquant::quantizers::Method;
use binquant::tensor::Distribution;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "binquant", version, about = "Scaled binary quantization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quantize a tensor file and write the packed result.
    Quantize(QuantizeArgs),
    /// Sweep quantizers over synthetic distributions.
    Analyze(AnalyzeArgs),
    /// Sample the conditional-mean curves and their fixed points.
    Curve(CurveArgs),
    /// Singular energy profile of |X| and rank-1 residuals.
    Energy(EnergyArgs),
    /// Compare the packed GEMM with a float reference.
    GemmCheck(GemmCheckArgs),
    /// Time the packed dot product against a float dot product.
    Bench(BenchArgs),
    /// Generate a synthetic tensor.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct QuantizeArgs {
    /// Input tensor (.fqt or .csv); matrices are flattened row-major.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Bit count; defaults to 1 for ls1, 2 otherwise.
    #[arg(long)]
    bits: Option<usize>,
    /// BQT1 output. For lloyd the codebook is written as an FQT vector instead.
    #[arg(long)]
    out: PathBuf,
    /// Optional reconstruction (.fqt or .csv).
    #[arg(long)]
    recon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Entries `dist:n` separated by `;` or newlines, or a file holding them.
    #[arg(long)]
    spec: String,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "ls1,ls2,ternary,greedy,lloyd")]
    methods: Vec<Method>,
    /// Comma-separated bit counts for greedy and lloyd.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    bits: Vec<usize>,
    /// Number of seeds per entry; seeds run from `seed_base`.
    #[arg(long, default_value_t = 8)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
    format: String,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Analytic mode; only `normal` is supported.
    #[arg(long, value_parser = ["normal"], required_unless_present = "input", conflicts_with = "input")]
    dist: Option<String>,
    /// Empirical mode on a tensor file.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Upper end of the analytic grid.
    #[arg(long, default_value_t = binquant::analysis::ANALYTIC_NORMAL_MAX)]
    max: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EnergyArgs {
    /// Matrix FQT file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of singular energies; defaults to min(10, rows, cols).
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

#[derive(Debug, Args)]
struct GemmCheckArgs {
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    p: usize,
    #[arg(long, default_value_t = 2)]
    ka: usize,
    #[arg(long, default_value_t = 2)]
    kw: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Vector length, a multiple of 64.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    ka: usize,
    #[arg(long, default_value_t = 2)]
    kw: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_distribution)]
    dist: Distribution,
    #[arg(long, required_unless_present = "shape", conflicts_with = "shape")]
    n: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"])]
    shape: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: binquant::Error| e.to_string())
}

fn parse_distribution(s: &str) -> Result<Distribution, String> {
    s.parse().map_err(|e: binquant::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Quantize(a) => commands::quantize(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Curve(a) => commands::curve(a),
        Command::Energy(a) => commands::energy(a),
        Command::GemmCheck(a) => commands::gemm_check(a),
        Command::Bench(a) => commands::bench(a),
        Command::Gen(a) => commands::gen(a),
    };
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
