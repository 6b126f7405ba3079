//! Command-line front end: pipeline runs, sweep drivers, statistical
//! testing and analytic predictions, with reproducibility manifests next
//! to every output.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Parse a bit count that may be written in scientific notation (1e8).
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if f < 1.0 || f > 2f64.powi(62) || f.fract() != 0.0 {
        return Err(format!("{s} is not a positive integer count"));
    }
    Ok(f as u64)
}

#[derive(Parser)]
#[command(
    name = "rffsim",
    version,
    about = "Random flip-flop QRNG simulator and test bench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Pipeline knobs shared by the simulation commands. Rates are Hz, times
/// are seconds, counts are bits; all numeric inputs accept scientific
/// notation. Values omitted on the command line fall back to the
/// `--config` file (flat `key = value` lines) and then to the defaults.
#[derive(Args, Debug, Clone, Default)]
struct PipelineArgs {
    /// Flat key = value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mean detection rate per stage (events/s).
    #[arg(long)]
    f_det: Option<f64>,
    /// Sampling clock frequency (Hz).
    #[arg(long)]
    f_bit: Option<f64>,
    /// Detector dead time (s).
    #[arg(long)]
    dead_time: Option<f64>,
    /// Sampler input threshold as a fraction of the voltage swing.
    #[arg(long)]
    eta: Option<f64>,
    /// Output rise time (s).
    #[arg(long)]
    t_rise: Option<f64>,
    /// Output fall time (s).
    #[arg(long)]
    t_fall: Option<f64>,
    /// Number of XOR-combined stages.
    #[arg(long)]
    stages: Option<usize>,
    /// Bits to generate.
    #[arg(long, value_parser = parse_count)]
    n_bits: Option<u64>,
    /// Base seed; stage and sweep-point seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// First clock edge offset (s); omitted = drawn from the seed.
    #[arg(long)]
    phase: Option<f64>,
    /// Worker threads for sweep points and test blocks (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output bitstream path; sidecar and manifest are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Comma-separated detection rates (Hz) forming the grid.
    #[arg(long = "f-det-grid", value_delimiter = ',')]
    f_det_grid: Option<Vec<f64>>,
    /// Comma-separated bit rates (Hz) forming the grid.
    #[arg(long = "f-bit-grid", value_delimiter = ',')]
    f_bit_grid: Option<Vec<f64>>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepAutocorrArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Largest lag to report.
    #[arg(long, default_value_t = 4)]
    k_max: u64,
}

#[derive(Args, Debug)]
struct TestArgs {
    /// Packed bitstream with its JSON sidecar.
    bitstream: PathBuf,
    /// Block size in bits.
    #[arg(long, value_parser = parse_count, default_value = "1000000")]
    block_size: u64,
    /// Approximate-entropy block lengths to run.
    #[arg(long, value_delimiter = ',', default_value = "3,10")]
    apen_m: Vec<u32>,
    /// Subset of tests: frequency,runs,fft,universal,apen (default all).
    #[arg(long)]
    tests: Option<String>,
    /// Worker threads for test blocks (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output prefix for the per-test JSON reports and CDF CSVs.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Packed bitstream with its JSON sidecar.
    bitstream: PathBuf,
    /// Largest autocorrelation lag.
    #[arg(long, default_value_t = 4)]
    k_max: u64,
    /// Comma-separated n-gram lengths for the entropy estimates.
    #[arg(long, value_delimiter = ',', default_value = "1,3,10")]
    entropy_l: Vec<u32>,
    /// Output JSON path; omitted = print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output JSON path; omitted = print to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the generator and write the packed bitstream.
    Generate(GenerateArgs),
    /// Measured vs predicted bias over an (f_bit, f_det) grid.
    SweepBias(SweepArgs),
    /// Autocorrelation coefficients over an (f_bit, f_det) grid.
    SweepAutocorr(SweepAutocorrArgs),
    /// Run the statistical test battery on a bitstream file.
    Test(TestArgs),
    /// Empirical bias, autocorrelation and entropy of a bitstream file.
    Analyze(AnalyzeArgs),
    /// Closed-form bias/autocorrelation predictions.
    Predict(PredictArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::SweepBias(a) => commands::sweep_bias(a),
        Command::SweepAutocorr(a) => commands::sweep_autocorr(a),
        Command::Test(a) => commands::test(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Predict(a) => commands::predict(a),
    };
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
