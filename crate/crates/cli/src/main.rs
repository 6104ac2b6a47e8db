//! Command-line front end: campaigns, sweeps, adaptation tables, flip
//! matrices, convergence reports and code summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ngdbf::analysis::{gdbf_flip_matrix, lml_flip_matrix, pe_initial, LmlParams, TailMode};
use ngdbf::harness::{run_campaign, run_convergence, run_sweep, sweep_to_csv, CampaignConfig};
use ngdbf::ngdbf::build_adaptation_table;
use ngdbf::strategy::{DecoderSpec, Parameter};
use ngdbf::{ParityCheckCode, QuantizerSpec};

#[derive(Debug, Parser)]
#[command(
    name = "ngdbf",
    version,
    about = "Bit-flipping LDPC decoder laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign described by a JSON config.
    Simulate(SimulateArgs),
    /// Run one campaign per value of a decoder parameter.
    Sweep(SweepArgs),
    /// Print a flip/keep decision matrix as CSV and as a grid.
    FlipMatrix(FlipMatrixArgs),
    /// Print the quantized threshold adaptation events as CSV.
    AdaptTable(AdaptTableArgs),
    /// Report the average convergence error of several decoders.
    Convergence(ConvergenceArgs),
    /// Print the size, rate and degree histograms of a code.
    CodeInfo(CodeInfoArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Campaign config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; replaces the seed in the config.
    #[arg(long)]
    seed: u64,
    /// Output file; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweptParameter {
    Theta,
    Lambda,
    Eta,
}

impl From<SweptParameter> for Parameter {
    fn from(p: SweptParameter) -> Self {
        match p {
            SweptParameter::Theta => Parameter::Theta,
            SweptParameter::Lambda => Parameter::Lambda,
            SweptParameter::Eta => Parameter::Eta,
        }
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Parameter to sweep.
    #[arg(long)]
    param: SweptParameter,
    /// Comma-separated grid of values.
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MatrixMode {
    /// Locally maximum-likelihood decisions.
    Lml,
    /// Weighted GDBF threshold decisions.
    Gdbf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Tails {
    Saturated,
    Truncated,
}

#[derive(Debug, Args)]
struct FlipMatrixArgs {
    #[arg(long)]
    mode: MatrixMode,
    /// Quantizer precision in bits.
    #[arg(long)]
    q: u32,
    /// Quantizer saturation magnitude.
    #[arg(long)]
    ymax: f64,
    /// Symbol degree.
    #[arg(long)]
    dv: usize,
    /// Channel noise standard deviation (lml).
    #[arg(long)]
    sigma: Option<f64>,
    /// Check degree (lml).
    #[arg(long)]
    dc: Option<usize>,
    /// Bit error probability; defaults to the uncoded error rate at `sigma` (lml).
    #[arg(long)]
    pe: Option<f64>,
    /// Outer quantizer bins absorb the Gaussian tails, or not (lml).
    #[arg(long, value_enum, default_value = "saturated")]
    tails: Tails,
    /// Flip threshold (gdbf).
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Syndrome weight (gdbf).
    #[arg(long, default_value_t = 0.75)]
    w: f64,
}

#[derive(Debug, Args)]
struct AdaptTableArgs {
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long)]
    lambda: f64,
    /// Quantizer precision in bits.
    #[arg(long)]
    q: u32,
    /// Quantizer saturation magnitude.
    #[arg(long)]
    ymax: f64,
    /// Iteration limit; counters range over `0..=t`.
    #[arg(long)]
    t: u32,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    /// JSON array of decoder specs.
    #[arg(long)]
    decoders: PathBuf,
    /// Alist file; defaults to the bundled 504x1008 code.
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    ebn0: f64,
    #[arg(long, default_value_t = 100)]
    frames: u64,
    #[arg(long)]
    seed: u64,
    /// Saturation magnitude of the floating-point decoders.
    #[arg(long, default_value_t = 2.5)]
    ymax: f64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CodeInfoArgs {
    /// Alist file; defaults to the bundled 504x1008 code.
    #[arg(long)]
    code: Option<PathBuf>,
}

fn load_code(path: Option<&Path>) -> Result<ParityCheckCode> {
    match path {
        Some(p) => ParityCheckCode::from_alist_file(p)
            .with_context(|| format!("cannot load code `{}`", p.display())),
        None => Ok(ParityCheckCode::peg_504x1008()),
    }
}

/// Resolves `path` against the directory holding the config file.
fn relative_to(config: &Path, path: &Path) -> PathBuf {
    match config.parent() {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Reads and validates a campaign config and loads its code.
fn load_campaign(run: &RunArgs) -> Result<(CampaignConfig, ParityCheckCode)> {
    let text = fs::read_to_string(&run.config)
        .with_context(|| format!("cannot read config `{}`", run.config.display()))?;
    let mut config: CampaignConfig = serde_json::from_str(&text)
        .with_context(|| format!("invalid config `{}`", run.config.display()))?;
    config.seed = run.seed;
    config
        .validate()
        .with_context(|| format!("invalid config `{}`", run.config.display()))?;
    let code_path = config.code.as_deref().map(|p| relative_to(&run.config, p));
    let code = load_code(code_path.as_deref())?;
    Ok((config, code))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write `{}`", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn output_path(run: &RunArgs, config: &CampaignConfig) -> Option<PathBuf> {
    run.out.clone().or_else(|| {
        config
            .output
            .as_deref()
            .map(|p| relative_to(&run.config, p))
    })
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let (config, code) = load_campaign(&args.run)?;
    let stats = run_campaign(&code, &config, args.run.workers)?;
    let text = if args.run.json {
        serde_json::to_string_pretty(&stats)? + "\n"
    } else {
        stats.to_csv()
    };
    emit(output_path(&args.run, &config).as_deref(), &text)
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let (config, code) = load_campaign(&args.run)?;
    let parameter = Parameter::from(args.param);
    let results = run_sweep(&code, &config, parameter, &args.values, args.run.workers)?;
    let text = if args.run.json {
        let doc: Vec<serde_json::Value> = results
            .iter()
            .map(|(value, stats)| serde_json::json!({ "parameter": parameter.name(), "value": value, "stats": stats }))
            .collect();
        serde_json::to_string_pretty(&doc)? + "\n"
    } else {
        sweep_to_csv(parameter, &results)
    };
    emit(output_path(&args.run, &config).as_deref(), &text)
}

fn flip_matrix(args: &FlipMatrixArgs) -> Result<()> {
    let quantizer = QuantizerSpec::new(args.q, args.ymax)?;
    let matrix = match args.mode {
        MatrixMode::Lml => {
            let Some(sigma) = args.sigma else {
                bail!("--mode lml requires --sigma");
            };
            let Some(dc) = args.dc else {
                bail!("--mode lml requires --dc");
            };
            let params = LmlParams {
                sigma,
                quantizer,
                dv: args.dv,
                dc,
                pe: args.pe.unwrap_or_else(|| pe_initial(sigma)),
                tails: match args.tails {
                    Tails::Saturated => TailMode::Saturated,
                    Tails::Truncated => TailMode::Truncated,
                },
            };
            lml_flip_matrix(&params)?
        }
        MatrixMode::Gdbf => {
            let Some(theta) = args.theta else {
                bail!("--mode gdbf requires --theta");
            };
            gdbf_flip_matrix(theta, args.w, &quantizer, args.dv)
        }
    };
    print!("{}\n{matrix}", matrix.to_csv());
    Ok(())
}

fn adapt_table(args: &AdaptTableArgs) -> Result<()> {
    let quantizer = QuantizerSpec::new(args.q, args.ymax)?;
    let table = build_adaptation_table(args.theta, args.lambda, &quantizer, args.t)?;
    print!("{}", table.to_csv());
    Ok(())
}

fn convergence(args: &ConvergenceArgs) -> Result<()> {
    let text = fs::read_to_string(&args.decoders)
        .with_context(|| format!("cannot read decoder list `{}`", args.decoders.display()))?;
    let decoders: Vec<DecoderSpec> = serde_json::from_str(&text)
        .with_context(|| format!("invalid decoder list `{}`", args.decoders.display()))?;
    if decoders.is_empty() {
        bail!("decoder list `{}` is empty", args.decoders.display());
    }
    let code = load_code(args.code.as_deref())?;
    let reports = run_convergence(
        &code,
        &decoders,
        args.ebn0,
        args.frames,
        args.seed,
        args.ymax,
        args.workers,
    )?;
    let mut out = String::from("decoder,frames,epsilon,frame_errors\n");
    for r in &reports {
        writeln!(
            out,
            "{},{},{},{}",
            r.decoder.name(),
            r.frames,
            r.epsilon,
            r.frame_errors
        )?;
    }
    emit(args.out.as_deref(), &out)
}

fn code_info(args: &CodeInfoArgs) -> Result<()> {
    let code = load_code(args.code.as_deref())?;
    let mut out = String::new();
    writeln!(out, "n = {}", code.n())?;
    writeln!(out, "m = {}", code.m())?;
    writeln!(out, "rate = {} ({:.6})", code.rate(), code.rate_f64())?;
    writeln!(out, "column degrees (degree: count):")?;
    for (d, c) in code.column_degree_histogram() {
        writeln!(out, "  {d}: {c}")?;
    }
    writeln!(out, "row degrees (degree: count):")?;
    for (d, c) in code.row_degree_histogram() {
        writeln!(out, "  {d}: {c}")?;
    }
    print!("{out}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::FlipMatrix(a) => flip_matrix(a),
        Command::AdaptTable(a) => adapt_table(a),
        Command::Convergence(a) => convergence(a),
        Command::CodeInfo(a) => code_info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
