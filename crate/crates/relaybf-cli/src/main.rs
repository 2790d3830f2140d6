//! `relaybf` — seeded Monte-Carlo benchmark harness for relay beamforming
//! schemes.
//!
//! Subcommands select the experiment mode; flags override values from an
//! optional `--config` file. Results go to a versioned CSV (`--out`) plus a
//! mean-value summary on stdout; `trace` emits per-iteration convergence
//! CSVs instead. Identical `(config, seed)` produce byte-identical CSVs.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{Mode, RunConfig, UtilityKind};

#[derive(Parser)]
#[command(
    name = "relaybf",
    about = "Monte-Carlo benchmarks for multiuser two-way relay beamforming",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Max-min SINR balancing against baseline schemes.
    Maxmin(CommonArgs),
    /// Relay power minimization under SINR targets.
    Powermin(CommonArgs),
    /// Weighted sum-rate maximization.
    Wsr(CommonArgs),
    /// General monotone utility maximization (--utility picks the kind).
    Utility(CommonArgs),
    /// Collaborative single-antenna relays with per-relay power budgets.
    Collab(CommonArgs),
    /// Multi-antenna users under alternating optimization.
    Mimo(CommonArgs),
    /// Combined max-min and utility sweep over the SNR grid.
    Sweep(CommonArgs),
    /// Per-iteration convergence traces for the configured mode.
    Trace(TraceArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Number of user pairs K.
    #[arg(long)]
    pairs: Option<usize>,
    /// Relay antennas M (collab: number of single-antenna relays).
    #[arg(long)]
    antennas: Option<usize>,
    /// Comma-separated per-user antenna counts (mimo mode).
    #[arg(long, value_delimiter = ',')]
    user_antennas: Option<Vec<usize>>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,
    /// Monte-Carlo trials per SNR point.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; everything else derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Accuracy level for polyblock / alternating optimization.
    #[arg(long)]
    eps: Option<f64>,
    /// Stop tolerance of the Dinkelbach iteration.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated per-user utility weights.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Comma-separated per-user SINR targets.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<f64>>,
    /// Comma-separated scheme names to run (default: all for the mode).
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Utility kind: wsr | mse | ser-qpsk | ser-bpsk.
    #[arg(long)]
    utility: Option<String>,
    /// Output CSV path (default results.csv).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit the convergence-trace CSV to this path.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Flat key-value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// Mode whose convergence trace to record.
    #[arg(long, default_value = "maxmin")]
    mode: String,
    #[command(flatten)]
    common: CommonArgs,
}

impl CommonArgs {
    fn into_config(self, mode: Mode) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            mode,
            ..RunConfig::default()
        };
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
            cfg.mode = mode;
        }
        if let Some(v) = self.pairs {
            cfg.pairs = v;
        }
        if let Some(v) = self.antennas {
            cfg.antennas = v;
        }
        if let Some(v) = self.user_antennas {
            cfg.user_antennas = v;
        }
        if let Some(v) = self.snr_db {
            cfg.snr_db = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.eps {
            cfg.eps = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.weights {
            cfg.weights = v;
        }
        if let Some(v) = self.targets {
            cfg.targets = v;
        }
        if let Some(v) = self.schemes {
            cfg.schemes = v;
        }
        if let Some(v) = &self.utility {
            cfg.utility = UtilityKind::parse(v)?;
        }
        if let Some(v) = self.out {
            cfg.out = Some(v);
        }
        if let Some(v) = self.trace_out {
            cfg.trace_out = Some(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run_mode(args: CommonArgs, mode: Mode) -> Result<()> {
    let cfg = args.into_config(mode)?;
    let records = runner::run(&cfg)?;
    let csv = runner::to_csv(&records);
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    runner::write_output(&out, &csv)?;
    if let Some(trace_path) = &cfg.trace_out {
        let trace = runner::convergence_trace(&cfg)?;
        runner::write_output(trace_path, &trace)?;
    }
    print!("{}", runner::summarize(&records));
    println!("wrote {} records to {}", records.len(), out.display());
    Ok(())
}

fn run_trace(args: TraceArgs) -> Result<()> {
    let mode = Mode::parse(&args.mode)?;
    let cfg = args.common.into_config(mode)?;
    let trace = runner::convergence_trace(&cfg)?;
    match &cfg.trace_out {
        Some(path) => {
            runner::write_output(path, &trace)?;
            println!("wrote trace to {}", path.display());
        }
        None => print!("{trace}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Maxmin(a) => run_mode(a, Mode::MaxMin),
        Command::Powermin(a) => run_mode(a, Mode::PowerMin),
        Command::Wsr(a) => run_mode(a, Mode::Wsr),
        Command::Utility(a) => run_mode(a, Mode::Utility),
        Command::Collab(a) => run_mode(a, Mode::Collab),
        Command::Mimo(a) => run_mode(a, Mode::Mimo),
        Command::Sweep(a) => run_mode(a, Mode::Sweep),
        Command::Trace(a) => run_trace(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
