//! Experiment-runner CLI: reads a flat key=value config, runs the chosen
//! experiment through the paired-run harness, and writes CSV to stdout or
//! a file. All randomness flows from `--seed` (overridden by the
//! `REPLILEARN_SEED` environment variable); no ambient entropy. Exit
//! codes: 0 success, 2 configuration error, 3 selftest threshold failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use replilearn::config::Config;
use replilearn::csvout::write_csv;
use replilearn::experiments::{run_subcommand, selftest_rows, RunOpts};

#[derive(Args, Debug)]
struct Common {
    /// Flat key=value config file; omit to run the reference configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed for every random choice in the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker thread cap (0 = machine parallelism).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Reduced trial counts for fast runs.
    #[arg(long)]
    quick: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Pointwise-replicable transform on the reference finite task.
    Pointwise(Common),
    /// Approximately replicable pipelines (const_alpha / const_gamma).
    Approx(Common),
    /// Proper replicable threshold learner.
    Threshold(Common),
    /// Realizable accept/reject gate.
    Realizable(Common),
    /// Semi-replicable learner over a shared unlabeled pool.
    Semi(Common),
    /// Robustly replicable hypothesis selection.
    Select(Common),
    /// Bias-estimation reduction through a pointwise learner.
    ReduceBias(Common),
    /// Hardness-amplification reduction over the bias meta-distribution.
    ReduceAmplify(Common),
    /// Sign-one-way marginals through a learner.
    SignOneway(Common),
    /// Cartesian parameter sweep over another subcommand.
    Grid(Common),
    /// Quick deterministic certification battery.
    Selftest(Common),
}

#[derive(Parser, Debug)]
#[command(name = "replilearn", about = "replicable-learning experiment runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

fn emit(rows: &[replilearn::csvout::Row], out: &Option<PathBuf>) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    match out {
        Some(path) => std::fs::write(path, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn run(name: &str, common: &Common) -> anyhow::Result<ExitCode> {
    let cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let seed = match std::env::var("REPLILEARN_SEED") {
        Ok(v) => v.parse().map_err(|_| anyhow::anyhow!("bad REPLILEARN_SEED `{v}`"))?,
        Err(_) => common.seed,
    };
    let opts = RunOpts { seed, workers: common.workers, quick: common.quick };
    if name == "selftest" {
        let (rows, ok) = selftest_rows(&cfg, &opts)?;
        emit(&rows, &common.out)?;
        return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(3) });
    }
    let rows = run_subcommand(name, &cfg, &opts)?;
    emit(&rows, &common.out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match &cli.cmd {
        Cmd::Pointwise(c) => ("pointwise", c),
        Cmd::Approx(c) => ("approx", c),
        Cmd::Threshold(c) => ("threshold", c),
        Cmd::Realizable(c) => ("realizable", c),
        Cmd::Semi(c) => ("semi", c),
        Cmd::Select(c) => ("select", c),
        Cmd::ReduceBias(c) => ("reduce-bias", c),
        Cmd::ReduceAmplify(c) => ("reduce-amplify", c),
        Cmd::SignOneway(c) => ("sign-oneway", c),
        Cmd::Grid(c) => ("grid", c),
        Cmd::Selftest(c) => ("selftest", c),
    };
    match run(name, common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
