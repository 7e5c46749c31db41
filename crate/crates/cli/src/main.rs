use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use assortment_cli::commands::{cmd_reproduce_fig1, cmd_run};
use assortment_cli::config::{Overrides, RunConfig};
use assortment_cli::selftest::cmd_selftest;
use assortment_cli::CliResult;

/// Regret experiments for dynamic assortment optimization with outlier
/// customers: an active-elimination policy, its unknown-contamination
/// adaptive variant, and UCB/Thompson-sampling baselines.
#[derive(Parser)]
#[command(name = "assortment", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write trace/aggregate CSVs.
    Run(RunArgs),
    /// Run the benchmark comparison grid for a preset instance family.
    ReproduceFig1(Fig1Args),
    /// Optimizer-vs-oracle sweep plus the invariant suite.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML, flat keys). Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single policy: active_elim, adaptive, ucb, ts or oracle.
    #[arg(long)]
    policy: Option<String>,
    /// True outlier proportion.
    #[arg(long)]
    eps: Option<f64>,
    /// Assumed outlier proportion for the elimination policy.
    #[arg(long)]
    eps_bar: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the trial pool (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit every period instead of the 50-point grid.
    #[arg(long)]
    full_trace: bool,
    /// Scale on the theoretical initial epoch length.
    #[arg(long)]
    explore_scale: Option<f64>,
    /// Confidence-radius multiplier for the UCB baseline.
    #[arg(long)]
    ucb_c1: Option<f64>,
}

#[derive(Args)]
struct Fig1Args {
    /// Instance family: N100K10, N100K20, N300K10 or N300K20.
    #[arg(long)]
    preset: String,
    /// Outlier proportion: 0, 0.05 or 0.1.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Independent trials per (policy, horizon) point.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => {
            let overrides = Overrides {
                policy: args.policy,
                eps: args.eps,
                eps_bar: args.eps_bar,
                explore_scale: args.explore_scale,
                ucb_c1: args.ucb_c1,
                n: args.n,
                k: args.k,
                t: args.t,
                trials: args.trials,
                seed: args.seed,
                full_trace: args.full_trace,
            };
            let config = match &args.config {
                Some(path) => {
                    let mut config = RunConfig::from_path(path)?;
                    config.apply(&overrides);
                    config
                }
                None => RunConfig::from_overrides(&overrides)?,
            };
            let out_dir = args.out.unwrap_or_else(|| PathBuf::from("out"));
            let manifest = cmd_run(&config, &out_dir, args.jobs)?;
            println!(
                "wrote {} outputs to {} in {:.1}s",
                manifest.outputs.len(),
                out_dir.display(),
                manifest.elapsed_seconds
            );
            Ok(())
        }
        Command::ReproduceFig1(args) => {
            let out_dir = args.out.unwrap_or_else(|| PathBuf::from("out"));
            let path = cmd_reproduce_fig1(
                &args.preset,
                args.eps,
                args.trials,
                args.seed,
                args.jobs,
                &out_dir,
            )?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Selftest => cmd_selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
