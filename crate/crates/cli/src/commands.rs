//! The `run` and `reproduce-fig1` commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use assortment_core::simulator::{
    run_trials, trace_grid, write_aggregate_csv, write_trace_csv, TrialsResult,
};

use crate::config::RunConfig;
use crate::manifest::RunManifest;
use crate::{CliError, CliResult};

/// Builds the worker pool for a run. `jobs = None` uses all cores; output
/// bytes do not depend on the choice.
fn pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(format!("worker pool: {e}")))
}

/// Executes every configured policy and writes per-policy trace CSVs, the
/// combined aggregate CSV and the manifest into `out_dir`.
pub fn cmd_run(config: &RunConfig, out_dir: &Path, jobs: Option<usize>) -> CliResult<RunManifest> {
    config.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let mut manifest = RunManifest::new(config.clone());

    let pool = pool(jobs)?;
    let mut results: Vec<TrialsResult> = Vec::with_capacity(config.policies.len());
    for policy in &config.policies {
        let experiment = config.experiment_for(policy)?;
        let result = pool.install(|| run_trials(&experiment))?;
        results.push(result);
    }

    let grid = trace_grid(config.t, config.full_trace);
    for result in &results {
        let name = format!("trace_{}.csv", result.policy);
        let mut file = BufWriter::new(File::create(out_dir.join(&name))?);
        write_trace_csv(&mut file, result, &grid)?;
        file.flush()?;
        manifest.outputs.insert(format!("trace:{}", result.policy), name);
    }

    let refs: Vec<&TrialsResult> = results.iter().collect();
    let mut agg = BufWriter::new(File::create(out_dir.join("aggregate.csv"))?);
    write_aggregate_csv(&mut agg, &refs)?;
    agg.flush()?;
    manifest
        .outputs
        .insert("aggregate".into(), "aggregate.csv".into());

    manifest.elapsed_seconds = started.elapsed().as_secs_f64();
    manifest.write(out_dir)?;
    Ok(manifest)
}

/// The benchmark presets: instance family sizes from the comparison study.
pub const FIG1_PRESETS: [(&str, usize, usize); 4] = [
    ("N100K10", 100, 10),
    ("N100K20", 100, 20),
    ("N300K10", 300, 10),
    ("N300K20", 300, 20),
];

pub const FIG1_HORIZONS: [usize; 5] = [1_000, 2_000, 5_000, 10_000, 20_000];
pub const FIG1_POLICIES: [&str; 4] = ["active_elim", "adaptive", "ucb", "ts"];

pub fn parse_preset(name: &str) -> CliResult<(usize, usize)> {
    FIG1_PRESETS
        .iter()
        .find(|(p, _, _)| *p == name)
        .map(|&(_, n, k)| (n, k))
        .ok_or_else(|| {
            let names: Vec<&str> = FIG1_PRESETS.iter().map(|(p, _, _)| *p).collect();
            CliError::Usage(format!(
                "unknown preset \"{name}\" (expected one of {names:?})"
            ))
        })
}

/// Runs the four policies over the horizon grid for one preset and writes
/// plot-ready per-horizon aggregates:
/// `policy,horizon,t,mean_avg_regret,sd_avg_regret,trials`.
pub fn cmd_reproduce_fig1(
    preset: &str,
    eps: f64,
    trials: usize,
    seed: u64,
    jobs: Option<usize>,
    out_dir: &Path,
) -> CliResult<PathBuf> {
    let (n, k) = parse_preset(preset)?;
    if ![0.0, 0.05, 0.1].contains(&eps) {
        return Err(CliError::Usage(format!(
            "eps {eps} not in the studied grid {{0, 0.05, 0.1}}"
        )));
    }
    if trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let pool = pool(jobs)?;
    let started = Instant::now();

    let file_name = format!("fig1_{preset}_eps{:03}.csv", (eps * 100.0).round() as u32);
    let path = out_dir.join(&file_name);
    let mut out = BufWriter::new(File::create(&path)?);
    writeln!(out, "policy,horizon,t,mean_avg_regret,sd_avg_regret,trials")?;

    for policy in FIG1_POLICIES {
        for horizon in FIG1_HORIZONS {
            let config = RunConfig {
                n,
                k,
                t: horizon,
                eps,
                eps_bar: Some(eps),
                explore_scale: None,
                ucb_c1: None,
                policies: vec![policy.to_string()],
                adversary: "front_loaded".into(),
                trials,
                seed,
                full_trace: false,
                checkpoints: None,
            };
            let experiment = config.experiment_for(policy)?;
            let result = pool.install(|| run_trials(&experiment))?;
            for row in &result.aggregates {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    result.policy, horizon, row.t, row.mean_avg_regret, row.sd_avg_regret, row.trials
                )?;
            }
            eprintln!(
                "fig1 {preset} eps={eps}: {policy} T={horizon} done ({:.0}s elapsed)",
                started.elapsed().as_secs_f64()
            );
        }
    }
    out.flush()?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names() {
        assert_eq!(parse_preset("N100K10").unwrap(), (100, 10));
        assert_eq!(parse_preset("N300K20").unwrap(), (300, 20));
        assert_eq!(parse_preset("N42K7").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn fig1_rejects_off_grid_eps() {
        let dir = tempfile::tempdir().unwrap();
        let err = cmd_reproduce_fig1("N100K10", 0.2, 1, 0, Some(1), dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
