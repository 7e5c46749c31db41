//! Fast self-checks runnable from a fresh checkout: the optimizer/oracle
//! equivalence sweep plus the invariant suite. Prints per-suite counts,
//! and on failure the seed that broke.

use std::time::Instant;

use assortment_core::choice::{choice_probabilities, expected_revenue, AdversarySchedule};
use assortment_core::optimizer::{
    brute_force_opt, constrained_assortment_opt, static_assortment_opt,
};
use assortment_core::policy_adaptive::sample_probs;
use assortment_core::policy_robust::{compute_width, paper_t0, RobustPolicy};
use assortment_core::simulator::{
    delta_star_diagnostic, generate_paper_instance, run_episode, run_episode_recorded, streams,
    trial_rng,
};
use assortment_core::FixedPolicy;
use rand::Rng;

use crate::{CliError, CliResult};

/// Runs every suite; Err(Selftest) on the first failure.
pub fn cmd_selftest() -> CliResult<()> {
    let started = Instant::now();
    let suites = [
        run_suite("optimizer-vs-oracle", optimizer_vs_oracle)?,
        run_suite("choice-invariants", choice_invariants)?,
        run_suite("revenue-perturbation-bound", revenue_perturbation)?,
        run_suite("width-and-grid-invariants", width_and_grid)?,
        run_suite("episode-protocol", episode_protocol)?,
        run_suite("estimation-coverage", estimation_coverage)?,
    ];
    let total: usize = suites.iter().sum();
    println!(
        "selftest: {} suites, {total} cases, all passing in {:.1}s",
        suites.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn run_suite(name: &'static str, body: fn() -> Result<usize, String>) -> CliResult<usize> {
    match body() {
        Ok(cases) => {
            println!("  {name}: {cases} cases ok");
            Ok(cases)
        }
        Err(detail) => Err(CliError::Selftest(format!("suite {name}: {detail}"))),
    }
}

fn optimizer_vs_oracle() -> Result<usize, String> {
    let mut rng = trial_rng(0x5E1F, 0);
    let mut cases = 0usize;
    for instance_idx in 0..1000 {
        let n = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=4usize.min(n));
        let revenues: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let est: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let ground: Vec<usize> = (1..=n).collect();

        let alg = static_assortment_opt(&revenues, &est, &ground, k, 1e-9)
            .map_err(|e| e.to_string())?;
        let oracle =
            brute_force_opt(&revenues, &est, &ground, k, None).map_err(|e| e.to_string())?;
        if (alg.estimated_revenue - oracle.estimated_revenue).abs() > 1e-6 {
            return Err(format!(
                "static mismatch on instance {instance_idx} (seed 0x5E1F): {} vs {}",
                alg.estimated_revenue, oracle.estimated_revenue
            ));
        }
        cases += 1;
        for must in 1..=n {
            let alg = constrained_assortment_opt(&revenues, &est, &ground, k, must, 1e-9)
                .map_err(|e| e.to_string())?;
            let oracle = brute_force_opt(&revenues, &est, &ground, k, Some(must))
                .map_err(|e| e.to_string())?;
            if (alg.estimated_revenue - oracle.estimated_revenue).abs() > 1e-6 {
                return Err(format!(
                    "constrained mismatch on instance {instance_idx}, item {must} (seed 0x5E1F): {} vs {}",
                    alg.estimated_revenue, oracle.estimated_revenue
                ));
            }
            cases += 1;
        }
    }
    Ok(cases)
}

fn choice_invariants() -> Result<usize, String> {
    let mut rng = trial_rng(0x5E1F, 1);
    for case in 0..10_000 {
        let n = rng.gen_range(1..=50);
        let revenues: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let utilities: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let size = rng.gen_range(0..=n);
        let assortment: Vec<usize> = (1..=size).collect();
        let dist =
            choice_probabilities(&assortment, &utilities).map_err(|e| e.to_string())?;
        let total: f64 = dist.probs().iter().sum();
        if (total - 1.0).abs() > 1e-12 || dist.probs().iter().any(|&p| p < 0.0) {
            return Err(format!("case {case}: normalization broke ({total})"));
        }
        let revenue =
            expected_revenue(&assortment, &revenues, &utilities).map_err(|e| e.to_string())?;
        let recombined: f64 = assortment
            .iter()
            .map(|&i| revenues[i - 1] * dist.prob_of(i))
            .sum();
        if (revenue - recombined).abs() > 1e-12 {
            return Err(format!(
                "case {case}: revenue consistency broke ({revenue} vs {recombined})"
            ));
        }
    }
    Ok(10_000)
}

fn revenue_perturbation() -> Result<usize, String> {
    let mut rng = trial_rng(0x5E1F, 2);
    for case in 0..10_000 {
        let n = rng.gen_range(1..=20);
        let size = rng.gen_range(0..=10usize.min(n));
        let assortment: Vec<usize> = (1..=size).collect();
        let revenues: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let truth: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let est: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
        let r_true =
            expected_revenue(&assortment, &revenues, &truth).map_err(|e| e.to_string())?;
        let r_est =
            expected_revenue(&assortment, &revenues, &est).map_err(|e| e.to_string())?;
        let bound = 2.0
            * assortment
                .iter()
                .map(|&i| (est[i - 1] - truth[i - 1]).abs())
                .sum::<f64>()
            / (1.0 + assortment.iter().map(|&i| truth[i - 1]).sum::<f64>());
        if (r_est - r_true).abs() > bound + 1e-12 {
            return Err(format!("case {case}: perturbation bound violated"));
        }
    }
    Ok(10_000)
}

fn width_and_grid() -> Result<usize, String> {
    let mut cases = 0usize;
    // Width monotone in the assumed contamination, and clamped to [0,1].
    for &t in &[1e3, 1e5, 1e7] {
        for &frac in &[0.01, 0.1, 0.5, 1.0] {
            let mut prev = -1.0f64;
            for step in 0..=20 {
                let eps = step as f64 / 20.0;
                let w = compute_width(eps, t, t * frac, 10, 4);
                if !(0.0..=1.0).contains(&w) || w + 1e-12 < prev {
                    return Err(format!(
                        "width not monotone/clamped at T={t}, frac={frac}, eps={eps}"
                    ));
                }
                prev = w;
                cases += 1;
            }
        }
    }
    // Threshold branch.
    if compute_width(0.5, 1000.0, 10.0, 3, 1) != 1.0 {
        return Err("threshold branch did not return 1".into());
    }
    cases += 1;
    // Thread weights sum to one.
    for j in 1..=20 {
        let total: f64 = sample_probs(j).iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(format!("sampling weights sum to {total} at J={j}"));
        }
        cases += 1;
    }
    Ok(cases)
}

fn episode_protocol() -> Result<usize, String> {
    let mut cases = 0usize;
    for seed in 0..10u64 {
        let mut instance_rng = trial_rng(seed, streams::INSTANCE);
        let (instance, outlier) = generate_paper_instance(8, 2, 400, &mut instance_rng)
            .map_err(|e| e.to_string())?;
        let schedule =
            AdversarySchedule::front_loaded(0.1, outlier).map_err(|e| e.to_string())?;
        let mut policy = FixedPolicy::new(vec![1, 5], "fixed");
        let (trace, history) =
            run_episode_recorded(&mut policy, &instance, &schedule, seed)
                .map_err(|e| e.to_string())?;
        if history.outlier_periods() > schedule.budget(400) {
            return Err(format!("seed {seed}: outlier budget exceeded"));
        }
        if trace.len() != 400 {
            return Err(format!("seed {seed}: truncated episode"));
        }
        let mut policy2 = FixedPolicy::new(vec![1, 5], "fixed");
        let trace2 = run_episode(&mut policy2, &instance, &schedule, seed)
            .map_err(|e| e.to_string())?;
        if trace.instantaneous() != trace2.instantaneous() {
            return Err(format!("seed {seed}: reruns diverged"));
        }
        cases += 1;
    }
    Ok(cases)
}

/// Desk-scale estimation-error coverage; an estimator clipped the wrong
/// way (optimism at 1 instead of a ratio capped by 1) fails here.
fn estimation_coverage() -> Result<usize, String> {
    let (n, k, horizon) = (8usize, 3usize, 50_000usize);
    let explore_scale = (horizon as f64 / 15.0) / paper_t0(n, k, horizon);
    let mut pairs = 0usize;
    let mut covered = 0usize;
    for run in 0..30u64 {
        let seed = 0xC0FE + run;
        let mut instance_rng = trial_rng(seed, streams::INSTANCE);
        let (instance, _) = generate_paper_instance(n, k, horizon, &mut instance_rng)
            .map_err(|e| e.to_string())?;
        let mut policy = RobustPolicy::new(
            instance.revenues().to_vec(),
            k,
            horizon,
            0.0,
            explore_scale,
        )
        .map_err(|e| e.to_string())?;
        run_episode(&mut policy, &instance, &AdversarySchedule::none(), seed)
            .map_err(|e| e.to_string())?;
        let v = instance.utilities();
        for rec in policy.epoch_records() {
            let Some(after) = rec.estimates_after.as_ref() else {
                continue;
            };
            for &i in &rec.active {
                let cand = rec
                    .candidates
                    .iter()
                    .find(|c| c.item == i)
                    .ok_or("active item without candidate")?;
                let v_s: f64 = cand.assortment.iter().map(|&j| v[j - 1]).sum();
                let ceiling = delta_star_diagnostic(
                    k,
                    0.0,
                    horizon as f64,
                    rec.planned_len as f64,
                    rec.active.len(),
                    v_s,
                    v[i - 1],
                );
                pairs += 1;
                if (after[i - 1] - v[i - 1]).abs() <= ceiling {
                    covered += 1;
                }
            }
        }
    }
    let coverage = covered as f64 / pairs as f64;
    if coverage < 0.99 {
        return Err(format!(
            "coverage {coverage:.4} over {pairs} pairs (first seed 0xC0FE)"
        ));
    }
    Ok(pairs)
}
