//! Protocol loop, regret accounting, experiment-instance generation and
//! trial aggregation.
//!
//! An episode plays the adversary/policy protocol for `T` periods: the
//! adversary commits `(φ_t, Q_t)` from the full filtration, the policy
//! emits `S_t` from its own observations, the purchase realizes, and the
//! per-period regret `R(S*) − R(S_t)` accrues under the *typical* choice
//! model regardless of who actually showed up.
//!
//! Determinism contract: one root seed per trial, split into fixed
//! independent streams for the adversary, the policy, the customer draws
//! and the instance generation, so swapping the policy never perturbs the
//! other streams. Identical `(config, seed)` reproduce byte-identical CSV
//! output no matter how many worker threads run the trials.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::choice::{
    expected_revenue, realize_choice, validate_assortment, Adversary, AdversaryKind,
    AdversarySchedule, History, Instance, PeriodRecord,
};
use crate::error::{Error, Result};
use crate::optimizer::{brute_force_opt, static_assortment_opt, OptResult, BRUTE_FORCE_LIMIT};
use crate::policy::{FixedPolicy, Policy};
use crate::policy_adaptive::AdaptivePolicy;
use crate::policy_baselines::{TsPolicy, UcbPolicy, DEFAULT_UCB_C1};
use crate::policy_robust::RobustPolicy;

/// Fixed sub-stream ids hanging off a trial's root seed.
pub mod streams {
    pub const ADVERSARY: u64 = 0;
    pub const POLICY: u64 = 1;
    pub const CUSTOMER: u64 = 2;
    pub const INSTANCE: u64 = 3;
}

/// Rng for one named stream of one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-period regret trace of one episode.
#[derive(Debug, Clone)]
pub struct RegretTrace {
    policy: String,
    seed: u64,
    instantaneous: Vec<f64>,
    cumulative: Vec<f64>,
}

impl RegretTrace {
    fn new(policy: String, seed: u64, instantaneous: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(instantaneous.len());
        let mut acc = 0.0;
        for &x in &instantaneous {
            acc += x;
            cumulative.push(acc);
        }
        RegretTrace {
            policy,
            seed,
            instantaneous,
            cumulative,
        }
    }

    pub fn policy(&self) -> &str {
        &self.policy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    pub fn instantaneous(&self) -> &[f64] {
        &self.instantaneous
    }

    /// Cumulative regret after period `t` (1-based).
    pub fn cumulative_at(&self, t: usize) -> f64 {
        self.cumulative[t - 1]
    }

    /// Average regret after period `t` (1-based).
    pub fn average_at(&self, t: usize) -> f64 {
        self.cumulative[t - 1] / t as f64
    }

    pub fn final_average(&self) -> f64 {
        self.average_at(self.len())
    }
}

/// The experiment instance: `K` decoy items with full revenue and zero
/// typical utility, `N−K` ordinary items with revenue and utility drawn
/// uniformly from [0.1, 0.2], and an outlier model that loves exactly the
/// decoys (`v'_i = 1` where `v_i = 0`, `v'_i = v_i` elsewhere).
pub fn generate_paper_instance(
    n_items: usize,
    capacity: usize,
    horizon: usize,
    rng: &mut dyn RngCore,
) -> Result<(Instance, Vec<f64>)> {
    if capacity >= n_items {
        return Err(Error::invalid_input(format!(
            "need K < N, got K = {capacity}, N = {n_items}"
        )));
    }
    let mut revenues = Vec::with_capacity(n_items);
    let mut utilities = Vec::with_capacity(n_items);
    for _ in 0..capacity {
        revenues.push(1.0);
        utilities.push(0.0);
    }
    for _ in capacity..n_items {
        revenues.push(rng.gen_range(0.1..0.2));
        utilities.push(rng.gen_range(0.1..0.2));
    }
    let outlier_utilities: Vec<f64> = utilities
        .iter()
        .map(|&v| if v == 0.0 { 1.0 } else { v })
        .collect();
    let instance = Instance::new(revenues, utilities, capacity, horizon)?;
    Ok((instance, outlier_utilities))
}

/// `S*` and `R(S*)` for typical customers. Brute force is authoritative up
/// to 20 items; beyond that the binary-search optimizer (whose polish step
/// lands on the exact optimum) is trusted.
pub fn optimal_assortment(instance: &Instance) -> Result<OptResult> {
    let ground = instance.all_items();
    let bisected = static_assortment_opt(
        instance.revenues(),
        instance.utilities(),
        &ground,
        instance.capacity(),
        crate::optimizer::DEFAULT_DELTA,
    )?;
    if instance.n_items() <= BRUTE_FORCE_LIMIT {
        let exact = brute_force_opt(
            instance.revenues(),
            instance.utilities(),
            &ground,
            instance.capacity(),
            None,
        )?;
        debug_assert!(
            (exact.estimated_revenue - bisected.estimated_revenue).abs() <= 1e-9,
            "optimizers disagree: {} vs {}",
            exact.estimated_revenue,
            bisected.estimated_revenue
        );
        return Ok(exact);
    }
    Ok(bisected)
}

/// Runs one episode and returns the trace together with the filtration.
pub fn run_episode_recorded(
    policy: &mut dyn Policy,
    instance: &Instance,
    schedule: &AdversarySchedule,
    seed: u64,
) -> Result<(RegretTrace, History)> {
    let mut adversary = Adversary::new(schedule, instance)?;
    let mut adv_rng = trial_rng(seed, streams::ADVERSARY);
    let mut pol_rng = trial_rng(seed, streams::POLICY);
    let mut cust_rng = trial_rng(seed, streams::CUSTOMER);
    let _ = &mut adv_rng; // built-in adversaries are deterministic; custom hooks may draw

    let optimum = optimal_assortment(instance)?;
    let r_star = optimum.estimated_revenue;

    let mut history = History::new();
    let mut instantaneous = Vec::with_capacity(instance.horizon());
    for t in 1..=instance.horizon() {
        let commitment = adversary.commit(t, &history);
        let offered = policy.select(&mut pol_rng);
        validate_offer(&offered, instance)?;
        let choice = realize_choice(&commitment, &offered, instance.utilities(), &mut cust_rng)?;
        policy.observe(choice);

        let revenue = expected_revenue(&offered, instance.revenues(), instance.utilities())?;
        let regret = r_star - revenue;
        assert!(
            regret >= -1e-12,
            "period {t}: offered assortment beats the computed optimum by {}",
            -regret
        );
        instantaneous.push(regret);
        history.push(PeriodRecord {
            is_outlier: commitment.is_outlier,
            outlier_model: commitment.model,
            assortment: offered,
            choice,
        });
    }
    debug_assert!(history.outlier_periods() <= schedule.budget(instance.horizon()));
    Ok((
        RegretTrace::new(policy.label().to_string(), seed, instantaneous),
        history,
    ))
}

/// Runs one episode of the protocol.
pub fn run_episode(
    policy: &mut dyn Policy,
    instance: &Instance,
    schedule: &AdversarySchedule,
    seed: u64,
) -> Result<RegretTrace> {
    run_episode_recorded(policy, instance, schedule, seed).map(|(trace, _)| trace)
}

fn validate_offer(offered: &[usize], instance: &Instance) -> Result<()> {
    if offered.len() > instance.capacity() {
        return Err(Error::ProtocolViolation(format!(
            "assortment of {} items exceeds capacity {}",
            offered.len(),
            instance.capacity()
        )));
    }
    validate_assortment(offered, instance.n_items())
        .map_err(|e| Error::ProtocolViolation(e.to_string()))
}

/// Estimation-error ceiling from the analysis (the Δ* display): evaluated
/// only in diagnostics and coverage tests, never by a policy — it needs the
/// true `V_S = Σ_{j∈S} v_j` and `v_i`.
pub fn delta_star_diagnostic(
    capacity: usize,
    eps: f64,
    horizon: f64,
    epoch_len: f64,
    n_active: usize,
    v_s: f64,
    v_i: f64,
) -> f64 {
    let k = capacity as f64;
    let eps_tau = (eps * horizon / epoch_len).min(1.0);
    let ln_t = horizon.max(1.0).ln();
    let n_tau = n_active as f64;
    8.0 * (k + 1.0)
        * (eps_tau / 2.0
            + (eps_tau * n_tau * ln_t / epoch_len).sqrt()
            + 2.0 * n_tau * ln_t / (3.0 * epoch_len))
        + 8.0 * ((1.0 + v_s) * v_i * n_tau * ln_t / epoch_len).sqrt()
}

/// Which policy a config runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyName {
    ActiveElim,
    Adaptive,
    Ucb,
    Ts,
    /// Always offers the precomputed optimum (zero-regret reference).
    Oracle,
}

impl PolicyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyName::ActiveElim => "active_elim",
            PolicyName::Adaptive => "adaptive",
            PolicyName::Ucb => "ucb",
            PolicyName::Ts => "ts",
            PolicyName::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "active_elim" => Ok(PolicyName::ActiveElim),
            "adaptive" => Ok(PolicyName::Adaptive),
            "ucb" => Ok(PolicyName::Ucb),
            "ts" => Ok(PolicyName::Ts),
            "oracle" => Ok(PolicyName::Oracle),
            other => Err(Error::invalid_input(format!(
                "unknown policy \"{other}\" (expected active_elim, adaptive, ucb, ts or oracle)"
            ))),
        }
    }
}

/// One policy's experiment: instance dimensions, contamination, policy
/// parameters, and the trial plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_items: usize,
    pub capacity: usize,
    pub horizon: usize,
    pub epsilon: f64,
    pub adversary: AdversaryKind,
    pub policy: PolicyName,
    /// Assumed contamination for the elimination policy; defaults to the
    /// true ε when absent.
    pub eps_bar: Option<f64>,
    /// Scale on the theoretical T_0; `None` targets an initial epoch of
    /// about T/64.
    pub explore_scale: Option<f64>,
    pub ucb_c1: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Aggregate checkpoints; `None` means T/4, T/2, 3T/4, T.
    pub checkpoints: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn new(
        n_items: usize,
        capacity: usize,
        horizon: usize,
        epsilon: f64,
        policy: PolicyName,
    ) -> Self {
        ExperimentConfig {
            n_items,
            capacity,
            horizon,
            epsilon,
            adversary: AdversaryKind::FrontLoaded,
            policy,
            eps_bar: None,
            explore_scale: None,
            ucb_c1: None,
            trials: 1,
            seed: 0,
            checkpoints: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid_input("trials must be at least 1"));
        }
        if self.n_items == 0 || self.capacity == 0 || self.capacity >= self.n_items {
            return Err(Error::invalid_input(format!(
                "need 1 ≤ K < N, got K = {}, N = {}",
                self.capacity, self.n_items
            )));
        }
        if self.horizon == 0 {
            return Err(Error::invalid_input("horizon must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::invalid_input("eps must lie in [0,1)"));
        }
        if let Some(e) = self.eps_bar {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::invalid_input("eps_bar must lie in [0,1]"));
            }
        }
        Ok(())
    }

    pub fn resolved_checkpoints(&self) -> Vec<usize> {
        match &self.checkpoints {
            Some(list) => {
                let mut out: Vec<usize> = list
                    .iter()
                    .copied()
                    .filter(|&t| t >= 1 && t <= self.horizon)
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            }
            None => {
                let t = self.horizon;
                let mut out = vec![t / 4, t / 2, 3 * t / 4, t];
                out.retain(|&x| x >= 1);
                out.dedup();
                out
            }
        }
    }

    fn schedule(&self, outlier_utilities: &[f64]) -> Result<AdversarySchedule> {
        match self.adversary {
            AdversaryKind::None => Ok(AdversarySchedule::none()),
            AdversaryKind::FrontLoaded => {
                AdversarySchedule::front_loaded(self.epsilon, outlier_utilities.to_vec())
            }
            AdversaryKind::AdaptiveHook => AdversarySchedule::adaptive_hook(self.epsilon),
        }
    }

    fn build_policy(&self, instance: &Instance) -> Result<Box<dyn Policy>> {
        let revenues = instance.revenues().to_vec();
        let (n, k, t) = (self.n_items, self.capacity, self.horizon);
        Ok(match self.policy {
            PolicyName::ActiveElim => {
                let scale = self
                    .explore_scale
                    .unwrap_or_else(|| crate::policy_robust::auto_explore_scale(n, k, t));
                Box::new(
                    RobustPolicy::new(
                        revenues,
                        k,
                        t,
                        self.eps_bar.unwrap_or(self.epsilon),
                        scale,
                    )?
                    .without_records(),
                )
            }
            PolicyName::Adaptive => {
                let scale = self
                    .explore_scale
                    .unwrap_or_else(|| crate::policy_adaptive::auto_explore_scale(k, t));
                Box::new(AdaptivePolicy::new(revenues, k, t, scale)?.without_records())
            }
            PolicyName::Ucb => Box::new(UcbPolicy::new(
                revenues,
                k,
                t,
                self.ucb_c1.unwrap_or(DEFAULT_UCB_C1),
            )?),
            PolicyName::Ts => Box::new(TsPolicy::new(revenues, k, t)?),
            PolicyName::Oracle => {
                let optimum = optimal_assortment(instance)?;
                Box::new(FixedPolicy::new(optimum.assortment, "oracle"))
            }
        })
    }
}

/// Mean/sd of average regret across trials at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub t: usize,
    pub mean_avg_regret: f64,
    pub sd_avg_regret: f64,
    pub trials: usize,
}

/// All trials of one policy under one config.
#[derive(Debug)]
pub struct TrialsResult {
    pub policy: String,
    pub horizon: usize,
    pub traces: Vec<RegretTrace>,
    pub aggregates: Vec<AggregateRow>,
}

impl TrialsResult {
    pub fn mean_avg_regret_at_end(&self) -> f64 {
        self.aggregates
            .last()
            .map(|a| a.mean_avg_regret)
            .unwrap_or(f64::NAN)
    }
}

/// Runs `config.trials` independent episodes (seeds `seed + trial_index`)
/// and aggregates average regret at the checkpoints. Trials run in
/// parallel; results are keyed by trial index so the aggregation order —
/// and therefore every output byte — is independent of scheduling.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialsResult> {
    config.validate()?;
    let traces: Vec<RegretTrace> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<RegretTrace> {
            let seed = config.seed.wrapping_add(trial as u64);
            let mut instance_rng = trial_rng(seed, streams::INSTANCE);
            let (instance, outlier_utilities) = generate_paper_instance(
                config.n_items,
                config.capacity,
                config.horizon,
                &mut instance_rng,
            )?;
            let schedule = config.schedule(&outlier_utilities)?;
            let mut policy = config.build_policy(&instance)?;
            run_episode(policy.as_mut(), &instance, &schedule, seed)
        })
        .collect::<Result<Vec<_>>>()?;

    let checkpoints = config.resolved_checkpoints();
    let aggregates = checkpoints
        .iter()
        .map(|&t| {
            let values: Vec<f64> = traces.iter().map(|tr| tr.average_at(t)).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let sd = if values.len() > 1 {
                (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                    / (values.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            AggregateRow {
                t,
                mean_avg_regret: mean,
                sd_avg_regret: sd,
                trials: values.len(),
            }
        })
        .collect();

    Ok(TrialsResult {
        policy: config.policy.as_str().to_string(),
        horizon: config.horizon,
        traces,
        aggregates,
    })
}

/// Reporting grid for trace CSVs: 50 evenly spaced periods (or every
/// period when `full` is set).
pub fn trace_grid(horizon: usize, full: bool) -> Vec<usize> {
    if full || horizon <= 50 {
        return (1..=horizon).collect();
    }
    let mut grid: Vec<usize> = (1..=50)
        .map(|k| (k as f64 * horizon as f64 / 50.0).round() as usize)
        .map(|t| t.clamp(1, horizon))
        .collect();
    grid.dedup();
    grid
}

/// Writes `policy,trial,seed,t,cum_regret,avg_regret` rows, `t` ascending
/// within each (policy, trial).
pub fn write_trace_csv<W: Write>(
    out: &mut W,
    result: &TrialsResult,
    grid: &[usize],
) -> std::io::Result<()> {
    writeln!(out, "policy,trial,seed,t,cum_regret,avg_regret")?;
    for (trial, trace) in result.traces.iter().enumerate() {
        for &t in grid {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                result.policy,
                trial,
                trace.seed(),
                t,
                trace.cumulative_at(t),
                trace.average_at(t)
            )?;
        }
    }
    Ok(())
}

/// Writes `policy,t,mean_avg_regret,sd_avg_regret,trials` rows.
pub fn write_aggregate_csv<W: Write>(
    out: &mut W,
    results: &[&TrialsResult],
) -> std::io::Result<()> {
    writeln!(out, "policy,t,mean_avg_regret,sd_avg_regret,trials")?;
    for result in results {
        for row in &result.aggregates {
            writeln!(
                out,
                "{},{},{},{},{}",
                result.policy, row.t, row.mean_avg_regret, row.sd_avg_regret, row.trials
            )?;
        }
    }
    Ok(())
}
