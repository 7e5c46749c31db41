//! Epoch-based UCB and Thompson-sampling baselines.
//!
//! Both follow the classic MNL-bandit scheme: offer the same assortment
//! until the first no-purchase, which makes the per-epoch purchase count of
//! an offered item an unbiased (geometric) estimate of its utility. That
//! stopping rule is exactly what outlier customers can manipulate — an
//! adversary that never lets a no-purchase happen stalls the epoch — so
//! epochs are additionally capped at the horizon length to keep episodes
//! finite; any regret that costs is recorded as-is.
//!
//! UCB maintains optimistic indices
//! `v̄_i + C1 (√(v̄_i · 48 ln(√N ℓ + 1) / T_i) + 48 ln(√N ℓ + 1) / T_i)`,
//! clipped into [0, cap]; Thompson sampling keeps a Beta(1,1)-seeded
//! posterior on the purchase odds q_i = v_i/(1+v_i) — each epoch adds
//! `purchases` successes and one failure (the terminating no-purchase) —
//! and optimizes under sampled `v̂_i = q/(1−q)`. Items never offered keep
//! index 1 (UCB) or the uninformed prior (TS).

use rand::RngCore;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::optimizer::{static_assortment_opt, DEFAULT_DELTA};
use crate::policy::Policy;

pub const UCB_LABEL: &str = "ucb";
pub const TS_LABEL: &str = "ts";

/// Multiplier the cited analysis uses inside the confidence radius; the
/// tuned experiments keep it and scale the whole radius by `C1` instead.
pub const UCB_THEORY_MULTIPLIER: f64 = 48.0;

/// Default scale on the confidence radius (the theory value is 48, far too
/// conservative in practice; 1.0 matches a tuned setup).
pub const DEFAULT_UCB_C1: f64 = 1.0;

/// Cap on optimistic indices / posterior draws. True utilities live in
/// [0,1] and unexplored items start at 1, so capping there keeps "never
/// tried" exactly as attractive as "looks perfect".
pub const DEFAULT_INDEX_CAP: f64 = 1.0;

fn check_common(revenues: &[f64], capacity: usize, horizon: usize) -> Result<()> {
    if revenues.is_empty() {
        return Err(Error::invalid_input("policy needs at least one item"));
    }
    if capacity == 0 || capacity > revenues.len() {
        return Err(Error::invalid_input(format!(
            "capacity {capacity} outside 1..={}",
            revenues.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::invalid_input("horizon must be at least 1"));
    }
    Ok(())
}

/// Shared offer-until-no-purchase bookkeeping.
struct EpochLoop {
    current: Vec<usize>,
    in_epoch: Vec<u64>,
    epoch_periods: u64,
    cap: u64,
    needs_refresh: bool,
    started: bool,
}

impl EpochLoop {
    fn new(n_items: usize, horizon: usize) -> Self {
        EpochLoop {
            current: Vec::new(),
            in_epoch: vec![0; n_items],
            epoch_periods: 0,
            cap: horizon as u64,
            needs_refresh: true,
            started: false,
        }
    }

    /// Returns true when the observation closed the epoch.
    fn observe(&mut self, choice: usize) -> bool {
        if choice != 0 {
            self.in_epoch[choice - 1] += 1;
        }
        self.epoch_periods += 1;
        if choice == 0 || self.epoch_periods >= self.cap {
            self.needs_refresh = true;
            true
        } else {
            false
        }
    }
}

/// Upper-confidence-bound baseline.
pub struct UcbPolicy {
    revenues: Vec<f64>,
    capacity: usize,
    c1: f64,
    index_cap: f64,
    delta: f64,
    epoch: EpochLoop,
    cum_purchases: Vec<u64>,
    epochs_offered: Vec<u64>,
    completed_epochs: u64,
    indices: Vec<f64>,
}

impl UcbPolicy {
    pub fn new(revenues: Vec<f64>, capacity: usize, horizon: usize, c1: f64) -> Result<Self> {
        check_common(&revenues, capacity, horizon)?;
        if !c1.is_finite() || c1 < 0.0 {
            return Err(Error::invalid_input("c1 must be nonnegative"));
        }
        let n = revenues.len();
        Ok(UcbPolicy {
            capacity,
            c1,
            index_cap: DEFAULT_INDEX_CAP,
            delta: DEFAULT_DELTA,
            epoch: EpochLoop::new(n, horizon),
            cum_purchases: vec![0; n],
            epochs_offered: vec![0; n],
            completed_epochs: 0,
            indices: vec![1.0; n],
            revenues,
        })
    }

    /// Widens the clip range to `[0, 1 + margin]`.
    pub fn with_index_margin(mut self, margin: f64) -> Self {
        self.index_cap = 1.0 + margin.max(0.0);
        self
    }

    pub fn indices(&self) -> &[f64] {
        &self.indices
    }

    fn close_epoch(&mut self) {
        for &i in &self.epoch.current {
            self.epochs_offered[i - 1] += 1;
            self.cum_purchases[i - 1] += self.epoch.in_epoch[i - 1];
            self.epoch.in_epoch[i - 1] = 0;
        }
        self.completed_epochs += 1;
        let n = self.revenues.len() as f64;
        let log_term = (n.sqrt() * self.completed_epochs as f64 + 1.0).ln();
        for i in 0..self.revenues.len() {
            let t_i = self.epochs_offered[i];
            if t_i == 0 {
                continue; // never offered: stays optimistic at 1
            }
            let mean = self.cum_purchases[i] as f64 / t_i as f64;
            let radius = (mean * UCB_THEORY_MULTIPLIER * log_term / t_i as f64).sqrt()
                + UCB_THEORY_MULTIPLIER * log_term / t_i as f64;
            self.indices[i] = (mean + self.c1 * radius).clamp(0.0, self.index_cap);
        }
        self.epoch.epoch_periods = 0;
    }

    fn reoptimize(&mut self) {
        let ground: Vec<usize> = (1..=self.revenues.len()).collect();
        self.epoch.current = static_assortment_opt(
            &self.revenues,
            &self.indices,
            &ground,
            self.capacity,
            self.delta,
        )
        .expect("index vector stays valid")
        .assortment;
    }
}

impl Policy for UcbPolicy {
    fn label(&self) -> &str {
        UCB_LABEL
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> Vec<usize> {
        if self.epoch.needs_refresh {
            if self.epoch.started {
                self.close_epoch();
            }
            self.reoptimize();
            self.epoch.needs_refresh = false;
            self.epoch.started = true;
        }
        self.epoch.current.clone()
    }

    fn observe(&mut self, choice: usize) {
        self.epoch.observe(choice);
    }
}

/// Thompson-sampling baseline with a non-informative Beta(1,1) prior.
pub struct TsPolicy {
    revenues: Vec<f64>,
    capacity: usize,
    v_cap: f64,
    delta: f64,
    epoch: EpochLoop,
    /// Beta parameters on q_i = v_i/(1+v_i): `successes[i]` counts
    /// purchases (+1 prior), `failures[i]` counts closed epochs (+1 prior).
    successes: Vec<f64>,
    failures: Vec<f64>,
}

impl TsPolicy {
    pub fn new(revenues: Vec<f64>, capacity: usize, horizon: usize) -> Result<Self> {
        check_common(&revenues, capacity, horizon)?;
        let n = revenues.len();
        Ok(TsPolicy {
            capacity,
            v_cap: DEFAULT_INDEX_CAP,
            delta: DEFAULT_DELTA,
            epoch: EpochLoop::new(n, horizon),
            successes: vec![1.0; n],
            failures: vec![1.0; n],
            revenues,
        })
    }

    pub fn posterior(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.successes
            .iter()
            .zip(self.failures.iter())
            .map(|(&a, &b)| (a, b))
    }

    fn close_epoch(&mut self) {
        for &i in &self.epoch.current {
            self.successes[i - 1] += self.epoch.in_epoch[i - 1] as f64;
            self.failures[i - 1] += 1.0;
            self.epoch.in_epoch[i - 1] = 0;
        }
        self.epoch.epoch_periods = 0;
    }

    fn reoptimize(&mut self, rng: &mut dyn RngCore) {
        let sampled: Vec<f64> = (0..self.revenues.len())
            .map(|i| {
                let q = Beta::new(self.successes[i], self.failures[i])
                    .expect("posterior parameters stay positive")
                    .sample(rng);
                let v = q / (1.0 - q);
                if v.is_finite() {
                    v.clamp(0.0, self.v_cap)
                } else {
                    self.v_cap
                }
            })
            .collect();
        let ground: Vec<usize> = (1..=self.revenues.len()).collect();
        self.epoch.current = static_assortment_opt(
            &self.revenues,
            &sampled,
            &ground,
            self.capacity,
            self.delta,
        )
        .expect("sampled utilities stay valid")
        .assortment;
    }
}

impl Policy for TsPolicy {
    fn label(&self) -> &str {
        TS_LABEL
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        if self.epoch.needs_refresh {
            if self.epoch.started {
                self.close_epoch();
            }
            self.reoptimize(rng);
            self.epoch.needs_refresh = false;
            self.epoch.started = true;
        }
        self.epoch.current.clone()
    }

    fn observe(&mut self, choice: usize) {
        self.epoch.observe(choice);
    }
}
