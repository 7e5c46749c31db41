//! Active-elimination policy for a known (or assumed) outlier proportion ε̄.
//!
//! The policy runs in epochs of geometrically growing length `T_τ = 2^τ T_0`.
//! At each epoch boundary it re-estimates utilities from that epoch's own
//! counters, recomputes a confidence width Δ̂ that is inflated by the assumed
//! contamination level, and discards items whose best containing assortment
//! falls more than 2Δ̂ below the optimistic optimum γ. Within an epoch it
//! samples an active item uniformly at random and offers that item's best
//! assortment; the randomization is what prevents an adaptive adversary from
//! concentrating outliers on any one candidate.
//!
//! Estimation counts only purchases of the sampled item and no-purchases
//! while its candidate assortment is on offer; everything else is discarded.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::optimizer::{constrained_assortment_opt, static_assortment_opt, DEFAULT_DELTA};
use crate::policy::Policy;

pub const POLICY_LABEL: &str = "active_elim";

/// `T_0 = 128 (K+1)^2 N ln T`, the exploration budget the analysis wants.
/// It exceeds T itself for realistic inputs, which is why experiments run
/// with a down-scaled multiple of it.
pub fn paper_t0(n_items: usize, capacity: usize, horizon: usize) -> f64 {
    let k1 = (capacity + 1) as f64;
    128.0 * k1 * k1 * n_items as f64 * (horizon as f64).ln()
}

/// `explore_scale` that lands the initial epoch near `T/64`, so five-plus
/// epochs fit in the horizon.
pub fn auto_explore_scale(n_items: usize, capacity: usize, horizon: usize) -> f64 {
    let target = (horizon as f64 / 64.0).max(1.0);
    let paper = paper_t0(n_items, capacity, horizon);
    if paper > 0.0 {
        target / paper
    } else {
        1.0
    }
}

pub(crate) fn scaled_t0(n_items: usize, capacity: usize, horizon: usize, explore_scale: f64) -> usize {
    ((explore_scale * paper_t0(n_items, capacity, horizon)).round() as i64).max(1) as usize
}

/// Confidence width Δ̂_ε̄(τ+1) after an epoch of length `epoch_len` left
/// `n_active` items alive, against a horizon of `horizon` periods.
///
/// Below the threshold `T_τ < ε̄T / 4(K+1)` the data could still be mostly
/// contaminated and the width stays at its vacuous value 1; past it the
/// Bernstein-style expression applies, clamped into [0,1] because revenue
/// gaps cannot exceed 1. Fractional horizons are accepted because the
/// adaptive policy evaluates each thread on a ℘_j-slice of the horizon.
pub fn compute_width(
    eps_bar: f64,
    horizon: f64,
    epoch_len: f64,
    n_active: usize,
    capacity: usize,
) -> f64 {
    debug_assert!(epoch_len >= 1.0 && n_active >= 1);
    let k = capacity as f64;
    if epoch_len < eps_bar * horizon / (4.0 * (k + 1.0)) {
        return 1.0;
    }
    let eps_tau = (eps_bar * horizon / epoch_len).min(1.0);
    let ln_t = horizon.max(1.0).ln();
    let n_tau = n_active as f64;
    let width = 16.0 * k * (k + 1.0)
        * (eps_tau / 2.0
            + (eps_tau * n_tau * ln_t / epoch_len).sqrt()
            + 2.0 * n_tau * ln_t / (3.0 * epoch_len))
        + 16.0 * (k * n_tau * ln_t / epoch_len).sqrt();
    width.clamp(0.0, 1.0)
}

/// Ratio estimator `v̂_i = min{1, n_i / n_0(i)}`, optimistic (1) while no
/// no-purchase has been recorded.
pub fn update_estimate(n_buy: u64, n_zero: u64) -> f64 {
    if n_zero == 0 {
        1.0
    } else {
        (n_buy as f64 / n_zero as f64).min(1.0)
    }
}

/// The candidate assortment computed for one active item in one epoch,
/// with its estimated revenue under that epoch's estimates.
#[derive(Debug, Clone)]
pub struct CandidateRecord {
    pub item: usize,
    pub assortment: Vec<usize>,
    pub est_revenue: f64,
}

/// Everything one epoch did, kept for diagnostics and the empirical
/// coverage checks. `estimates_after`/`width_after` stay `None` when the
/// horizon ended mid-epoch (truncated counters are discarded).
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub planned_len: u64,
    pub periods_run: u64,
    /// Δ̂(τ) used by this epoch's elimination and revenue-error guarantee.
    pub width: f64,
    pub gamma: f64,
    /// A^(τ), the ground set candidates were computed over.
    pub active_entering: Vec<usize>,
    /// A^(τ+1), the set actually sampled during the epoch.
    pub active: Vec<usize>,
    /// v̂^(τ) snapshot the epoch's optimizations used.
    pub estimates: Vec<f64>,
    /// Candidates for every i ∈ A^(τ); only those with `item ∈ active`
    /// were offered.
    pub candidates: Vec<CandidateRecord>,
    /// v̂^(τ+1) after the end-of-epoch refresh.
    pub estimates_after: Option<Vec<f64>>,
    /// Δ̂(τ+1) from the end-of-epoch refresh.
    pub width_after: Option<f64>,
}

/// Algorithm state plus the instance data a policy is allowed to know:
/// revenues, capacity, horizon — never the true utilities.
pub struct RobustPolicy {
    revenues: Vec<f64>,
    capacity: usize,
    horizon: usize,
    eps_bar: f64,
    explore_scale: f64,
    t0: usize,
    delta: f64,
    keep_records: bool,

    epoch: usize,
    epoch_len: u64,
    periods_in_epoch: u64,
    started: bool,
    active_entering: Vec<usize>,
    active: Vec<usize>,
    estimates: Vec<f64>,
    width: f64,
    gamma: f64,
    /// candidate assortment per item id (1-based), only for active items.
    candidates: Vec<Option<Vec<usize>>>,
    n_buy: Vec<u64>,
    n_zero: Vec<u64>,
    pending: Option<usize>,
    records: Vec<EpochRecord>,
}

impl RobustPolicy {
    /// `eps_bar` is the assumed outlier proportion; 1.0 is admitted because
    /// the adaptive policy's coarsest thread runs at exactly that level.
    pub fn new(
        revenues: Vec<f64>,
        capacity: usize,
        horizon: usize,
        eps_bar: f64,
        explore_scale: f64,
    ) -> Result<Self> {
        let n = revenues.len();
        if n == 0 {
            return Err(Error::invalid_input("policy needs at least one item"));
        }
        if capacity == 0 || capacity > n {
            return Err(Error::invalid_input(format!(
                "capacity {capacity} outside 1..={n}"
            )));
        }
        if horizon == 0 {
            return Err(Error::invalid_input("horizon must be at least 1"));
        }
        if !eps_bar.is_finite() || !(0.0..=1.0).contains(&eps_bar) {
            return Err(Error::invalid_input(format!(
                "eps_bar {eps_bar} outside [0,1]"
            )));
        }
        if !explore_scale.is_finite() || explore_scale < 0.0 {
            return Err(Error::invalid_input("explore_scale must be nonnegative"));
        }
        let t0 = scaled_t0(n, capacity, horizon, explore_scale);
        Ok(RobustPolicy {
            capacity,
            horizon,
            eps_bar,
            explore_scale,
            t0,
            delta: DEFAULT_DELTA,
            keep_records: true,
            epoch: 0,
            epoch_len: 0,
            periods_in_epoch: 0,
            started: false,
            active_entering: (1..=n).collect(),
            active: Vec::new(),
            estimates: vec![1.0; n],
            width: 1.0,
            gamma: 0.0,
            candidates: vec![None; n + 1],
            n_buy: vec![0; n],
            n_zero: vec![0; n],
            pending: None,
            records: Vec::new(),
            revenues,
        })
    }

    /// Pins the initial epoch length directly (test hook; also used by the
    /// adaptive reduction check).
    pub fn with_t0(mut self, t0: usize) -> Self {
        self.t0 = t0.max(1);
        self
    }

    /// Disables per-epoch record keeping for long sweeps.
    pub fn without_records(mut self) -> Self {
        self.keep_records = false;
        self
    }

    pub fn t0(&self) -> usize {
        self.t0
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps_bar
    }

    pub fn explore_scale(&self) -> f64 {
        self.explore_scale
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Active set currently being sampled (A^(τ+1) of the running epoch).
    pub fn active_set(&self) -> &[usize] {
        &self.active
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn epoch_records(&self) -> &[EpochRecord] {
        &self.records
    }

    fn begin_epoch(&mut self) {
        let ground = self.active_entering.clone();
        let static_res = static_assortment_opt(
            &self.revenues,
            &self.estimates,
            &ground,
            self.capacity,
            self.delta,
        )
        .expect("static optimization over a valid active set");

        let mut candidate_records = Vec::with_capacity(ground.len());
        // γ is the best revenue any candidate (or the unconstrained witness)
        // achieves under v̂; taking the max keeps the attaining item's own
        // candidate from falling below γ through bisection slack, so the
        // elimination rule can never empty the active set.
        let mut gamma = static_res.estimated_revenue;
        for &i in &ground {
            let res = constrained_assortment_opt(
                &self.revenues,
                &self.estimates,
                &ground,
                self.capacity,
                i,
                self.delta,
            )
            .expect("constrained optimization over a valid active set");
            gamma = gamma.max(res.estimated_revenue);
            candidate_records.push(CandidateRecord {
                item: i,
                assortment: res.assortment,
                est_revenue: res.estimated_revenue,
            });
        }

        let survivors: Vec<usize> = candidate_records
            .iter()
            .filter(|c| c.est_revenue + 2.0 * self.width >= gamma)
            .map(|c| c.item)
            .collect();
        assert!(
            !survivors.is_empty(),
            "elimination emptied the active set (γ = {gamma})"
        );

        for slot in self.candidates.iter_mut() {
            *slot = None;
        }
        for c in &candidate_records {
            if survivors.contains(&c.item) {
                self.candidates[c.item] = Some(c.assortment.clone());
            }
        }
        self.n_buy.iter_mut().for_each(|x| *x = 0);
        self.n_zero.iter_mut().for_each(|x| *x = 0);

        self.gamma = gamma;
        self.active = survivors;
        self.epoch_len = (self.t0 as u64).saturating_mul(1u64.checked_shl(self.epoch as u32).unwrap_or(u64::MAX));
        self.periods_in_epoch = 0;

        if self.keep_records {
            self.records.push(EpochRecord {
                epoch: self.epoch,
                planned_len: self.epoch_len,
                periods_run: 0,
                width: self.width,
                gamma,
                active_entering: ground,
                active: self.active.clone(),
                estimates: self.estimates.clone(),
                candidates: candidate_records,
                estimates_after: None,
                width_after: None,
            });
        }
    }

    fn end_epoch(&mut self) {
        for &i in &self.active {
            self.estimates[i - 1] = update_estimate(self.n_buy[i - 1], self.n_zero[i - 1]);
        }
        self.width = compute_width(
            self.eps_bar,
            self.horizon as f64,
            self.epoch_len as f64,
            self.active.len(),
            self.capacity,
        );
        if self.keep_records {
            if let Some(rec) = self.records.last_mut() {
                rec.periods_run = self.periods_in_epoch;
                rec.estimates_after = Some(self.estimates.clone());
                rec.width_after = Some(self.width);
            }
        }
        self.active_entering = self.active.clone();
        self.epoch += 1;
    }

    fn ensure_epoch(&mut self) {
        if !self.started {
            self.started = true;
            self.begin_epoch();
        } else if self.periods_in_epoch >= self.epoch_len {
            self.end_epoch();
            self.begin_epoch();
        }
    }
}

impl Policy for RobustPolicy {
    fn label(&self) -> &str {
        POLICY_LABEL
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        assert!(self.pending.is_none(), "select called twice without observe");
        self.ensure_epoch();
        let idx = rng.gen_range(0..self.active.len());
        let item = self.active[idx];
        self.pending = Some(item);
        self.candidates[item]
            .clone()
            .expect("active items always have candidates")
    }

    fn observe(&mut self, choice: usize) {
        let item = self.pending.take().expect("observe without select");
        if choice == item {
            self.n_buy[item - 1] += 1;
        } else if choice == 0 {
            self.n_zero[item - 1] += 1;
        }
        // Purchases of other items in the candidate are not recorded.
        self.periods_in_epoch += 1;
        if self.keep_records {
            if let Some(rec) = self.records.last_mut() {
                rec.periods_run = self.periods_in_epoch;
            }
        }
    }
}

#[cfg(test)]
impl RobustPolicy {
    pub(crate) fn begin_epoch_for_test(&mut self) {
        self.begin_epoch();
    }
    pub(crate) fn end_epoch_for_test(&mut self) {
        self.end_epoch();
    }
}
