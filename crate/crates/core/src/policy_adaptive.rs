//! Adaptive policy for an unknown outlier proportion ε.
//!
//! Runs J logical threads of the known-ε̄ elimination logic on the geometric
//! grid ε̂_j = 2^(−j). Each period one thread is sampled with probability
//! ℘_j = 2^(−(J−j)) / (1 − 2^(−J)) — coarse, conservative threads rarely,
//! fine aggressive threads often — and that thread's uniformly-sampled
//! candidate is offered. Threads keep private estimates, active sets and
//! widths; they interact only through the nested-intersection step (each
//! thread's active set is clipped to its coarser neighbour's) and the
//! restart rule: when a fine thread's candidate looks more than 7Δ̂ worse
//! than a coarser thread's optimum under the coarser estimates, the finest
//! grid value must undershoot the true ε, so the whole run restarts with
//! J−1 threads on the remaining horizon.
//!
//! "Threads" are sub-states of one sequential policy, not OS threads.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::optimizer::{constrained_assortment_opt, static_assortment_opt, DEFAULT_DELTA};
use crate::policy::Policy;
use crate::policy_robust::{compute_width, update_estimate, CandidateRecord};

pub const POLICY_LABEL: &str = "adaptive";

/// `T_0 = 64 (K+1)^2 ln T` — no N factor, unlike the known-ε̄ policy.
pub fn paper_t0(capacity: usize, horizon: usize) -> f64 {
    let k1 = (capacity + 1) as f64;
    64.0 * k1 * k1 * (horizon as f64).ln()
}

/// `explore_scale` landing the initial epoch near `T/64`.
pub fn auto_explore_scale(capacity: usize, horizon: usize) -> f64 {
    let target = (horizon as f64 / 64.0).max(1.0);
    let paper = paper_t0(capacity, horizon);
    if paper > 0.0 {
        target / paper
    } else {
        1.0
    }
}

/// Number of threads: the finest grid value should sit at ≈ √(N/T), i.e.
/// `2^(−J) ≤ √(N/T)`, so `J = max(1, ⌈log₂ √(T/N)⌉)`.
pub fn grid_size(n_items: usize, horizon: usize) -> usize {
    let x = 0.5 * (horizon as f64 / n_items as f64).log2();
    (x.ceil() as isize).max(1) as usize
}

/// Grid `ε̂_j = 2^(−j)` and sampling weights `℘_j = 2^(−(J−j))/(1−2^(−J))`
/// for `j = 0..J−1`. The weights sum to 1 by the geometric-series identity.
pub fn init_grid(n_items: usize, horizon: usize) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    if n_items == 0 {
        return Err(Error::invalid_input("need at least one item"));
    }
    if n_items > horizon {
        return Err(Error::invalid_input(format!(
            "grid needs N ≤ T, got N = {n_items}, T = {horizon}"
        )));
    }
    let j = grid_size(n_items, horizon);
    Ok((j, grid_values(j), sample_probs(j)))
}

pub fn grid_values(j: usize) -> Vec<f64> {
    (0..j).map(|idx| 2f64.powi(-(idx as i32))).collect()
}

pub fn sample_probs(j: usize) -> Vec<f64> {
    let norm = 1.0 - 2f64.powi(-(j as i32));
    (0..j)
        .map(|idx| 2f64.powi(-((j - idx) as i32)) / norm)
        .collect()
}

/// Width for one thread: the known-ε̄ width with the horizon and epoch
/// length replaced by the thread's expected slice `℘_j T` and `℘_j T_τ`.
pub fn thread_width(
    eps_hat: f64,
    sample_prob: f64,
    horizon: usize,
    epoch_len: u64,
    n_active: usize,
    capacity: usize,
) -> f64 {
    compute_width(
        eps_hat,
        sample_prob * horizon as f64,
        (sample_prob * epoch_len as f64).max(1.0),
        n_active,
        capacity,
    )
}

/// Intersection of two ascending-sorted item sets.
pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[x]);
                x += 1;
                y += 1;
            }
        }
    }
    out
}

/// One hypothetical-ε thread: the per-thread slice of Algorithm-1 state.
#[derive(Debug, Clone)]
pub struct ThreadState {
    pub thread_id: usize,
    pub eps_hat: f64,
    pub sample_prob: f64,
    active_entering: Vec<usize>,
    active: Vec<usize>,
    estimates: Vec<f64>,
    width: f64,
    gamma: f64,
    candidates: Vec<Option<Vec<usize>>>,
    /// Sampling this item triggers the restart rule (precomputed per epoch;
    /// estimates are frozen within an epoch so the check cannot change).
    restart_on: Vec<bool>,
    n_buy: Vec<u64>,
    n_zero: Vec<u64>,
}

impl ThreadState {
    fn new(thread_id: usize, eps_hat: f64, sample_prob: f64, n_items: usize) -> Self {
        ThreadState {
            thread_id,
            eps_hat,
            sample_prob,
            active_entering: (1..=n_items).collect(),
            active: Vec::new(),
            estimates: vec![1.0; n_items],
            width: 1.0,
            gamma: 0.0,
            candidates: vec![None; n_items + 1],
            restart_on: vec![false; n_items + 1],
            n_buy: vec![0; n_items],
            n_zero: vec![0; n_items],
        }
    }

    pub fn active_set(&self) -> &[usize] {
        &self.active
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Per-epoch, per-thread snapshot for diagnostics and the empirical
/// retention checks.
#[derive(Debug, Clone)]
pub struct ThreadEpochRecord {
    pub thread_id: usize,
    pub eps_hat: f64,
    pub width: f64,
    pub gamma: f64,
    pub active_entering: Vec<usize>,
    pub active: Vec<usize>,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Debug, Clone)]
pub struct AdaptiveEpochRecord {
    pub epoch: usize,
    pub grid_size: usize,
    pub threads: Vec<ThreadEpochRecord>,
}

enum EpochOutcome {
    Ok,
    RestartNeeded,
}

/// Algorithm state: the thread pool, the shared epoch clock, and the
/// restart accounting.
pub struct AdaptivePolicy {
    revenues: Vec<f64>,
    n_items: usize,
    capacity: usize,
    horizon: usize,
    explore_scale: f64,
    t0: usize,
    delta: f64,
    keep_records: bool,

    grid_size_current: usize,
    threads: Vec<ThreadState>,
    epoch: usize,
    epoch_len: u64,
    periods_in_epoch: u64,
    started: bool,
    restart_count: usize,
    elapsed: u64,
    pending: Option<(usize, usize)>,
    records: Vec<AdaptiveEpochRecord>,
}

impl AdaptivePolicy {
    pub fn new(
        revenues: Vec<f64>,
        capacity: usize,
        horizon: usize,
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
        if !explore_scale.is_finite() || explore_scale < 0.0 {
            return Err(Error::invalid_input("explore_scale must be nonnegative"));
        }
        let (j, _, _) = init_grid(n, horizon)?;
        let t0 = ((explore_scale * paper_t0(capacity, horizon)).round() as i64).max(1) as usize;
        let mut policy = AdaptivePolicy {
            n_items: n,
            capacity,
            horizon,
            explore_scale,
            t0,
            delta: DEFAULT_DELTA,
            keep_records: true,
            grid_size_current: j,
            threads: Vec::new(),
            epoch: 0,
            epoch_len: 0,
            periods_in_epoch: 0,
            started: false,
            restart_count: 0,
            elapsed: 0,
            pending: None,
            records: Vec::new(),
            revenues,
        };
        policy.build_threads();
        Ok(policy)
    }

    /// Forces the initial number of threads (test hook; J = 1 reduces the
    /// policy exactly to the known-ε̄ policy at ε̄ = 1).
    pub fn with_grid_size(mut self, j: usize) -> Self {
        self.grid_size_current = j.max(1);
        self.build_threads();
        self
    }

    /// Pins the initial epoch length directly (test hook).
    pub fn with_t0(mut self, t0: usize) -> Self {
        self.t0 = t0.max(1);
        self
    }

    pub fn without_records(mut self) -> Self {
        self.keep_records = false;
        self
    }

    pub fn t0(&self) -> usize {
        self.t0
    }

    pub fn explore_scale(&self) -> f64 {
        self.explore_scale
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size_current
    }

    pub fn grid(&self) -> Vec<f64> {
        grid_values(self.grid_size_current)
    }

    pub fn sample_probs(&self) -> Vec<f64> {
        sample_probs(self.grid_size_current)
    }

    pub fn restart_count(&self) -> usize {
        self.restart_count
    }

    pub fn threads(&self) -> &[ThreadState] {
        &self.threads
    }

    pub fn epoch_records(&self) -> &[AdaptiveEpochRecord] {
        &self.records
    }

    fn build_threads(&mut self) {
        let probs = sample_probs(self.grid_size_current);
        let grid = grid_values(self.grid_size_current);
        self.threads = (0..self.grid_size_current)
            .map(|j| ThreadState::new(j, grid[j], probs[j], self.n_items))
            .collect();
        self.epoch = 0;
        self.periods_in_epoch = 0;
        self.epoch_len = 0;
    }

    /// Discard everything and rerun with one thread fewer on the remaining
    /// horizon. At J = 1 the signal is ignored and the coarsest thread
    /// keeps running.
    fn restart(&mut self) {
        if self.grid_size_current <= 1 {
            return;
        }
        self.grid_size_current -= 1;
        self.restart_count += 1;
        self.build_threads();
        self.begin_epoch_guarded();
    }

    fn begin_epoch_guarded(&mut self) {
        // A fresh grid can never signal again (all sets are [N], widths 1),
        // so this loop runs at most J−1 times.
        while let EpochOutcome::RestartNeeded = self.begin_epoch() {
            if self.grid_size_current <= 1 {
                break;
            }
            self.grid_size_current -= 1;
            self.restart_count += 1;
            self.build_threads();
        }
    }

    fn begin_epoch(&mut self) -> EpochOutcome {
        let mut epoch_threads = Vec::with_capacity(self.threads.len());
        for j in 0..self.threads.len() {
            // Nested intersection: clip to the coarser neighbour's freshly
            // eliminated set. An empty intersection certifies the same
            // inconsistency as the restart rule.
            if j > 0 {
                let coarser = self.threads[j - 1].active.clone();
                let clipped = intersect_sorted(&self.threads[j].active_entering, &coarser);
                if clipped.is_empty() {
                    return EpochOutcome::RestartNeeded;
                }
                self.threads[j].active_entering = clipped;
            }

            let ground = self.threads[j].active_entering.clone();
            let static_res = static_assortment_opt(
                &self.revenues,
                &self.threads[j].estimates,
                &ground,
                self.capacity,
                self.delta,
            )
            .expect("static optimization over a valid active set");
            let mut gamma = static_res.estimated_revenue;
            let mut candidate_records = Vec::with_capacity(ground.len());
            for &i in &ground {
                let res = constrained_assortment_opt(
                    &self.revenues,
                    &self.threads[j].estimates,
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

            let width = self.threads[j].width;
            let survivors: Vec<usize> = candidate_records
                .iter()
                .filter(|c| c.est_revenue + 2.0 * width >= gamma)
                .map(|c| c.item)
                .collect();
            assert!(
                !survivors.is_empty(),
                "thread {j} elimination emptied the active set"
            );

            let thread = &mut self.threads[j];
            thread.gamma = gamma;
            for slot in thread.candidates.iter_mut() {
                *slot = None;
            }
            for c in &candidate_records {
                if survivors.contains(&c.item) {
                    thread.candidates[c.item] = Some(c.assortment.clone());
                }
            }
            thread.active = survivors;
            thread.n_buy.iter_mut().for_each(|x| *x = 0);
            thread.n_zero.iter_mut().for_each(|x| *x = 0);

            if self.keep_records {
                epoch_threads.push(ThreadEpochRecord {
                    thread_id: j,
                    eps_hat: self.threads[j].eps_hat,
                    width,
                    gamma,
                    active_entering: ground,
                    active: self.threads[j].active.clone(),
                    candidates: candidate_records,
                });
            }
        }

        self.refresh_restart_flags();

        self.epoch_len = (self.t0 as u64)
            .saturating_mul(1u64.checked_shl(self.epoch as u32).unwrap_or(u64::MAX));
        self.periods_in_epoch = 0;
        if self.keep_records {
            self.records.push(AdaptiveEpochRecord {
                epoch: self.epoch,
                grid_size: self.grid_size_current,
                threads: epoch_threads,
            });
        }
        EpochOutcome::Ok
    }

    /// Restart rule, precomputed per (thread, item): each fine thread's
    /// candidate evaluated under every coarser thread's estimates.
    /// Estimates are frozen within the epoch, so flags cannot go stale.
    fn refresh_restart_flags(&mut self) {
        for j in 0..self.threads.len() {
            let flags: Vec<(usize, bool)> = self.threads[j]
                .active
                .iter()
                .map(|&i| {
                    let assortment = self.threads[j].candidates[i]
                        .as_ref()
                        .expect("survivors have candidates");
                    let mut trigger = false;
                    for k in 0..j {
                        let coarse = &self.threads[k];
                        let rev = crate::choice::expected_revenue(
                            assortment,
                            &self.revenues,
                            &coarse.estimates,
                        )
                        .expect("candidate assortments remain valid");
                        if rev < coarse.gamma - 7.0 * coarse.width {
                            trigger = true;
                            break;
                        }
                    }
                    (i, trigger)
                })
                .collect();
            let thread = &mut self.threads[j];
            thread.restart_on.iter_mut().for_each(|f| *f = false);
            for (i, trigger) in flags {
                thread.restart_on[i] = trigger;
            }
        }
    }

    fn end_epoch(&mut self) {
        for thread in &mut self.threads {
            for &i in &thread.active {
                thread.estimates[i - 1] = update_estimate(thread.n_buy[i - 1], thread.n_zero[i - 1]);
            }
            thread.width = thread_width(
                thread.eps_hat,
                thread.sample_prob,
                self.horizon,
                self.epoch_len,
                thread.active.len(),
                self.capacity,
            );
            thread.active_entering = thread.active.clone();
        }
        self.epoch += 1;
    }

    fn ensure_epoch(&mut self) {
        if !self.started {
            self.started = true;
            self.begin_epoch_guarded();
        } else if self.periods_in_epoch >= self.epoch_len {
            self.end_epoch();
            self.begin_epoch_guarded();
        }
    }

    fn draw_thread(&self, rng: &mut dyn RngCore) -> usize {
        // J = 1 draws nothing so that the single-thread policy consumes the
        // rng exactly like the known-ε̄ policy (seeded-reduction contract).
        if self.grid_size_current == 1 {
            return 0;
        }
        let probs = sample_probs(self.grid_size_current);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (j, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        self.grid_size_current - 1
    }
}

impl Policy for AdaptivePolicy {
    fn label(&self) -> &str {
        POLICY_LABEL
    }

    fn select(&mut self, rng: &mut dyn RngCore) -> Vec<usize> {
        assert!(self.pending.is_none(), "select called twice without observe");
        self.ensure_epoch();
        loop {
            let j = self.draw_thread(rng);
            let thread = &self.threads[j];
            let idx = rng.gen_range(0..thread.active.len());
            let item = thread.active[idx];
            if thread.restart_on[item] && self.grid_size_current > 1 {
                self.restart();
                continue;
            }
            self.pending = Some((j, item));
            return self.threads[j].candidates[item]
                .clone()
                .expect("active items always have candidates");
        }
    }

    fn observe(&mut self, choice: usize) {
        let (j, item) = self.pending.take().expect("observe without select");
        let thread = &mut self.threads[j];
        if choice == item {
            thread.n_buy[item - 1] += 1;
        } else if choice == 0 {
            thread.n_zero[item - 1] += 1;
        }
        self.periods_in_epoch += 1;
        self.elapsed += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_examples() {
        let probs = sample_probs(2);
        assert!((probs[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((probs[1] - 2.0 / 3.0).abs() < 1e-15);

        // N = T degenerates to one thread at ε̂ = 1 with ℘ = 1.
        let (j, grid, probs) = init_grid(16, 16).unwrap();
        assert_eq!(j, 1);
        assert_eq!(grid, vec![1.0]);
        assert_eq!(probs, vec![1.0]);

        assert!(init_grid(10, 5).is_err());
    }

    #[test]
    fn grid_size_targets_sqrt_ratio() {
        // 2^(−J) ≤ √(N/T) at the chosen J.
        for (n, t) in [(100usize, 20_000usize), (10, 1000), (300, 20_000), (8, 9)] {
            let j = grid_size(n, t);
            assert!(2f64.powi(-(j as i32)) <= (n as f64 / t as f64).sqrt() + 1e-12);
            assert!(j >= 1);
        }
    }

    #[test]
    fn thread_width_with_full_share_matches_algorithm_one() {
        let w_thread = thread_width(0.25, 1.0, 4096, 512, 7, 3);
        let w_direct = compute_width(0.25, 4096.0, 512.0, 7, 3);
        assert_eq!(w_thread, w_direct);
    }

    #[test]
    fn thread_width_threshold_uses_scaled_quantities() {
        // T_{τ,j} < ε̂_j T_j / (4(K+1)) ⟺ T_τ < ε̂_j T / (4(K+1)):
        // both sides scale with ℘_j, so the branch is ℘-invariant.
        let eps = 0.5;
        let (t, t_tau, k) = (1000usize, 10u64, 1usize);
        assert_eq!(thread_width(eps, 1.0, t, t_tau, 3, k), 1.0);
        assert_eq!(thread_width(eps, 0.25, t, t_tau, 3, k), 1.0);
    }

    #[test]
    fn halving_sample_share_never_shrinks_width() {
        // Needs ℘T_τ comfortably above e so ln(℘T)/℘T_τ grows as ℘ falls.
        for &(eps, t, t_tau, n, k) in &[
            (0.01, 100_000usize, 20_000u64, 10usize, 2usize),
            (0.0, 50_000, 10_000, 5, 1),
            (0.1, 200_000, 60_000, 20, 3),
        ] {
            let mut share = 1.0f64;
            let mut prev = thread_width(eps, share, t, t_tau, n, k);
            for _ in 0..6 {
                share /= 2.0;
                if share * t_tau as f64 <= std::f64::consts::E {
                    break;
                }
                let w = thread_width(eps, share, t, t_tau, n, k);
                assert!(
                    w >= prev - 1e-12,
                    "width shrank: ℘ = {share}, {w} < {prev}"
                );
                prev = w;
            }
        }
    }

    #[test]
    fn intersect_examples() {
        assert_eq!(intersect_sorted(&[2, 3, 4], &[1, 2, 3]), vec![2, 3]);
        assert_eq!(intersect_sorted(&[1, 2], &[1, 2]), vec![1, 2]);
        let empty: Vec<usize> = vec![];
        assert_eq!(intersect_sorted(&[1], &[2]), empty);
    }

    fn small_policy(j: usize) -> AdaptivePolicy {
        AdaptivePolicy::new(vec![0.8, 0.5, 0.3, 0.2], 2, 4096, 1.0)
            .unwrap()
            .with_grid_size(j)
            .with_t0(64)
    }

    #[test]
    fn thread_sampling_frequencies_match_weights() {
        let mut p = small_policy(3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Prime the epoch, then sample thread draws directly.
        let _ = p.select(&mut rng);
        p.pending = None;
        let draws = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[p.draw_thread(&mut rng)] += 1;
        }
        for (j, &c) in counts.iter().enumerate() {
            let prob = p.sample_probs()[j];
            let expect = prob * draws as f64;
            let sigma = (draws as f64 * prob * (1.0 - prob)).sqrt();
            assert!(
                (c as f64 - expect).abs() < 3.0 * sigma,
                "thread {j}: {c} draws vs {expect}"
            );
        }
    }

    #[test]
    fn weights_sum_to_one_for_many_grid_sizes() {
        for j in 1..=16 {
            let total: f64 = sample_probs(j).iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "J = {j}: Σ℘ = {total}");
        }
    }

    #[test]
    fn observations_attributed_to_sampled_thread_only() {
        let mut p = small_policy(2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let _ = p.select(&mut rng);
        let (j, item) = p.pending.unwrap();
        p.observe(item);
        for (idx, thread) in p.threads.iter().enumerate() {
            let total: u64 = thread.n_buy.iter().sum();
            assert_eq!(total, u64::from(idx == j));
        }
        // A purchase of a non-sampled item changes nothing anywhere.
        let before: Vec<Vec<u64>> = p.threads.iter().map(|t| t.n_buy.clone()).collect();
        let _ = p.select(&mut rng);
        let (_, item) = p.pending.unwrap();
        let other = if item == 1 { 2 } else { 1 };
        p.observe(other);
        let after: Vec<Vec<u64>> = p.threads.iter().map(|t| t.n_buy.clone()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn coarsest_thread_never_flags_restart() {
        let mut p = small_policy(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let _ = p.select(&mut rng);
        p.pending = None;
        assert!(p.threads[0].restart_on.iter().all(|&f| !f));
    }

    #[test]
    fn wide_intervals_suppress_restarts() {
        // With Δ̂ = 1 everywhere the rule needs R < γ − 7, impossible for
        // revenues in [0,1].
        let mut p = small_policy(3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let _ = p.select(&mut rng);
        p.pending = None;
        for thread in p.threads() {
            assert!(thread.restart_on.iter().all(|&f| !f));
        }
        assert_eq!(p.restart_count(), 0);
    }

    #[test]
    fn constructed_restart_trigger_fires() {
        // Thread 1's candidate has revenue 0 under thread 0's estimates
        // while γ_0 = 0.5 and Δ̂_0 = 0.05: 0 < 0.5 − 0.35 → flag raised.
        let mut p = AdaptivePolicy::new(vec![1.0, 0.0], 1, 4096, 1.0)
            .unwrap()
            .with_grid_size(2)
            .with_t0(16);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let _ = p.select(&mut rng);
        p.pending = None;
        // Coarse thread believes item 1 sells: v̂ = (1, 0) gives
        // R({1}) = 0.5 = γ_0. Fine thread's sole survivor is item 2 with
        // candidate {2}, worth 0 under the coarse estimates.
        p.threads[0].estimates = vec![1.0, 0.0];
        p.threads[0].gamma = 0.5;
        p.threads[0].width = 0.05;
        p.threads[1].active = vec![2];
        p.threads[1].candidates = vec![None, None, Some(vec![2])];
        p.refresh_restart_flags();
        assert!(p.threads[1].restart_on[2]);
        assert!(p.threads[0].restart_on.iter().all(|&f| !f));

        // Raising the coarse width to 0.1 closes the gap (0 ≥ 0.5 − 0.7)
        // and the flag clears.
        p.threads[0].width = 0.1;
        p.refresh_restart_flags();
        assert!(!p.threads[1].restart_on[2]);
    }

    #[test]
    fn restart_drops_one_thread_and_resets_state() {
        let mut p = small_policy(3);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let _ = p.select(&mut rng);
        p.pending = None;
        p.restart();
        assert_eq!(p.grid_size(), 2);
        assert_eq!(p.restart_count(), 1);
        assert_eq!(p.grid(), vec![1.0, 0.5]);
        for thread in p.threads() {
            assert_eq!(thread.estimates(), &[1.0; 4]);
            assert_eq!(thread.width(), 1.0);
        }
        // At J = 1 further signals are ignored.
        p.restart();
        assert_eq!(p.grid_size(), 1);
        assert_eq!(p.restart_count(), 2);
        p.restart();
        assert_eq!(p.grid_size(), 1);
        assert_eq!(p.restart_count(), 2);
    }

    #[test]
    fn nested_chain_holds_after_every_intersection_pass() {
        let mut p = AdaptivePolicy::new(vec![0.9, 0.6, 0.4, 0.3, 0.1], 2, 8192, 1.0)
            .unwrap()
            .with_grid_size(3)
            .with_t0(128);
        let mut policy_rng = ChaCha8Rng::seed_from_u64(15);
        let mut choice_rng = ChaCha8Rng::seed_from_u64(16);
        let utilities = [0.9, 0.7, 0.5, 0.2, 0.1];
        for _ in 0..8192 {
            let offer = p.select(&mut policy_rng);
            let dist = crate::choice::choice_probabilities(&offer, &utilities).unwrap();
            p.observe(crate::choice::sample_choice(&dist, &mut choice_rng));
        }
        for rec in p.epoch_records() {
            for pair in rec.threads.windows(2) {
                for item in &pair[1].active {
                    assert!(
                        pair[0].active.contains(item),
                        "epoch {}: thread {} kept {item} outside thread {}'s set",
                        rec.epoch,
                        pair[1].thread_id,
                        pair[0].thread_id
                    );
                }
            }
        }
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(j in 1usize..24) {
            let total: f64 = sample_probs(j).iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn intersect_is_sound(
            a in prop::collection::btree_set(1usize..30, 0..15),
            b in prop::collection::btree_set(1usize..30, 0..15),
        ) {
            let av: Vec<usize> = a.iter().copied().collect();
            let bv: Vec<usize> = b.iter().copied().collect();
            let got = intersect_sorted(&av, &bv);
            let expect: Vec<usize> = a.intersection(&b).copied().collect();
            prop_assert_eq!(got, expect);
        }
    }
}
