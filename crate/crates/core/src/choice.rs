//! Ground-truth MNL choice model, the customer protocol, and the outlier
//! (adversary) implementations.
//!
//! Items are indexed `1..=N`; index `0` is the no-purchase outcome, whose
//! preference weight is fixed at 1. A typical customer offered assortment
//! `S` purchases item `i ∈ S` with probability `v_i / (1 + Σ_{j∈S} v_j)`
//! and walks away with the remaining mass. Outlier customers follow an
//! arbitrary per-period model `Q_t` instead.
//!
//! The adversary commits the pair `(φ_t, Q_t)` from the full filtration
//! `F_{t-1}` *before* the policy's randomization at period `t` is drawn;
//! only the realization of the choice sees the offered assortment. That
//! ordering is what makes uniform candidate sampling protective, and it is
//! enforced structurally here: [`Adversary::commit`] never receives the
//! assortment.

use rand::Rng;
use rand::RngCore;

use crate::error::{Error, Result};

/// Choice outcome meaning "bought nothing".
pub const NO_PURCHASE: usize = 0;

/// Tolerance for probability normalization checks.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A ground-truth problem: revenues, typical-customer utilities, capacity
/// and horizon. The no-purchase weight `v_0 = 1` is implicit and fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    revenues: Vec<f64>,
    utilities: Vec<f64>,
    capacity: usize,
    horizon: usize,
}

impl Instance {
    pub fn new(
        revenues: Vec<f64>,
        utilities: Vec<f64>,
        capacity: usize,
        horizon: usize,
    ) -> Result<Self> {
        if revenues.is_empty() {
            return Err(Error::invalid_input("instance needs at least one item"));
        }
        if revenues.len() != utilities.len() {
            return Err(Error::invalid_input(format!(
                "revenues ({}) and utilities ({}) differ in length",
                revenues.len(),
                utilities.len()
            )));
        }
        check_unit_range("revenue", &revenues)?;
        check_unit_range("utility", &utilities)?;
        if capacity == 0 || capacity > revenues.len() {
            return Err(Error::invalid_input(format!(
                "capacity {} outside 1..={}",
                capacity,
                revenues.len()
            )));
        }
        if horizon == 0 {
            return Err(Error::invalid_input("horizon must be at least 1"));
        }
        Ok(Instance {
            revenues,
            utilities,
            capacity,
            horizon,
        })
    }

    pub fn n_items(&self) -> usize {
        self.revenues.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn revenues(&self) -> &[f64] {
        &self.revenues
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    /// All item ids `1..=N`, the initial active set of every policy.
    pub fn all_items(&self) -> Vec<usize> {
        (1..=self.n_items()).collect()
    }
}

fn check_unit_range(what: &str, values: &[f64]) -> Result<()> {
    for (idx, &x) in values.iter().enumerate() {
        if !x.is_finite() || !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid_input(format!(
                "{what} of item {} is {x}, expected [0,1]",
                idx + 1
            )));
        }
    }
    Ok(())
}

/// Checks that `assortment` holds distinct item ids valid for `n_items`.
pub fn validate_assortment(assortment: &[usize], n_items: usize) -> Result<()> {
    for (pos, &item) in assortment.iter().enumerate() {
        if item == 0 || item > n_items {
            return Err(Error::InvalidItem { item, n_items });
        }
        if assortment[..pos].contains(&item) {
            return Err(Error::invalid_input(format!(
                "item {item} appears twice in the assortment"
            )));
        }
    }
    Ok(())
}

/// Distribution over an assortment plus the no-purchase outcome.
///
/// `probs[0]` is the no-purchase mass; `probs[m]` belongs to
/// `assortment[m-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceDistribution {
    assortment: Vec<usize>,
    probs: Vec<f64>,
}

impl ChoiceDistribution {
    pub fn new(assortment: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != assortment.len() + 1 {
            return Err(Error::invalid_input(format!(
                "expected {} probabilities, got {}",
                assortment.len() + 1,
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::invalid_input("probabilities must be nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::invalid_input(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(ChoiceDistribution { assortment, probs })
    }

    pub fn assortment(&self) -> &[usize] {
        &self.assortment
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_no_purchase(&self) -> f64 {
        self.probs[0]
    }

    /// Probability of outcome `item` (0 for no purchase; 0.0 if not offered).
    pub fn prob_of(&self, item: usize) -> f64 {
        if item == NO_PURCHASE {
            return self.probs[0];
        }
        self.assortment
            .iter()
            .position(|&j| j == item)
            .map_or(0.0, |pos| self.probs[pos + 1])
    }
}

/// MNL choice probabilities for an offered assortment:
/// `P(i) = v_i / (1 + Σ_{j∈S} v_j)` and `P(0) = 1 / (1 + Σ_{j∈S} v_j)`.
pub fn choice_probabilities(assortment: &[usize], utilities: &[f64]) -> Result<ChoiceDistribution> {
    validate_assortment(assortment, utilities.len())?;
    let denom = 1.0 + assortment.iter().map(|&j| utilities[j - 1]).sum::<f64>();
    let mut probs = Vec::with_capacity(assortment.len() + 1);
    probs.push(1.0 / denom);
    probs.extend(assortment.iter().map(|&j| utilities[j - 1] / denom));
    ChoiceDistribution::new(assortment.to_vec(), probs)
}

/// Expected revenue `R(S) = Σ_{i∈S} r_i v_i / (1 + Σ_{i∈S} v_i)`, with
/// `R(∅) = 0`.
pub fn expected_revenue(assortment: &[usize], revenues: &[f64], utilities: &[f64]) -> Result<f64> {
    if revenues.len() != utilities.len() {
        return Err(Error::invalid_input(
            "revenues and utilities differ in length",
        ));
    }
    validate_assortment(assortment, utilities.len())?;
    let mut num = 0.0;
    let mut denom = 1.0;
    for &j in assortment {
        num += revenues[j - 1] * utilities[j - 1];
        denom += utilities[j - 1];
    }
    Ok(num / denom)
}

/// Draws one purchase outcome from `dist`. Deterministic given the rng state.
pub fn sample_choice(dist: &ChoiceDistribution, rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (pos, &p) in dist.probs().iter().enumerate() {
        acc += p;
        if u < acc {
            return if pos == 0 {
                NO_PURCHASE
            } else {
                dist.assortment()[pos - 1]
            };
        }
    }
    // Rounding shaved the cumulative sum below 1: attribute to the last outcome.
    dist.assortment().last().copied().unwrap_or(NO_PURCHASE)
}

/// An outlier customer's committed choice model `Q_t`, applicable to any
/// assortment revealed later.
#[derive(Debug, Clone, PartialEq)]
pub enum OutlierModel {
    /// MNL with different weights (no-purchase weight still 1).
    Mnl(Vec<f64>),
    /// Buys the target whenever it is offered, otherwise walks away.
    /// Leaves zero no-purchase mass while the target is on the shelf.
    PointMass(usize),
}

impl OutlierModel {
    /// Realizes the committed model against the revealed assortment.
    pub fn realize(
        &self,
        assortment: &[usize],
        rng: &mut dyn RngCore,
    ) -> Result<usize> {
        match self {
            OutlierModel::Mnl(weights) => {
                let dist = choice_probabilities(assortment, weights)?;
                Ok(sample_choice(&dist, rng))
            }
            OutlierModel::PointMass(target) => {
                if assortment.contains(target) {
                    Ok(*target)
                } else {
                    Ok(NO_PURCHASE)
                }
            }
        }
    }
}

/// One period of the protocol, as seen by the adversary filtration
/// `F_{t-1}`. Policies never receive this type; they observe only
/// `(S_t, i_t)` through [`History::policy_view`].
#[derive(Debug, Clone)]
pub struct PeriodRecord {
    pub is_outlier: bool,
    pub outlier_model: Option<OutlierModel>,
    pub assortment: Vec<usize>,
    pub choice: usize,
}

/// Filtration of a single episode: the full records `(φ_t, Q_t, S_t, i_t)`
/// and the policy-visible subsequence `(S_t, i_t)`.
#[derive(Debug, Clone, Default)]
pub struct History {
    records: Vec<PeriodRecord>,
}

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: PeriodRecord) {
        self.records.push(record);
    }

    /// Full filtration, adversary side.
    pub fn records(&self) -> &[PeriodRecord] {
        &self.records
    }

    /// Policy-visible subsequence `G_{t-1}`: offered assortments and choices.
    pub fn policy_view(&self) -> impl Iterator<Item = (&[usize], usize)> {
        self.records
            .iter()
            .map(|r| (r.assortment.as_slice(), r.choice))
    }

    pub fn outlier_periods(&self) -> usize {
        self.records.iter().filter(|r| r.is_outlier).count()
    }
}

/// Which contamination pattern an episode runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// No outliers at all.
    None,
    /// Outliers occupy exactly periods `1..⌊εT⌋`, all following one fixed
    /// outlier MNL. This is the experiment pattern: a consecutive chunk of
    /// anomalous customers at the start of the season.
    FrontLoaded,
    /// Extension point for adaptive adversaries with access to the full
    /// filtration. Ships with one concrete implementation that spends its
    /// budget immediately and targets the item with the highest empirical
    /// purchase count so far.
    AdaptiveHook,
}

impl AdversaryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AdversaryKind::None => "none",
            AdversaryKind::FrontLoaded => "front_loaded",
            AdversaryKind::AdaptiveHook => "adaptive_hook",
        }
    }
}

/// Configuration of an episode's contamination: the budget `ε`, the
/// arrival pattern, and (for the front-loaded pattern) the fixed outlier
/// MNL weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarySchedule {
    epsilon: f64,
    kind: AdversaryKind,
    outlier_utilities: Option<Vec<f64>>,
}

impl AdversarySchedule {
    pub fn none() -> Self {
        AdversarySchedule {
            epsilon: 0.0,
            kind: AdversaryKind::None,
            outlier_utilities: None,
        }
    }

    pub fn front_loaded(epsilon: f64, outlier_utilities: Vec<f64>) -> Result<Self> {
        check_epsilon(epsilon)?;
        check_unit_range("outlier utility", &outlier_utilities)?;
        Ok(AdversarySchedule {
            epsilon,
            kind: AdversaryKind::FrontLoaded,
            outlier_utilities: Some(outlier_utilities),
        })
    }

    pub fn adaptive_hook(epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(AdversarySchedule {
            epsilon,
            kind: AdversaryKind::AdaptiveHook,
            outlier_utilities: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind(&self) -> AdversaryKind {
        self.kind
    }

    pub fn outlier_utilities(&self) -> Option<&[f64]> {
        self.outlier_utilities.as_deref()
    }

    /// Outlier budget `⌊εT⌋`. The nudge keeps products like `0.3 * 10`
    /// (which rounds to 2.9999999999999996) from losing a whole period.
    pub fn budget(&self, horizon: usize) -> usize {
        ((self.epsilon * horizon as f64) + 1e-9).floor() as usize
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || !(0.0..1.0).contains(&epsilon) {
        return Err(Error::invalid_input(format!(
            "epsilon {epsilon} outside [0,1)"
        )));
    }
    Ok(())
}

/// The adversary's committed decision for one period.
#[derive(Debug, Clone)]
pub struct Commitment {
    pub is_outlier: bool,
    pub model: Option<OutlierModel>,
}

/// Custom adaptive adversaries plug in here. `commit` sees the full
/// filtration and the remaining budget but not the current assortment.
pub trait AdaptiveOutlier: Send {
    fn commit(&mut self, t: usize, remaining_budget: usize, history: &History)
        -> Option<OutlierModel>;
}

/// Shipped adaptive adversary: spends its budget from the first period on,
/// each time targeting the item with the highest empirical purchase count
/// (ties to the smallest id; item 1 before any purchase exists).
#[derive(Debug, Default)]
pub struct HighestPurchaseTargeter {
    counts: Vec<usize>,
    scanned: usize,
}

impl AdaptiveOutlier for HighestPurchaseTargeter {
    fn commit(
        &mut self,
        _t: usize,
        remaining_budget: usize,
        history: &History,
    ) -> Option<OutlierModel> {
        if remaining_budget == 0 {
            return None;
        }
        for record in &history.records()[self.scanned..] {
            if record.choice != NO_PURCHASE {
                if self.counts.len() < record.choice {
                    self.counts.resize(record.choice, 0);
                }
                self.counts[record.choice - 1] += 1;
            }
        }
        self.scanned = history.len();
        let target = self
            .counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(idx, _)| idx + 1)
            .unwrap_or(1);
        Some(OutlierModel::PointMass(target))
    }
}

/// Per-episode adversary state: tracks the budget and produces one
/// commitment per period.
pub struct Adversary {
    schedule: AdversarySchedule,
    budget: usize,
    used: usize,
    hook: Option<Box<dyn AdaptiveOutlier>>,
}

impl Adversary {
    pub fn new(schedule: &AdversarySchedule, instance: &Instance) -> Result<Self> {
        if let Some(w) = schedule.outlier_utilities() {
            if w.len() != instance.n_items() {
                return Err(Error::invalid_input(format!(
                    "outlier utilities length {} does not match {} items",
                    w.len(),
                    instance.n_items()
                )));
            }
        }
        let hook = match schedule.kind() {
            AdversaryKind::AdaptiveHook => {
                Some(Box::new(HighestPurchaseTargeter::default()) as Box<dyn AdaptiveOutlier>)
            }
            _ => None,
        };
        Ok(Adversary {
            budget: schedule.budget(instance.horizon()),
            schedule: schedule.clone(),
            used: 0,
            hook,
        })
    }

    /// Replaces the shipped adaptive hook with a custom one.
    pub fn with_hook(mut self, hook: Box<dyn AdaptiveOutlier>) -> Self {
        self.hook = Some(hook);
        self
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn outliers_used(&self) -> usize {
        self.used
    }

    /// Commits `(φ_t, Q_t)` from `F_{t-1}`. Must run before the policy's
    /// randomization at period `t`; it never sees the assortment.
    pub fn commit(&mut self, t: usize, history: &History) -> Commitment {
        let decision = match self.schedule.kind() {
            AdversaryKind::None => None,
            AdversaryKind::FrontLoaded => {
                if t <= self.budget {
                    Some(OutlierModel::Mnl(
                        self.schedule
                            .outlier_utilities()
                            .expect("front_loaded schedule carries outlier utilities")
                            .to_vec(),
                    ))
                } else {
                    None
                }
            }
            AdversaryKind::AdaptiveHook => {
                let remaining = self.budget - self.used;
                self.hook
                    .as_mut()
                    .expect("adaptive_hook schedule carries a hook")
                    .commit(t, remaining, history)
            }
        };
        match decision {
            Some(model) => {
                self.used += 1;
                assert!(
                    self.used <= self.budget,
                    "adversary exceeded its outlier budget of {} periods",
                    self.budget
                );
                Commitment {
                    is_outlier: true,
                    model: Some(model),
                }
            }
            None => Commitment {
                is_outlier: false,
                model: None,
            },
        }
    }

    /// Commit-then-realize for one period: the type decision comes from
    /// `F_{t-1}` alone, the choice realization sees the offered assortment.
    pub fn step(
        &mut self,
        t: usize,
        history: &History,
        offered: &[usize],
        typical_utilities: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<(bool, usize)> {
        let commitment = self.commit(t, history);
        let choice = realize_choice(&commitment, offered, typical_utilities, rng)?;
        Ok((commitment.is_outlier, choice))
    }
}

/// Realizes the period's purchase: typical customers follow the MNL with
/// `typical_utilities`, outliers follow their committed model.
pub fn realize_choice(
    commitment: &Commitment,
    offered: &[usize],
    typical_utilities: &[f64],
    rng: &mut dyn RngCore,
) -> Result<usize> {
    match (&commitment.is_outlier, &commitment.model) {
        (true, Some(model)) => model.realize(offered, rng),
        (false, _) => {
            let dist = choice_probabilities(offered, typical_utilities)?;
            Ok(sample_choice(&dist, rng))
        }
        (true, None) => unreachable!("outlier commitment without a model"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn empty_assortment_forces_no_purchase() {
        let dist = choice_probabilities(&[], &[0.5, 1.0]).unwrap();
        assert_eq!(dist.prob_no_purchase(), 1.0);
        assert_eq!(sample_choice(&dist, &mut rng(0)), NO_PURCHASE);
    }

    #[test]
    fn unit_utility_splits_evenly_with_no_purchase() {
        let dist = choice_probabilities(&[1], &[1.0]).unwrap();
        assert!((dist.prob_of(1) - 0.5).abs() < 1e-15);
        assert!((dist.prob_no_purchase() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn two_item_probabilities_match_hand_evaluation() {
        // denominator 1 + 0.5 + 1 = 2.5
        let dist = choice_probabilities(&[1, 2], &[0.5, 1.0]).unwrap();
        assert!((dist.prob_no_purchase() - 0.4).abs() < 1e-15);
        assert!((dist.prob_of(1) - 0.2).abs() < 1e-15);
        assert!((dist.prob_of(2) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn revenue_examples() {
        let r = [1.0, 0.5];
        let v = [0.5, 1.0];
        assert_eq!(expected_revenue(&[], &r, &v).unwrap(), 0.0);
        assert!((expected_revenue(&[1], &[1.0], &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((expected_revenue(&[1, 2], &r, &v).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn invalid_indices_are_rejected() {
        assert!(choice_probabilities(&[0], &[1.0]).is_err());
        assert!(choice_probabilities(&[2], &[1.0]).is_err());
        assert!(choice_probabilities(&[1, 1], &[1.0]).is_err());
        assert!(expected_revenue(&[3], &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn degenerate_distributions_sample_deterministically() {
        let all_zero = ChoiceDistribution::new(vec![2], vec![0.0, 1.0]).unwrap();
        let no_buy = ChoiceDistribution::new(vec![2], vec![1.0, 0.0]).unwrap();
        let mut r = rng(7);
        for _ in 0..32 {
            assert_eq!(sample_choice(&all_zero, &mut r), 2);
            assert_eq!(sample_choice(&no_buy, &mut r), NO_PURCHASE);
        }
    }

    #[test]
    fn sample_frequencies_within_three_sigma() {
        let dist = choice_probabilities(&[1, 2], &[0.5, 1.0]).unwrap();
        let n = 1_000_000usize;
        let mut counts = [0usize; 3];
        let mut r = rng(42);
        for _ in 0..n {
            match sample_choice(&dist, &mut r) {
                0 => counts[0] += 1,
                1 => counts[1] += 1,
                2 => counts[2] += 1,
                _ => unreachable!(),
            }
        }
        for (outcome, &c) in counts.iter().enumerate() {
            let p = dist.prob_of(outcome);
            let sigma = (p * (1.0 - p) * n as f64).sqrt();
            let diff = (c as f64 - p * n as f64).abs();
            assert!(
                diff <= 3.0 * sigma,
                "outcome {outcome}: count {c}, expected {}, 3σ = {}",
                p * n as f64,
                3.0 * sigma
            );
        }
    }

    #[test]
    fn budget_floor_handles_float_products() {
        let sched = AdversarySchedule::front_loaded(0.3, vec![1.0]).unwrap();
        assert_eq!(sched.budget(10), 3);
        let sched = AdversarySchedule::front_loaded(0.1, vec![1.0]).unwrap();
        assert_eq!(sched.budget(100), 10);
        assert_eq!(sched.budget(3), 0);
    }

    #[test]
    fn zero_budget_means_no_outliers() {
        let instance = Instance::new(vec![1.0, 0.5], vec![0.5, 1.0], 1, 50).unwrap();
        let sched = AdversarySchedule::front_loaded(0.0, vec![1.0, 1.0]).unwrap();
        let mut adv = Adversary::new(&sched, &instance).unwrap();
        let mut history = History::new();
        let mut r = rng(3);
        for t in 1..=50 {
            let (outlier, choice) = adv
                .step(t, &history, &[1], instance.utilities(), &mut r)
                .unwrap();
            assert!(!outlier);
            history.push(PeriodRecord {
                is_outlier: outlier,
                outlier_model: None,
                assortment: vec![1],
                choice,
            });
        }
        assert_eq!(history.outlier_periods(), 0);
    }

    #[test]
    fn front_loaded_outliers_fill_exactly_the_first_periods() {
        let t_total = 100;
        let instance =
            Instance::new(vec![1.0; 4], vec![0.0, 0.1, 0.1, 0.1], 2, t_total).unwrap();
        let sched =
            AdversarySchedule::front_loaded(0.1, vec![1.0, 0.1, 0.1, 0.1]).unwrap();
        let mut adv = Adversary::new(&sched, &instance).unwrap();
        let mut history = History::new();
        let mut r = rng(11);
        for t in 1..=t_total {
            let commitment = adv.commit(t, &history);
            assert_eq!(commitment.is_outlier, t <= 10, "period {t}");
            let choice =
                realize_choice(&commitment, &[1, 2], instance.utilities(), &mut r).unwrap();
            history.push(PeriodRecord {
                is_outlier: commitment.is_outlier,
                outlier_model: commitment.model,
                assortment: vec![1, 2],
                choice,
            });
        }
        assert_eq!(history.outlier_periods(), 10);
    }

    #[test]
    fn front_loaded_outlier_follows_outlier_weights() {
        // Item 1 has zero typical utility but outlier weight 1: over the
        // outlier periods it must sell at roughly v'_1/(1+v'_1+v'_2) = 1/2.1.
        let instance = Instance::new(vec![1.0, 0.5], vec![0.0, 0.1], 2, 10_000).unwrap();
        let sched = AdversarySchedule::front_loaded(0.5, vec![1.0, 0.1]).unwrap();
        let mut adv = Adversary::new(&sched, &instance).unwrap();
        let mut history = History::new();
        let mut r = rng(5);
        let mut item1_sales = 0usize;
        for t in 1..=5_000 {
            let (outlier, choice) = adv
                .step(t, &history, &[1, 2], instance.utilities(), &mut r)
                .unwrap();
            assert!(outlier);
            if choice == 1 {
                item1_sales += 1;
            }
            history.push(PeriodRecord {
                is_outlier: outlier,
                outlier_model: None,
                assortment: vec![1, 2],
                choice,
            });
        }
        let p = 1.0 / 2.1;
        let sigma = (p * (1.0 - p) * 5_000f64).sqrt();
        assert!((item1_sales as f64 - p * 5_000.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn adaptive_hook_targets_most_purchased_item() {
        let instance = Instance::new(vec![1.0; 3], vec![0.5; 3], 2, 100).unwrap();
        let sched = AdversarySchedule::adaptive_hook(0.5).unwrap();
        let mut adv = Adversary::new(&sched, &instance).unwrap();
        let mut history = History::new();
        // Seed the history with purchases of item 3.
        for _ in 0..4 {
            history.push(PeriodRecord {
                is_outlier: false,
                outlier_model: None,
                assortment: vec![2, 3],
                choice: 3,
            });
        }
        let commitment = adv.commit(5, &history);
        assert!(commitment.is_outlier);
        assert_eq!(commitment.model, Some(OutlierModel::PointMass(3)));
        // The point mass buys the target when offered and walks otherwise.
        let mut r = rng(1);
        let model = OutlierModel::PointMass(3);
        assert_eq!(model.realize(&[2, 3], &mut r).unwrap(), 3);
        assert_eq!(model.realize(&[1, 2], &mut r).unwrap(), NO_PURCHASE);
    }

    #[test]
    #[should_panic(expected = "outlier budget")]
    fn budget_violation_aborts() {
        struct Greedy;
        impl AdaptiveOutlier for Greedy {
            fn commit(&mut self, _: usize, _: usize, _: &History) -> Option<OutlierModel> {
                Some(OutlierModel::PointMass(1))
            }
        }
        let instance = Instance::new(vec![1.0], vec![0.5], 1, 10).unwrap();
        let sched = AdversarySchedule::adaptive_hook(0.2).unwrap();
        let mut adv = Adversary::new(&sched, &instance).unwrap().with_hook(Box::new(Greedy));
        let history = History::new();
        for t in 1..=10 {
            adv.commit(t, &history);
        }
    }

    #[test]
    fn revenue_never_exceeds_best_offered_price() {
        // R(S) is a sub-probability average of the r_i, so max r_i bounds it.
        let mut r = rng(21);
        for _ in 0..500 {
            let n = r.gen_range(1..=12);
            let revenues: Vec<f64> = (0..n).map(|_| r.gen()).collect();
            let utilities: Vec<f64> = (0..n).map(|_| r.gen()).collect();
            let size = r.gen_range(1..=n);
            let assortment: Vec<usize> = (1..=size).collect();
            let rev = expected_revenue(&assortment, &revenues, &utilities).unwrap();
            let best = assortment
                .iter()
                .map(|&i| revenues[i - 1])
                .fold(f64::MIN, f64::max);
            assert!(rev <= best + 1e-15);
        }
    }

    #[test]
    fn policy_view_hides_outlier_information() {
        let mut history = History::new();
        history.push(PeriodRecord {
            is_outlier: true,
            outlier_model: Some(OutlierModel::PointMass(2)),
            assortment: vec![1, 2],
            choice: 2,
        });
        history.push(PeriodRecord {
            is_outlier: false,
            outlier_model: None,
            assortment: vec![3],
            choice: 0,
        });
        let visible: Vec<(Vec<usize>, usize)> = history
            .policy_view()
            .map(|(s, i)| (s.to_vec(), i))
            .collect();
        assert_eq!(visible, vec![(vec![1, 2], 2), (vec![3], 0)]);
        assert_eq!(history.outlier_periods(), 1);
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new(vec![], vec![], 1, 10).is_err());
        assert!(Instance::new(vec![1.5], vec![0.5], 1, 10).is_err());
        assert!(Instance::new(vec![0.5], vec![-0.1], 1, 10).is_err());
        assert!(Instance::new(vec![0.5], vec![0.5], 0, 10).is_err());
        assert!(Instance::new(vec![0.5], vec![0.5], 2, 10).is_err());
        assert!(Instance::new(vec![0.5], vec![0.5], 1, 0).is_err());
    }
}
