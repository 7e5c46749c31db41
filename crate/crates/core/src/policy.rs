//! The admissible-policy interface shared by all assortment policies.

use rand::RngCore;

/// An admissible policy: each period it emits an assortment from the
/// policy-visible filtration (its own observations) and then receives the
/// realized purchase. It never sees whether a customer was an outlier.
pub trait Policy {
    /// Short identifier used in trace output ("active_elim", "ucb", ...).
    fn label(&self) -> &str;

    /// Assortment to offer this period. Called exactly once per period,
    /// before [`Policy::observe`].
    fn select(&mut self, rng: &mut dyn RngCore) -> Vec<usize>;

    /// Purchase outcome of the period just served (0 = no purchase).
    fn observe(&mut self, choice: usize);
}

/// Offers the same assortment every period. With the true optimal
/// assortment this is the zero-regret oracle; with the empty assortment it
/// is the do-nothing baseline.
#[derive(Debug, Clone)]
pub struct FixedPolicy {
    assortment: Vec<usize>,
    label: String,
}

impl FixedPolicy {
    pub fn new(assortment: Vec<usize>, label: impl Into<String>) -> Self {
        FixedPolicy {
            assortment,
            label: label.into(),
        }
    }
}

impl Policy for FixedPolicy {
    fn label(&self) -> &str {
        &self.label
    }

    fn select(&mut self, _rng: &mut dyn RngCore) -> Vec<usize> {
        self.assortment.clone()
    }

    fn observe(&mut self, _choice: usize) {}
}
