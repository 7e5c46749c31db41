//! Dynamic assortment optimization under a multinomial-logit choice model
//! contaminated by adversarial outlier customers.
//!
//! A retailer offers at most `K` of `N` products each period; typical
//! customers purchase following an MNL with unknown utilities, while up to
//! an ε-fraction of periods belong to outliers with arbitrary, possibly
//! adaptive choice behaviour. The crate provides:
//!
//! - [`choice`]: the ground-truth choice model, the customer protocol and
//!   the adversary implementations;
//! - [`optimizer`]: capacity-constrained assortment optimization (with and
//!   without a must-include item) via binary search on the revenue level,
//!   plus an exhaustive oracle for testing;
//! - [`policy_robust`]: the active-elimination policy for a known (or
//!   assumed) outlier proportion;
//! - [`policy_adaptive`]: the unknown-ε policy running parallel threads on
//!   a geometric ε-grid with a restart rule;
//! - [`policy_baselines`]: epoch-based UCB and Thompson-sampling baselines;
//! - [`simulator`]: the protocol loop, regret accounting, experiment
//!   instance generation, trial aggregation and CSV output.
//!
//! Everything is deterministic given a root seed; trials split the seed
//! into fixed streams so results are reproducible byte-for-byte regardless
//! of worker-thread count.

pub mod choice;
pub mod error;
pub mod optimizer;
pub mod policy;
pub mod policy_adaptive;
pub mod policy_baselines;
pub mod policy_robust;
pub mod simulator;

pub use choice::{
    choice_probabilities, expected_revenue, sample_choice, Adversary, AdversaryKind,
    AdversarySchedule, ChoiceDistribution, History, Instance, OutlierModel, NO_PURCHASE,
};
pub use error::{Error, Result};
pub use optimizer::{
    brute_force_opt, constrained_assortment_opt, feasibility_check, static_assortment_opt,
    OptResult, DEFAULT_DELTA,
};
pub use policy::{FixedPolicy, Policy};
pub use policy_adaptive::AdaptivePolicy;
pub use policy_baselines::{TsPolicy, UcbPolicy};
pub use policy_robust::{compute_width, update_estimate, RobustPolicy};
pub use simulator::{
    delta_star_diagnostic, generate_paper_instance, run_episode, run_trials, ExperimentConfig,
    PolicyName, RegretTrace, TrialsResult,
};
