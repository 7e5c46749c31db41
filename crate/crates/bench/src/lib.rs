//! Shared fixtures for the benchmark targets.

use assortment_core::simulator::{generate_paper_instance, streams, trial_rng};
use assortment_core::Instance;
use rand::Rng;

/// Experiment-style instance plus its outlier weights.
pub fn bench_instance(n: usize, k: usize, horizon: usize, seed: u64) -> (Instance, Vec<f64>) {
    let mut rng = trial_rng(seed, streams::INSTANCE);
    generate_paper_instance(n, k, horizon, &mut rng).expect("valid bench dimensions")
}

/// Random revenue/utility vectors in [0,1] for optimizer microbenchmarks.
pub fn random_parameters(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = trial_rng(seed, 0);
    let revenues = (0..n).map(|_| rng.gen()).collect();
    let utilities = (0..n).map(|_| rng.gen()).collect();
    (revenues, utilities)
}
