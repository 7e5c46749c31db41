//! Capacity-constrained assortment optimization over estimated utilities.
//!
//! The fractional objective `R(S; v̂) = Σ_{j∈S} r_j v̂_j / (1 + Σ_{j∈S} v̂_j)`
//! is maximized by a binary search on the revenue level α: `R(S) ≥ α` for
//! some admissible `S` iff `Σ_{j∈S} (r_j − α) v̂_j ≥ α`, and that check is
//! solved exactly by greedily taking the largest positive `ψ_j = (r_j − α) v̂_j`
//! (plus the must-include item when one is required). After the bisection
//! interval shrinks below `δ`, a short Dinkelbach-style polish re-runs the
//! feasibility check at the achieved revenue until it stops improving, which
//! lands on the exact optimizer rather than a δ-suboptimal witness.
//!
//! Ground-set restriction (optimizing over an active subset `A ⊆ [N]`) is a
//! parameter on every entry point; items outside the ground set are simply
//! never considered.

use crate::choice::expected_revenue;
use crate::error::{Error, Result};

/// Default bisection stopping accuracy (≈30 halvings of [0,1]).
pub const DEFAULT_DELTA: f64 = 1e-9;

/// Largest ground set [`brute_force_opt`] will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Result of an assortment optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    /// Optimizing assortment, sorted ascending; `|S| ≤ K`.
    pub assortment: Vec<usize>,
    /// `R(S; v̂)` of the returned assortment.
    pub estimated_revenue: f64,
    /// Final `[α_ℓ, α_u]` of the binary search (degenerate for the
    /// brute-force oracle).
    pub alpha_interval: (f64, f64),
}

fn check_inputs(
    revenues: &[f64],
    est_utilities: &[f64],
    ground_set: &[usize],
    capacity: usize,
) -> Result<()> {
    if revenues.len() != est_utilities.len() {
        return Err(Error::invalid_input(
            "revenues and estimated utilities differ in length",
        ));
    }
    if capacity == 0 {
        return Err(Error::invalid_input("capacity must be at least 1"));
    }
    for (idx, &r) in revenues.iter().enumerate() {
        if !r.is_finite() || !(0.0..=1.0).contains(&r) {
            return Err(Error::invalid_input(format!(
                "revenue of item {} is {r}, expected [0,1]",
                idx + 1
            )));
        }
    }
    for (idx, &v) in est_utilities.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::invalid_input(format!(
                "estimated utility of item {} is {v}, expected nonnegative",
                idx + 1
            )));
        }
    }
    let n = revenues.len();
    for (pos, &item) in ground_set.iter().enumerate() {
        if item == 0 || item > n {
            return Err(Error::InvalidItem { item, n_items: n });
        }
        if ground_set[..pos].contains(&item) {
            return Err(Error::invalid_input(format!(
                "item {item} appears twice in the ground set"
            )));
        }
    }
    Ok(())
}

/// Can some `S` within the ground set, `|S| ≤ K` (containing
/// `must_include` if given), achieve `Σ_{j∈S} (r_j − α) v̂_j ≥ α`?
///
/// Returns the flag together with the greedy witness: `must_include` plus
/// the `K−1` largest strictly positive `ψ_j` (or the top `K` positive
/// `ψ_j` without the constraint). Items with `ψ_j = 0` add nothing and are
/// left out. The witness maximizes the left-hand side, so the flag is
/// exact. Ties in `ψ_j` break toward the smaller item id, which keeps runs
/// reproducible.
pub fn feasibility_check(
    revenues: &[f64],
    est_utilities: &[f64],
    ground_set: &[usize],
    capacity: usize,
    alpha: f64,
    must_include: Option<usize>,
) -> Result<(bool, Vec<usize>)> {
    check_inputs(revenues, est_utilities, ground_set, capacity)?;
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid_input(format!(
            "alpha {alpha} outside [0,1]"
        )));
    }
    if let Some(i) = must_include {
        if !ground_set.contains(&i) {
            return Err(Error::InvalidItem {
                item: i,
                n_items: revenues.len(),
            });
        }
    }

    let psi = |j: usize| (revenues[j - 1] - alpha) * est_utilities[j - 1];

    let mut positives: Vec<(usize, f64)> = ground_set
        .iter()
        .filter(|&&j| Some(j) != must_include)
        .map(|&j| (j, psi(j)))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    positives.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let budget = capacity - usize::from(must_include.is_some());
    let mut total = must_include.map_or(0.0, psi);
    let mut witness: Vec<usize> = must_include.into_iter().collect();
    for &(j, p) in positives.iter().take(budget) {
        total += p;
        witness.push(j);
    }
    witness.sort_unstable();
    Ok((total >= alpha, witness))
}

/// Shared bisection body for the constrained and unconstrained problems.
fn bisect(
    revenues: &[f64],
    est_utilities: &[f64],
    ground_set: &[usize],
    capacity: usize,
    must_include: Option<usize>,
    delta: f64,
) -> Result<OptResult> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::invalid_input(format!("delta {delta} must be > 0")));
    }
    let mut alpha_l = 0.0f64;
    let mut alpha_u = 1.0f64;
    let mut best: Option<Vec<usize>> = None;
    while alpha_u - alpha_l >= delta {
        let mid = 0.5 * (alpha_l + alpha_u);
        let (feasible, witness) = feasibility_check(
            revenues,
            est_utilities,
            ground_set,
            capacity,
            mid,
            must_include,
        )?;
        if feasible {
            best = Some(witness);
            alpha_l = mid;
        } else {
            alpha_u = mid;
        }
    }
    // Never feasible at any probed level: the optimum lives in [0, δ).
    // Algorithm 2's pseudo-code would return its empty initialization here,
    // which breaks the must-include contract; fall back to the singleton.
    let seed = best.unwrap_or_else(|| must_include.into_iter().collect());

    // Dinkelbach polish: re-run the greedy witness at the achieved revenue
    // level until it no longer improves. Finitely many greedy sets, strictly
    // increasing revenue, so this terminates — at a fixed point the witness
    // is the exact optimizer.
    let mut assortment = seed;
    let mut revenue = expected_revenue(&assortment, revenues, est_utilities)?;
    for _ in 0..64 {
        let (feasible, witness) = feasibility_check(
            revenues,
            est_utilities,
            ground_set,
            capacity,
            revenue.min(1.0),
            must_include,
        )?;
        if !feasible {
            break;
        }
        let improved = expected_revenue(&witness, revenues, est_utilities)?;
        if improved > revenue {
            assortment = witness;
            revenue = improved;
        } else {
            break;
        }
    }

    Ok(OptResult {
        assortment,
        estimated_revenue: revenue,
        alpha_interval: (alpha_l, alpha_u),
    })
}

/// `argmax R(S; v̂)` over `S ⊆ ground_set`, `|S| ≤ K`, `must_include ∈ S`.
pub fn constrained_assortment_opt(
    revenues: &[f64],
    est_utilities: &[f64],
    ground_set: &[usize],
    capacity: usize,
    must_include: usize,
    delta: f64,
) -> Result<OptResult> {
    check_inputs(revenues, est_utilities, ground_set, capacity)?;
    if !ground_set.contains(&must_include) {
        return Err(Error::InvalidItem {
            item: must_include,
            n_items: revenues.len(),
        });
    }
    bisect(
        revenues,
        est_utilities,
        ground_set,
        capacity,
        Some(must_include),
        delta,
    )
}

/// `argmax R(S; v̂)` over `S ⊆ ground_set`, `|S| ≤ K`. May return the empty
/// assortment (revenue 0) when nothing sells.
pub fn static_assortment_opt(
    revenues: &[f64],
    est_utilities: &[f64],
    ground_set: &[usize],
    capacity: usize,
    delta: f64,
) -> Result<OptResult> {
    check_inputs(revenues, est_utilities, ground_set, capacity)?;
    bisect(revenues, est_utilities, ground_set, capacity, None, delta)
}

/// Exact optimum by enumerating every subset of the ground set of size
/// ≤ K (containing `must_include` if given). Test oracle; refuses ground
/// sets larger than [`BRUTE_FORCE_LIMIT`].
pub fn brute_force_opt(
    revenues: &[f64],
    utilities: &[f64],
    ground_set: &[usize],
    capacity: usize,
    must_include: Option<usize>,
) -> Result<OptResult> {
    check_inputs(revenues, utilities, ground_set, capacity)?;
    let m = ground_set.len();
    if m > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLargeForBruteForce {
            size: m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if let Some(i) = must_include {
        if !ground_set.contains(&i) {
            return Err(Error::InvalidItem {
                item: i,
                n_items: revenues.len(),
            });
        }
    }

    let must_bit = must_include.map(|i| {
        ground_set
            .iter()
            .position(|&j| j == i)
            .expect("membership checked above")
    });
    let mut best_rev = f64::NEG_INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut subset: Vec<usize> = Vec::with_capacity(capacity);
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize > capacity {
            continue;
        }
        if let Some(bit) = must_bit {
            if mask & (1 << bit) == 0 {
                continue;
            }
        }
        subset.clear();
        for (bit, &item) in ground_set.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                subset.push(item);
            }
        }
        let rev = expected_revenue(&subset, revenues, utilities)?;
        if rev > best_rev {
            best_rev = rev;
            best = subset.clone();
        }
    }
    best.sort_unstable();
    Ok(OptResult {
        assortment: best,
        estimated_revenue: best_rev,
        alpha_interval: (best_rev, best_rev),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ground(n: usize) -> Vec<usize> {
        (1..=n).collect()
    }

    #[test]
    fn feasibility_examples() {
        // All revenues zero: the left-hand side cannot be positive.
        let (feasible, _) =
            feasibility_check(&[0.0, 0.0], &[1.0, 1.0], &ground(2), 2, 0.5, None).unwrap();
        assert!(!feasible);
        // (1 − 0.5)·1 = 0.5 ≥ 0.5.
        let (feasible, witness) =
            feasibility_check(&[1.0], &[1.0], &ground(1), 1, 0.5, Some(1)).unwrap();
        assert!(feasible);
        assert_eq!(witness, vec![1]);
    }

    #[test]
    fn must_include_out_of_range_is_an_error() {
        assert!(feasibility_check(&[1.0], &[1.0], &ground(1), 1, 0.5, Some(2)).is_err());
        assert!(constrained_assortment_opt(&[1.0], &[1.0], &ground(1), 1, 2, 1e-9).is_err());
    }

    #[test]
    fn single_item_constrained_returns_it() {
        let res = constrained_assortment_opt(&[1.0], &[1.0], &ground(1), 1, 1, 1e-9).unwrap();
        assert_eq!(res.assortment, vec![1]);
        assert!((res.estimated_revenue - 0.5).abs() < 1e-12);
        assert!(res.alpha_interval.1 - res.alpha_interval.0 < 1e-9);
        assert!(res.estimated_revenue >= res.alpha_interval.0);
    }

    #[test]
    fn constrained_matches_brute_force_on_fixed_instance() {
        let r = [1.0, 0.8, 0.1];
        let v = [0.1, 0.2, 0.9];
        let res = constrained_assortment_opt(&r, &v, &ground(3), 2, 3, 1e-9).unwrap();
        let oracle = brute_force_opt(&r, &v, &ground(3), 2, Some(3)).unwrap();
        assert!((res.estimated_revenue - oracle.estimated_revenue).abs() <= 1e-9);
        assert!(res.assortment.contains(&3));
        assert!(res.assortment.len() <= 2);
    }

    #[test]
    fn static_all_zero_utilities_returns_empty() {
        let res = static_assortment_opt(&[0.7, 0.3], &[0.0, 0.0], &ground(2), 2, 1e-9).unwrap();
        assert!(res.assortment.is_empty());
        assert_eq!(res.estimated_revenue, 0.0);
    }

    #[test]
    fn static_picks_dominant_item() {
        let r = [1.0, 0.1, 0.1, 0.1];
        let v = [1.0, 0.05, 0.05, 0.05];
        let res = static_assortment_opt(&r, &v, &ground(4), 2, 1e-9).unwrap();
        assert!(res.assortment.contains(&1));
        let oracle = brute_force_opt(&r, &v, &ground(4), 2, None).unwrap();
        assert!((res.estimated_revenue - oracle.estimated_revenue).abs() <= 1e-9);
    }

    #[test]
    fn brute_force_examples() {
        let res = brute_force_opt(&[1.0, 1.0], &[1.0, 1.0], &ground(2), 2, None).unwrap();
        assert_eq!(res.assortment, vec![1, 2]);
        assert!((res.estimated_revenue - 2.0 / 3.0).abs() < 1e-12);

        // Single item: offered or not, whichever earns more.
        let res = brute_force_opt(&[0.9], &[0.5], &ground(1), 1, None).unwrap();
        assert_eq!(res.assortment, vec![1]);
        let res = brute_force_opt(&[0.0], &[0.5], &ground(1), 1, None).unwrap();
        assert!(res.assortment.is_empty() || res.estimated_revenue == 0.0);
    }

    #[test]
    fn brute_force_refuses_large_ground_sets() {
        let n = BRUTE_FORCE_LIMIT + 1;
        let r = vec![0.5; n];
        let v = vec![0.5; n];
        assert!(matches!(
            brute_force_opt(&r, &v, &ground(n), 3, None),
            Err(Error::TooLargeForBruteForce { .. })
        ));
    }

    #[test]
    fn delta_must_be_positive() {
        assert!(static_assortment_opt(&[1.0], &[1.0], &ground(1), 1, 0.0).is_err());
        assert!(constrained_assortment_opt(&[1.0], &[1.0], &ground(1), 1, 1, -1.0).is_err());
    }

    #[test]
    fn agreement_with_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..300 {
            let n = rng.gen_range(1..=12);
            let k = rng.gen_range(1..=4.min(n));
            let r: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let g = ground(n);

            let alg = static_assortment_opt(&r, &v, &g, k, 1e-9).unwrap();
            let oracle = brute_force_opt(&r, &v, &g, k, None).unwrap();
            assert!(
                (alg.estimated_revenue - oracle.estimated_revenue).abs() <= 1e-6,
                "trial {trial}: static {} vs oracle {}",
                alg.estimated_revenue,
                oracle.estimated_revenue
            );

            for must in 1..=n {
                let alg =
                    constrained_assortment_opt(&r, &v, &g, k, must, 1e-9).unwrap();
                let oracle = brute_force_opt(&r, &v, &g, k, Some(must)).unwrap();
                assert!(
                    (alg.estimated_revenue - oracle.estimated_revenue).abs() <= 1e-6,
                    "trial {trial} item {must}: {} vs {}",
                    alg.estimated_revenue,
                    oracle.estimated_revenue
                );
                assert!(alg.assortment.contains(&must));
                assert!(alg.assortment.len() <= k);
            }
        }
    }

    #[test]
    fn feasibility_matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let k = rng.gen_range(1..=4.min(n));
            let must = rng.gen_range(1..=n);
            let alpha: f64 = rng.gen_range(0.01..1.0);
            let r: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
            let g = ground(n);

            let (flag, witness) =
                feasibility_check(&r, &v, &g, k, alpha, Some(must)).unwrap();

            // Exhaustive: any S containing `must`, |S| ≤ k, with
            // Σ (r_j − α) v_j ≥ α.
            let mut any = false;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize > k || mask & (1 << (must - 1)) == 0 {
                    continue;
                }
                let total: f64 = (0..n)
                    .filter(|&b| mask & (1 << b) != 0)
                    .map(|b| (r[b] - alpha) * v[b])
                    .sum();
                if total >= alpha {
                    any = true;
                    break;
                }
            }
            assert_eq!(flag, any, "n={n} k={k} α={alpha}");
            if flag {
                let total: f64 = witness.iter().map(|&j| (r[j - 1] - alpha) * v[j - 1]).sum();
                assert!(total >= alpha);
                assert!(witness.contains(&must));
                assert!(witness.len() <= k);
            }
        }
    }

    proptest! {
        // Lemma bound: |R(S;v̂) − R(S;v)| ≤ 2 Σ_{i∈S} |v̂_i − v_i| / (1 + Σ_{i∈S} v_i).
        #[test]
        fn revenue_perturbation_bound(
            items in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0), 1..10)
        ) {
            let r: Vec<f64> = items.iter().map(|x| x.0).collect();
            let v: Vec<f64> = items.iter().map(|x| x.1).collect();
            let v_hat: Vec<f64> = items.iter().map(|x| x.2).collect();
            let s: Vec<usize> = (1..=items.len()).collect();
            let true_rev = expected_revenue(&s, &r, &v).unwrap();
            let est_rev = expected_revenue(&s, &r, &v_hat).unwrap();
            let bound = 2.0 * s.iter().map(|&i| (v_hat[i-1] - v[i-1]).abs()).sum::<f64>()
                / (1.0 + s.iter().map(|&i| v[i-1]).sum::<f64>());
            prop_assert!((est_rev - true_rev).abs() <= bound + 1e-12);
        }

        // Feasibility is monotone in α: feasible at α' ≥ α implies feasible at α.
        #[test]
        fn feasibility_monotone_in_alpha(
            items in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..10),
            a in 0.0f64..=1.0,
            b in 0.0f64..=1.0,
            k in 1usize..5,
        ) {
            let r: Vec<f64> = items.iter().map(|x| x.0).collect();
            let v: Vec<f64> = items.iter().map(|x| x.1).collect();
            let g: Vec<usize> = (1..=items.len()).collect();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let k = k.min(items.len());
            let (feas_hi, _) = feasibility_check(&r, &v, &g, k, hi, None).unwrap();
            let (feas_lo, _) = feasibility_check(&r, &v, &g, k, lo, None).unwrap();
            prop_assert!(!feas_hi || feas_lo);
        }

        // Restricting the ground set never increases the optimum.
        #[test]
        fn subset_ground_never_improves(
            items in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 2..10),
            keep_mask in prop::collection::vec(prop::bool::ANY, 2..10),
            k in 1usize..5,
        ) {
            let n = items.len();
            let r: Vec<f64> = items.iter().map(|x| x.0).collect();
            let v: Vec<f64> = items.iter().map(|x| x.1).collect();
            let full: Vec<usize> = (1..=n).collect();
            let sub: Vec<usize> = full.iter().copied()
                .filter(|&j| *keep_mask.get(j - 1).unwrap_or(&false))
                .collect();
            prop_assume!(!sub.is_empty());
            let k = k.min(n);
            let whole = static_assortment_opt(&r, &v, &full, k, 1e-9).unwrap();
            let restricted = static_assortment_opt(&r, &v, &sub, k, 1e-9).unwrap();
            prop_assert!(restricted.estimated_revenue <= whole.estimated_revenue + 1e-12);
        }

        // Returned assortments respect capacity and the must-include constraint.
        #[test]
        fn postconditions_hold(
            items in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..10),
            k in 1usize..5,
            pick in prop::num::usize::ANY,
        ) {
            let n = items.len();
            let r: Vec<f64> = items.iter().map(|x| x.0).collect();
            let v: Vec<f64> = items.iter().map(|x| x.1).collect();
            let g: Vec<usize> = (1..=n).collect();
            let k = k.min(n);
            let must = (pick % n) + 1;
            let res = constrained_assortment_opt(&r, &v, &g, k, must, 1e-9).unwrap();
            prop_assert!(res.assortment.contains(&must));
            prop_assert!(res.assortment.len() <= k);
            prop_assert!(res.estimated_revenue >= res.alpha_interval.0 - 1e-15);
            prop_assert!(res.alpha_interval.1 - res.alpha_interval.0 < 1e-9);
        }
    }
}
