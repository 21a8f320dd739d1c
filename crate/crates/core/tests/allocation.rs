use proptest::prelude::*;
use risalign::capacity::{
    allocate_elements, allocate_sca, capacity_lower_bound, round_allocation, water_level_solve, AllocationPlan,
    Arrangement, ScaSettings, StreamGains,
};

/// Brute-force bound maximization for two streams: `√p_1 = s`, `√p_2 = 1 − s` on a fine grid.
fn grid_optimum(gains: &StreamGains, snr: f64, n_t: usize) -> f64 {
    (0..=200_000)
        .map(|k| {
            let s = k as f64 / 200_000.0;
            capacity_lower_bound(&[s * s, (1.0 - s) * (1.0 - s)], gains, snr, n_t).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Textbook waterfilling `p_i = [μ − 1/w_i]⁺`, `Σ p_i = budget`, by bisection on `μ`.
fn bisection_waterfill(w: &[f64], budget: f64) -> Vec<f64> {
    let total = |mu: f64| w.iter().map(|wi| (mu - 1.0 / wi).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, budget + w.iter().map(|wi| 1.0 / wi).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    w.iter().map(|wi| (mu - 1.0 / wi).max(0.0)).collect()
}

#[test]
fn equal_gains_keep_symmetric_point() {
    for n in [2, 3, 5, 8] {
        let gains = StreamGains::from_products(vec![37.0; n]);
        let plan = allocate_sca(&gains, 10.0, n, ScaSettings::default(), None).unwrap();
        for p in &plan.fractions {
            assert!((p - 1.0 / (n * n) as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn two_stream_grid_oracle() {
    let cases = [
        (vec![100.0, 80.0], 10.0),
        (vec![1e4, 10.0], 1.0),
        (vec![3.0, 2.5], 100.0),
        (vec![5e5, 4e5], 0.1),
        (vec![50.0, 1.0], 10.0),
    ];
    for (products, snr) in cases {
        let gains = StreamGains::from_products(products.clone());
        let plan = allocate_elements(&gains, snr, 2, ScaSettings::default()).unwrap();
        let best = grid_optimum(&gains, snr, 2);
        assert!((plan.objective() - best).abs() < 1e-3, "{products:?}: {} vs {best}", plan.objective());
    }
}

#[test]
fn equal_weights_reduce_to_textbook_waterfilling() {
    let w = [4.0, 1.5, 0.7, 0.2, 9.0];
    let c = 0.8;
    let budget = 1.3;
    let eta = water_level_solve(&w, &[c; 5], budget).unwrap();
    let kkt: Vec<f64> = w.iter().map(|wi| (1.0 / (eta * c) - 1.0 / wi).max(0.0)).collect();
    let reference = bisection_waterfill(&w, budget / c);
    for (a, b) in kkt.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-9, "{kkt:?} vs {reference:?}");
    }
}

proptest! {
    #[test]
    fn water_level_residual(
        gains in prop::collection::vec(1e-3f64..1e3, 1..12),
        weight_seed in prop::collection::vec(0.05f64..5.0, 12),
        budget in 1e-3f64..10.0,
    ) {
        let weights = &weight_seed[..gains.len()];
        let eta = water_level_solve(&gains, weights, budget).unwrap();
        let spent: f64 = gains
            .iter()
            .zip(weights)
            .map(|(a, c)| c * (1.0 / (eta * c) - 1.0 / a).max(0.0))
            .sum();
        prop_assert!((spent - budget).abs() <= 1e-10 * budget.max(1.0));
    }

    #[test]
    fn sca_trace_monotone_and_feasible(
        products in prop::collection::vec(1e-2f64..1e6, 1..10),
        snr_db in -10.0f64..30.0,
    ) {
        let gains = StreamGains::from_products(products);
        let snr = 10f64.powf(snr_db / 10.0);
        let n_t = gains.len();
        match allocate_sca(&gains, snr, n_t, ScaSettings::default(), None) {
            Ok(plan) => {
                prop_assert!(plan.constraint_residual() <= 1e-9);
                prop_assert!(plan.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
                prop_assert!(plan.fractions.iter().all(|p| *p >= 0.0));
            }
            Err(risalign::Error::NotConverged { last, .. }) => {
                prop_assert!(last.constraint_residual() <= 1e-9);
                prop_assert!(last.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn multistart_never_worse_than_single_start(
        products in prop::collection::vec(1e-1f64..1e5, 1..8),
        snr_db in -10.0f64..30.0,
    ) {
        let gains = StreamGains::from_products(products);
        let snr = 10f64.powf(snr_db / 10.0);
        let best = allocate_elements(&gains, snr, gains.len(), ScaSettings::default()).unwrap();
        if let Ok(single) = allocate_sca(&gains, snr, gains.len(), ScaSettings::default(), None) {
            prop_assert!(best.objective() >= single.objective() - 1e-9);
        }
    }

    #[test]
    fn rounding_partitions_the_surface(
        raw in prop::collection::vec(0.0f64..1.0, 1..8),
        n_ris in 1usize..500,
        policy in 0u8..3,
        seed in any::<u64>(),
    ) {
        prop_assume!(raw.iter().any(|&p| p > 0.0));
        let plan = AllocationPlan::from_fractions(raw).unwrap();
        let arrangement = match policy {
            0 => Arrangement::Contiguous,
            1 => Arrangement::Interleaved,
            _ => Arrangement::Random { seed },
        };
        let rounded = round_allocation(&plan, n_ris, arrangement).unwrap();
        let e = rounded.elements.unwrap();
        prop_assert_eq!(e.counts.iter().sum::<usize>(), n_ris);
        let mut seen = vec![false; n_ris];
        for (set, &count) in e.index_sets.iter().zip(&e.counts) {
            prop_assert_eq!(set.len(), count);
            prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
            for &i in set {
                prop_assert!(!seen[i]);
                seen[i] = true;
            }
        }
        for (i, &count) in e.counts.iter().enumerate() {
            let quota = plan.fractions[i].sqrt() * n_ris as f64;
            prop_assert!((count as f64 - quota).abs() < 1.0 + 1e-9);
        }
    }
}
