mod common;

use common::cos_map;
use proptest::prelude::*;
use shorttime::girsanov::{
    approx_exponential, approx_exponential_euler, lp_error, simulate_exponential, BrownianPath, McConfig,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exponentials_are_positive(seed in any::<u64>(), t in 1e-3..1.0f64, alpha in -3.0..3.0f64, b in -5.0..5.0f64) {
        let m = cos_map().with_alpha(alpha);
        let path = BrownianPath::generate(t, 64, seed).unwrap();
        prop_assert!(simulate_exponential(&m, &path).unwrap() > 0.0);
        prop_assert!(approx_exponential(&m, b, t).unwrap() > 0.0);
        prop_assert!(approx_exponential_euler(&m, b, t).unwrap() > 0.0);
    }
}

#[test]
fn identical_seeds_give_identical_estimates() {
    let m = cos_map().with_alpha(1.0);
    let cfg = McConfig { n_paths: 500, n_steps: 128, base_seed: 11, p: 2.0 };
    assert_eq!(lp_error(&m, 0.1, &cfg).unwrap(), lp_error(&m, 0.1, &cfg).unwrap());
    let other = McConfig { base_seed: 12, ..cfg };
    assert_ne!(lp_error(&m, 0.1, &cfg).unwrap(), lp_error(&m, 0.1, &other).unwrap());
}

#[test]
fn error_shrinks_with_horizon() {
    let m = cos_map().with_alpha(1.0);
    let err = |t: f64| {
        let cfg = McConfig { n_paths: 4000, n_steps: 512, base_seed: 3, p: 1.0 };
        lp_error(&m, t, &cfg).unwrap().mean
    };
    let (a, b, c) = (err(0.2), err(0.05), err(0.0125));
    assert!(a > b && b > c, "{a} {b} {c}");
}

#[test]
fn ito_sums_converge_under_refinement() {
    // Same Brownian path sampled at dyadic refinements: M_T from the fine sums
    // settles, so the step count rather than the path drives the difference.
    let m = cos_map();
    let t = 0.1;
    let fine = BrownianPath::generate(t, 1 << 14, 5).unwrap();
    let coarsen = |k: usize| {
        let step = fine.increments.len() / k;
        let inc: Vec<f64> = fine.increments.chunks(step).map(|c| c.iter().sum()).collect();
        BrownianPath { increments: inc, n_steps: k, ..fine.clone() }
    };
    let reference = simulate_exponential(&m, &fine).unwrap();
    let diffs: Vec<f64> = [1 << 6, 1 << 8, 1 << 10, 1 << 12]
        .iter()
        .map(|&k| (simulate_exponential(&m, &coarsen(k)).unwrap() - reference).abs())
        .collect();
    assert!(diffs[3] < diffs[0], "{diffs:?}");
    assert!(diffs[3] < 1e-2, "{diffs:?}");
}
