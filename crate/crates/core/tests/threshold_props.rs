use std::f64::consts::{E, LN_2};

use ftnm_core::threshold::{
    base_bound, cluster_base_bound, empirical_threshold, fixed_point, global_bad_bound, iterate_recursion,
    output_distance_bound, recursion_step, required_level, solve_eps_prime, threshold_value, BaseRule,
    ThresholdParams,
};
use ftnm_core::Error;
use proptest::prelude::*;

const RULES: [BaseRule; 2] = [BaseRule::Lemma2Product, BaseRule::ClusterLemma];

fn params(a_c: usize, eta: f64, n: u64, eps: f64) -> ThresholdParams {
    ThresholdParams::new(a_c, eta, n, eps).unwrap()
}

#[test]
fn threshold_examples() {
    for (a, expect) in [(2usize, 1.0 / (2.0 * E)), (10, 4.0876e-3), (100, 3.7163e-5)] {
        let v = threshold_value(a).unwrap();
        assert!((v - expect).abs() / expect < 1e-4, "A={a}: {v}");
    }
}

#[test]
fn step_example() {
    // 45·1e-4·1.01⁸ = 4.87286e-3, quoted to four digits as 4.8730e-3
    let v = recursion_step(0.01, 10).unwrap();
    assert!((v - 4.8730e-3).abs() / 4.8730e-3 < 1e-4);
    assert!((v - 4.872_855_175e-3).abs() < 1e-12);
}

#[test]
fn trace_decreases_at_threshold() {
    let t = threshold_value(10).unwrap();
    for rule in RULES {
        let tr = iterate_recursion(&params(10, t, 1, 0.01), 10, rule).unwrap();
        assert_eq!(tr.levels.len(), 10);
        assert!(tr.levels.windows(2).all(|w| w[1].ln_x < w[0].ln_x));
        assert!(tr.converged);
    }
}

#[test]
fn trace_diverges_above_fixed_point() {
    for rule in RULES {
        let tr = iterate_recursion(&params(10, 0.2, 1, 0.01), 10, rule).unwrap();
        assert!(tr.diverged && !tr.converged);
        assert!(tr.last().x > 1.0);
    }
}

#[test]
fn iterates_survive_underflow() {
    let t = threshold_value(5).unwrap();
    let tr = iterate_recursion(&params(5, 0.5 * t, 1, 0.01), 40, BaseRule::Lemma2Product).unwrap();
    let last = tr.last();
    assert_eq!(last.x, 0.0);
    assert!(last.ln_x.is_finite() && last.ln_x < -1e9);
    // successive ratios of ln(1/x) approach 2
    let d: Vec<f64> = tr
        .levels
        .windows(2)
        .map(|w| (-w[1].ln_x).ln() - (-w[0].ln_x).ln())
        .collect();
    assert!((d[d.len() - 1] - LN_2).abs() < 1e-6);
}

#[test]
fn empirical_threshold_dominates_formula() {
    for a in [2usize, 5, 10, 24, 100] {
        for rule in RULES {
            let emp = empirical_threshold(a, rule, 1e-9).unwrap();
            assert!(emp >= threshold_value(a).unwrap(), "A={a} {rule:?}");
        }
    }
}

#[test]
fn empirical_threshold_brackets_the_fixed_point() {
    // below the bracket the first iterate sits under the fixed point
    for a in [5usize, 10] {
        let emp = empirical_threshold(a, BaseRule::ClusterLemma, 1e-10).unwrap();
        let x1 = cluster_base_bound(a, emp).unwrap();
        assert!((x1 - fixed_point(a).unwrap()).abs() / x1 < 1e-6);
    }
}

#[test]
fn cluster_vs_product_rule_example() {
    let cluster = cluster_base_bound(10, 1e-3).unwrap();
    let l2 = base_bound(BaseRule::Lemma2Product, 10, 1e-3).unwrap();
    assert!((cluster - 2e-4).abs() < 1e-18);
    assert!((l2 - 45.0 * 4e-6 * 1.002f64.powi(8)).abs() < 1e-18);
    assert!(cluster > l2);
    assert_eq!(cluster_base_bound(10, 0.0).unwrap(), 0.0);
}

#[test]
fn global_bad_example() {
    let v = global_bad_bound(100, 1e-4).unwrap();
    assert!((v - 1.0100e-2).abs() < 1e-6);
}

#[test]
fn level_regression_anchor() {
    let t = threshold_value(10).unwrap();
    for rule in RULES {
        let rep = required_level(&params(10, t / 2.0, 1, 0.1), rule).unwrap();
        assert_eq!(rep.r, 1);
        assert_eq!(rep.total_locations, 10);
        assert!((rep.eps_prime - 0.002_150_819_713).abs() < 1e-11);
        assert!(rep.global_bad <= rep.eps_prime);
    }
}

#[test]
fn level_grows_slowly_with_n() {
    let t = threshold_value(10).unwrap();
    for rule in RULES {
        let mut prev = None;
        for k in 0..=10 {
            let n = 1u64 << k;
            let rep = required_level(&params(10, t / 2.0, n, 0.1), rule).unwrap();
            assert_eq!(rep.total_locations, n as u128 * 10u128.pow(rep.r as u32));
            if let Some(p) = prev {
                assert!(rep.r >= p && rep.r <= p + 1, "N={n}");
            }
            prev = Some(rep.r);
        }
    }
}

#[test]
fn level_is_minimal() {
    let t = threshold_value(5).unwrap();
    let p = params(5, 0.8 * t, 1000, 0.01);
    let rep = required_level(&p, BaseRule::Lemma2Product).unwrap();
    let tr = iterate_recursion(&p, rep.r, BaseRule::Lemma2Product).unwrap();
    if rep.r > 1 {
        let below = tr.levels[rep.r - 2].x;
        assert!(global_bad_bound(p.n, below).unwrap() > rep.eps_prime);
    }
    assert!(global_bad_bound(p.n, tr.last().x).unwrap() <= rep.eps_prime);
}

#[test]
fn level_rejects_eta_at_threshold() {
    let t = threshold_value(10).unwrap();
    assert!(matches!(
        required_level(&params(10, t, 1, 0.1), BaseRule::Lemma2Product),
        Err(Error::NoConvergence(_))
    ));
}

#[test]
fn eps_prime_solution() {
    for eps in [0.01, 0.1, 0.5, 0.9] {
        let e = solve_eps_prime(eps).unwrap();
        assert!(((2.0 * e).sqrt() + 16.0 * e - eps).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn threshold_decreases_in_a(a in 2usize..500) {
        prop_assert!(threshold_value(a + 1).unwrap() < threshold_value(a).unwrap());
    }

    #[test]
    fn step_is_monotone(x in 0.0f64..1.0, dx in 1e-9f64..0.1, a in 2usize..50) {
        let y = (x + dx).min(1.0);
        prop_assert!(recursion_step(y, a).unwrap() >= recursion_step(x, a).unwrap());
    }

    #[test]
    fn output_bound_is_monotone(x in 0.0f64..0.499, dx in 1e-9f64..0.01) {
        let y = (x + dx).min(0.4999);
        prop_assert!(output_distance_bound(y).unwrap() >= output_distance_bound(x).unwrap());
    }

    #[test]
    fn traces_are_nonnegative(a in 2usize..30, eta in 0.0f64..0.05, rule_idx in 0usize..2) {
        let tr = iterate_recursion(&params(a, eta, 1, 0.1), 12, RULES[rule_idx]).unwrap();
        prop_assert!(tr.levels.iter().all(|l| l.x >= 0.0));
        prop_assert!(!(tr.converged && tr.diverged));
    }
}
