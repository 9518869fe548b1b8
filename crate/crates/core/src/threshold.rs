//! Concatenation recursion, threshold value and level solver.
//!
//! Iterates are carried as natural logarithms so that doubly-exponential
//! decay stays representable long after `x_r` underflows `f64`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fault::binomial;

/// Below this value an iterate counts as converged regardless of the target.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Iterates above this value are reported as diverged.
pub const DIVERGENCE_CUTOFF: f64 = 1.0;

const MAX_LEVEL_SEARCH: usize = 64;
const EMPIRICAL_LEVELS: usize = 2000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseRule {
    /// `C(A,2)·(2η)²·(1+2η)^(A−2)`: any two faulty locations, each bounded by
    /// the two-qubit gate fault norm `2η`.
    #[default]
    Lemma2Product,
    /// `2·(A·η)²`: the clustered-bath bound on two or more faults.
    ClusterLemma,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub a_c: usize,
    pub eta: f64,
    pub n: u64,
    pub epsilon_target: f64,
}

impl ThresholdParams {
    pub fn new(a_c: usize, eta: f64, n: u64, epsilon_target: f64) -> Result<Self> {
        let p = Self {
            a_c,
            eta,
            n,
            epsilon_target,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_a_c(self.a_c)?;
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::param("eta", format!("{} (must be finite and >= 0)", self.eta)));
        }
        if self.n == 0 {
            return Err(Error::param("N", "at least one base location is required"));
        }
        if !(self.epsilon_target > 0.0 && self.epsilon_target < 1.0) {
            return Err(Error::param(
                "epsilon_target",
                format!("{} (must lie in (0, 1))", self.epsilon_target),
            ));
        }
        Ok(())
    }
}

fn check_a_c(a_c: usize) -> Result<()> {
    if a_c < 2 {
        return Err(Error::param("A_C", format!("{a_c} (must be at least 2)")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionLevel {
    pub r: usize,
    /// Bad-part norm bound; 0 once it underflows.
    pub x: f64,
    /// `ln x`, exact even after `x` underflows.
    pub ln_x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionTrace {
    pub levels: Vec<RecursionLevel>,
    pub converged: bool,
    pub diverged: bool,
}

impl RecursionTrace {
    pub fn last(&self) -> &RecursionLevel {
        self.levels.last().expect("trace holds at least one level")
    }
}

pub fn threshold_value(a_c: usize) -> Result<f64> {
    check_a_c(a_c)?;
    let a = a_c as f64;
    Ok(1.0 / (E * a * (a - 1.0)))
}

/// `C(A,2)·x²·(1+x)^(A−2)`.
pub fn recursion_step(x: f64, a_c: usize) -> Result<f64> {
    check_a_c(a_c)?;
    if !(x >= 0.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            reason: "norm bounds are nonnegative",
        });
    }
    Ok(binomial(a_c as u64, 2) * x * x * (1.0 + x).powi(a_c as i32 - 2))
}

fn ln_step(ln_x: f64, a_c: usize) -> f64 {
    if ln_x == f64::NEG_INFINITY {
        return ln_x;
    }
    let x = ln_x.exp();
    (binomial(a_c as u64, 2)).ln() + 2.0 * ln_x + (a_c as f64 - 2.0) * x.ln_1p()
}

/// First-level bound `x_1` under `rule`.
pub fn base_bound(rule: BaseRule, a_c: usize, eta: f64) -> Result<f64> {
    check_base(a_c, eta)?;
    let a = a_c as f64;
    Ok(match rule {
        BaseRule::Lemma2Product => {
            let p = 2.0 * eta;
            binomial(a_c as u64, 2) * p * p * (1.0 + p).powi(a_c as i32 - 2)
        }
        BaseRule::ClusterLemma => 2.0 * (a * eta) * (a * eta),
    })
}

fn check_base(a_c: usize, eta: f64) -> Result<()> {
    check_a_c(a_c)?;
    if !(eta >= 0.0) {
        return Err(Error::param("eta", format!("{eta} (must be >= 0)")));
    }
    Ok(())
}

fn ln_base(rule: BaseRule, a_c: usize, eta: f64) -> Result<f64> {
    check_base(a_c, eta)?;
    let a = a_c as f64;
    Ok(match rule {
        BaseRule::Lemma2Product => {
            let p = 2.0 * eta;
            binomial(a_c as u64, 2).ln() + 2.0 * p.ln() + (a - 2.0) * p.ln_1p()
        }
        BaseRule::ClusterLemma => 2f64.ln() + 2.0 * (a * eta).ln(),
    })
}

/// `2·(A·η)²`.
pub fn cluster_base_bound(a_c: usize, eta: f64) -> Result<f64> {
    base_bound(BaseRule::ClusterLemma, a_c, eta)
}

pub fn iterate_recursion(params: &ThresholdParams, r_max: usize, base_rule: BaseRule) -> Result<RecursionTrace> {
    params.validate()?;
    if r_max == 0 {
        return Err(Error::param("r_max", "at least one level is required"));
    }
    let a_c = params.a_c;
    let mut ln_x = ln_base(base_rule, a_c, params.eta)?;
    let mut levels = Vec::with_capacity(r_max);
    let mut diverged = false;
    for r in 1..=r_max {
        levels.push(RecursionLevel {
            r,
            x: ln_x.exp(),
            ln_x,
        });
        if ln_x > DIVERGENCE_CUTOFF.ln() {
            diverged = true;
            break;
        }
        ln_x = ln_step(ln_x, a_c);
    }
    let last = *levels.last().expect("r_max >= 1");
    let converged = !diverged
        && (last.ln_x < UNDERFLOW_FLOOR.ln()
            || (last.x < params.epsilon_target && ln_step(last.ln_x, a_c) < last.ln_x));
    Ok(RecursionTrace {
        levels,
        converged,
        diverged,
    })
}

/// Nonzero fixed point `x*` of [`recursion_step`]; iterates below it shrink.
pub fn fixed_point(a_c: usize) -> Result<f64> {
    check_a_c(a_c)?;
    let c = binomial(a_c as u64, 2);
    let g = |x: f64| c * x * (1.0 + x).powi(a_c as i32 - 2) - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest `η` (to within `tol`) at which the recursion still converges.
pub fn empirical_threshold(a_c: usize, base_rule: BaseRule, tol: f64) -> Result<f64> {
    check_a_c(a_c)?;
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("{tol} (must be > 0)")));
    }
    let converges = |eta: f64| -> Result<bool> {
        let p = ThresholdParams {
            a_c,
            eta,
            n: 1,
            epsilon_target: 0.5,
        };
        Ok(iterate_recursion(&p, EMPIRICAL_LEVELS, base_rule)?.converged)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if converges(hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if converges(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `N·x·(1+x)^(N−1)`: bound on the bad part of `N` rectangles.
pub fn global_bad_bound(n: u64, r_bad: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("N", "at least one rectangle is required"));
    }
    if !(r_bad >= 0.0) {
        return Err(Error::Domain {
            name: "r_bad",
            value: r_bad,
            reason: "norm bounds are nonnegative",
        });
    }
    Ok(n as f64 * r_bad * (1.0 + r_bad).powf(n as f64 - 1.0))
}

fn ln_global_bad(n: u64, ln_x: f64) -> f64 {
    if ln_x == f64::NEG_INFINITY {
        return ln_x;
    }
    (n as f64).ln() + ln_x + (n as f64 - 1.0) * ln_x.exp().ln_1p()
}

/// `√(2ε) + 16ε`: distance between the noisy and ideal output distributions.
pub fn output_distance_bound(eps: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Domain {
            name: "eps",
            value: eps,
            reason: "the bad-part norm must satisfy 0 <= eps < 1/2",
        });
    }
    Ok((2.0 * eps).sqrt() + 16.0 * eps)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub r: usize,
    pub total_locations: u128,
    pub eps_prime: f64,
    /// Global bad-part bound reached at level `r`.
    pub global_bad: f64,
}

/// Solves `√(2ε′)+16ε′ = ε` by bisection.
pub fn solve_eps_prime(epsilon_target: f64) -> Result<f64> {
    if !(epsilon_target > 0.0) {
        return Err(Error::param("epsilon_target", "must be positive"));
    }
    let f = |e: f64| (2.0 * e).sqrt() + 16.0 * e;
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    if f(hi) <= epsilon_target {
        return Err(Error::param(
            "epsilon_target",
            format!("{epsilon_target} is beyond the range of the output-distance bound"),
        ));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= epsilon_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Smallest concatenation level whose global bad-part bound meets the target.
pub fn required_level(params: &ThresholdParams, base_rule: BaseRule) -> Result<LevelReport> {
    params.validate()?;
    let threshold = threshold_value(params.a_c)?;
    if params.eta >= threshold {
        return Err(Error::NoConvergence(format!(
            "eta = {} is not below the threshold {threshold:e}",
            params.eta
        )));
    }
    let eps_prime = solve_eps_prime(params.epsilon_target)?;
    let ln_target = eps_prime.ln();
    let trace = iterate_recursion(params, MAX_LEVEL_SEARCH, base_rule)?;
    for level in &trace.levels {
        let ln_gb = ln_global_bad(params.n, level.ln_x);
        if ln_gb <= ln_target {
            let total_locations = (params.a_c as u128)
                .checked_pow(level.r as u32)
                .and_then(|p| p.checked_mul(params.n as u128))
                .ok_or_else(|| Error::param("N", "location count overflows"))?;
            return Ok(LevelReport {
                r: level.r,
                total_locations,
                eps_prime,
                global_bad: ln_gb.exp(),
            });
        }
    }
    Err(Error::NoConvergence(format!(
        "global bad bound stays above {eps_prime:e} for r <= {MAX_LEVEL_SEARCH}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_examples() {
        assert!((threshold_value(2).unwrap() - 0.183_939_720_585_721_2).abs() < 1e-15);
        assert!(threshold_value(1).is_err());
        assert!(threshold_value(10).unwrap() < threshold_value(5).unwrap());
    }

    #[test]
    fn step_examples() {
        assert_eq!(recursion_step(0.0, 10).unwrap(), 0.0);
        assert!((recursion_step(1.0, 2).unwrap() - 1.0).abs() < 1e-15);
        let expect = 45.0 * 1e-4 * 1.01f64.powi(8);
        assert!((recursion_step(0.01, 10).unwrap() - expect).abs() < 1e-15);
        assert!(recursion_step(-0.1, 10).is_err());
    }

    #[test]
    fn noiseless_trace_is_zero() {
        let p = ThresholdParams::new(7, 0.0, 1, 0.1).unwrap();
        let t = iterate_recursion(&p, 5, BaseRule::Lemma2Product).unwrap();
        assert!(t.levels.iter().all(|l| l.x == 0.0));
        assert!(t.converged && !t.diverged);
    }

    #[test]
    fn diverges_above_fixed_point() {
        let p = ThresholdParams::new(10, 0.2, 1, 0.1).unwrap();
        let t = iterate_recursion(&p, 10, BaseRule::Lemma2Product).unwrap();
        assert!(t.diverged && !t.converged);
    }

    #[test]
    fn fixed_point_is_fixed() {
        for a in [2, 5, 10, 100] {
            let x = fixed_point(a).unwrap();
            assert!((recursion_step(x, a).unwrap() - x).abs() < 1e-12 * x.max(1e-12));
        }
        assert!((fixed_point(2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_bad_examples() {
        assert_eq!(global_bad_bound(10, 0.0).unwrap(), 0.0);
        assert!((global_bad_bound(1, 0.3).unwrap() - 0.3).abs() < 1e-15);
        let v = global_bad_bound(100, 1e-4).unwrap();
        assert!((v - 100.0 * 1e-4 * 1.0001f64.powi(99)).abs() < 1e-15);
    }

    #[test]
    fn output_distance_examples() {
        assert_eq!(output_distance_bound(0.0).unwrap(), 0.0);
        assert_eq!(output_distance_bound(0.02).unwrap(), 0.52);
        assert!(output_distance_bound(0.5).is_err());
        assert!(output_distance_bound(-0.1).is_err());
    }

    #[test]
    fn eps_prime_inverts_the_bound() {
        let e = solve_eps_prime(0.1).unwrap();
        assert!((output_distance_bound(e).unwrap() - 0.1).abs() < 1e-10);
    }

    #[test]
    fn level_errors_above_threshold() {
        let t = threshold_value(10).unwrap();
        let p = ThresholdParams::new(10, t * 1.01, 1, 0.1).unwrap();
        assert!(matches!(
            required_level(&p, BaseRule::Lemma2Product),
            Err(Error::NoConvergence(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ThresholdParams::new(1, 0.1, 1, 0.1).is_err());
        assert!(ThresholdParams::new(5, -0.1, 1, 0.1).is_err());
        assert!(ThresholdParams::new(5, 0.1, 0, 0.1).is_err());
        assert!(ThresholdParams::new(5, 0.1, 1, 1.0).is_err());
    }
}
