//! Adaptive Gauss–Kronrod (7/15) integration.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// `∫_a^b f`, bisecting the interval with the largest error estimate until
/// the summed estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::SingularIntegrand("infinite integration bound".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let eval = |lo: f64, hi: f64| -> Result<(f64, f64, f64, f64)> {
        let (v, e) = gk15(&f, lo, hi);
        if v.is_finite() && e.is_finite() {
            Ok((lo, hi, v, e))
        } else {
            Err(Error::SingularIntegrand(format!("integrand not finite near [{lo}, {hi}]")))
        }
    };
    let mut parts = vec![eval(a, b)?];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        let tol = abs_tol.max(rel_tol * value.abs()).max(64.0 * f64::EPSILON * value.abs());
        if error <= tol {
            return Ok(value);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::SingularIntegrand(format!(
                "no convergence on [{a}, {b}] (error estimate {error:e})"
            )));
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::SingularIntegrand(format!("interval collapsed near {lo}")));
        }
        parts.push(eval(lo, mid)?);
        parts.push(eval(mid, hi)?);
    }
}
