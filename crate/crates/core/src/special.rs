//! Special functions not provided by the standard library.

use crate::error::{Error, Result};

/// Trigamma function `ψ'(x)` for `x > 0`.
///
/// Shifts the argument above 12 with `ψ'(x) = ψ'(x+1) + 1/x²`, then sums the
/// asymptotic series in `1/x`. Relative accuracy is near machine precision.
pub fn trigamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            name: "x",
            value: x,
            reason: "trigamma is evaluated for finite positive arguments only",
        });
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let z = 1.0 / (x * x);
    // Bernoulli-number tail: B2k / x^(2k+1)
    let tail = z
        * (1.0 / 6.0
            - z * (1.0 / 30.0
                - z * (1.0 / 42.0 - z * (1.0 / 30.0 - z * (5.0 / 66.0 - z * 691.0 / 2730.0)))));
    Ok(acc + 1.0 / x + z / 2.0 + tail / x)
}
