#![allow(dead_code)]

pub mod oracle;

use ftnm_core::Operator;
use oracle::Rows;

pub fn rows(op: &Operator) -> Rows {
    let d = op.dim();
    (0..d).map(|i| (0..d).map(|j| op.get(i, j)).collect()).collect()
}

pub fn from_rows(r: &Rows) -> Operator {
    let d = r.len();
    let flat: Vec<_> = r.iter().flatten().copied().collect();
    Operator::from_row_major(d, &flat).expect("square")
}

/// Operator norm from the oracle singular values.
pub fn oracle_norm(op: &Operator) -> f64 {
    oracle::singular_values(&rows(op))[0]
}
