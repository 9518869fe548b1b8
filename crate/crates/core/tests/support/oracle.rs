//! Independent reference computations for tests: cyclic Jacobi eigenvalues on
//! a real embedding and a Taylor matrix exponential. Nothing here touches
//! nalgebra.
#![allow(dead_code, clippy::needless_range_loop)]

use num_complex::Complex64 as C;

pub type Rows = Vec<Vec<C>>;

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().max(1e-300);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum().max(0.0) * 2.0 - 1.0;
                let t = t / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a complex Hermitian matrix via the real embedding
/// `[[Re, −Im], [Im, Re]]`, whose spectrum is each eigenvalue twice.
pub fn hermitian_eigenvalues(h: &Rows) -> Vec<f64> {
    let n = h.len();
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[i][j];
            r[i][j] = z.re;
            r[i + n][j + n] = z.re;
            r[i][j + n] = -z.im;
            r[i + n][j] = z.im;
        }
    }
    jacobi_eigenvalues(r).into_iter().step_by(2).collect()
}

/// Singular values, descending, as the positive eigenvalues of `[[0, A], [A†, 0]]`.
pub fn singular_values(a: &Rows) -> Vec<f64> {
    let n = a.len();
    let mut h = vec![vec![C::new(0.0, 0.0); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            h[i][j + n] = a[i][j];
            h[j + n][i] = a[i][j].conj();
        }
    }
    let mut ev = hermitian_eigenvalues(&h);
    ev.reverse();
    ev.truncate(n);
    ev.into_iter().map(|x| x.max(0.0)).collect()
}

pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn identity(n: usize) -> Rows {
    (0..n)
        .map(|i| (0..n).map(|j| C::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect()
}

/// `exp(−iHt)` by scaling and squaring a Taylor series.
pub fn expm_minus_i(h: &Rows, t: f64) -> Rows {
    let n = h.len();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| h[i][j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let mut squarings = 0;
    while norm1 / 2f64.powi(squarings) > 0.25 {
        squarings += 1;
    }
    let s = C::new(0.0, -t / 2f64.powi(squarings));
    let a: Rows = h.iter().map(|row| row.iter().map(|&z| z * s).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = matmul(&term, &a)
            .into_iter()
            .map(|row| row.into_iter().map(|z| z / k as f64).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

pub fn max_abs_diff(a: &Rows, b: &Rows) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
