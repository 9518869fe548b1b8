//! Seeded generators for random operators, states and models.
//!
//! Every randomized check in the crate draws from a [`ChaCha8Rng`] built by
//! [`seeded`], so a seed fully determines a run. Workers that split a sweep
//! derive their streams with [`substream`].

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{Operator, StateVector, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let m = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    Operator::from_matrix_with_limit(m, usize::MAX).expect("finite square matrix")
}

/// GUE-style Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    random_operator(rng, dim).symmetrized()
}

/// Haar unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Operator {
    let g = random_operator(rng, dim).into_matrix();
    let qr = g.qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Operator::from_matrix_with_limit(q, usize::MAX).expect("finite square matrix")
}

/// Uniformly random pure state: normalized Gaussian amplitudes.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        if let Ok(s) = StateVector::new(amps) {
            return s;
        }
    }
}
