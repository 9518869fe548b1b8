//! Numerical verification of fault-tolerance bounds for local non-Markovian
//! noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`operator`]: dense complex operators, norms and exact unitary evolution.
//! - [`bath`]: system-bath models, spectral width and worst-case fidelity.
//! - [`fault`]: good/fault gate decompositions and fault-path expansions.
//! - [`concat`]: concatenated circuit layouts, recursive sparseness and an
//!   abstract error-propagation semantics.
//! - [`threshold`]: the bad-norm recursion, threshold and level solver.
//! - [`spectral`]: coupling-strength bounds for spin and bosonic baths.
//!
//! Support: [`random`] (seeded generators), [`special`] (trigamma) and
//! [`quadrature`] (adaptive Gauss-Kronrod).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod bath;
pub mod concat;
mod error;
pub mod fault;
pub mod operator;
pub mod quadrature;
pub mod random;
pub mod special;
pub mod spectral;
pub mod threshold;

pub use error::{Error, Result};
pub use operator::{
    evolve, op_norm, trace_norm, variation_distance, Operator, Pauli, ProbabilityVector,
    StateVector, C64,
};
