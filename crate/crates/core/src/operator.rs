//! Dense complex operators on small Hilbert spaces.
//!
//! Everything downstream (fault operators, system-bath Hamiltonians, gate
//! unitaries) is carried by [`Operator`]. Norms are computed from full dense
//! decompositions, so dimensions are capped at [`DEFAULT_MAX_DIM`] unless a
//! caller asks for a different limit.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension accepted by the default constructors.
pub const DEFAULT_MAX_DIM: usize = 256;

/// Absolute entrywise tolerance used for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    hermitian_hint: bool,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("dim", &self.dim())
            .field("hermitian_hint", &self.hermitian_hint)
            .field("matrix", &self.matrix)
            .finish()
    }
}

impl Operator {
    /// Build from row-major entries. `entries.len()` must equal `dim * dim`.
    pub fn from_row_major(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedOperator("dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::MalformedOperator(format!(
                "expected {} entries for dimension {dim}, found {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Build from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::MalformedOperator(format!(
                    "row of length {} in a {dim}-row matrix",
                    row.len()
                )));
            }
            entries.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::from_row_major(dim, &entries)
    }

    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        Self::from_matrix_with_limit(matrix, DEFAULT_MAX_DIM)
    }

    pub fn from_matrix_with_limit(matrix: DMatrix<C64>, max_dim: usize) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::MalformedOperator("empty matrix".into()));
        }
        if rows != cols {
            return Err(Error::MalformedOperator(format!(
                "non-square matrix {rows}x{cols}"
            )));
        }
        if rows > max_dim {
            return Err(Error::MalformedOperator(format!(
                "dimension {rows} exceeds limit {max_dim}"
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::MalformedOperator("non-finite entry".into()));
        }
        Ok(Self {
            matrix,
            hermitian_hint: false,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            hermitian_hint: true,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            hermitian_hint: true,
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let v = DVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)));
        Self {
            matrix: DMatrix::from_diagonal(&v),
            hermitian_hint: true,
        }
    }

    /// Checks Hermiticity at [`HERMITIAN_TOL`] and marks the operator.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian_hint = true;
        Ok(self)
    }

    /// `(A + A†)/2`, marked Hermitian. Only applied when the caller opts in.
    pub fn symmetrized(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Self {
            matrix: m,
            hermitian_hint: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian_hint
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> Vec<C64> {
        self.matrix.transpose().iter().copied().collect()
    }

    /// Largest entrywise `|A - A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_hint || self.hermitian_deviation() <= tol
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            matrix: &self.matrix * s,
            hermitian_hint: self.hermitian_hint && s.im == 0.0,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `A + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.matrix.clone();
        for i in 0..self.dim() {
            m[(i, i)] += shift;
        }
        Self {
            matrix: m,
            hermitian_hint: self.hermitian_hint,
        }
    }

    pub fn kron(&self, other: &Operator) -> Result<Self> {
        let dim = self.dim() * other.dim();
        if dim > DEFAULT_MAX_DIM {
            return Err(Error::MalformedOperator(format!(
                "tensor product dimension {dim} exceeds limit {DEFAULT_MAX_DIM}"
            )));
        }
        Ok(Self {
            matrix: self.matrix.kronecker(&other.matrix),
            hermitian_hint: self.hermitian_hint && other.hermitian_hint,
        })
    }

    /// Tensor product of a list of factors, left to right.
    pub fn kron_all(factors: &[&Operator]) -> Result<Self> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::MalformedOperator("empty tensor product".into()))?;
        rest.iter()
            .try_fold((*first).clone(), |acc, f| acc.kron(f))
    }

    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        check_dims(self.dim(), state.dim())?;
        Ok(&self.matrix * state.amplitudes())
    }

    pub fn checked_add(&self, other: &Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(self + other)
    }

    pub fn checked_mul(&self, other: &Operator) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(self * other)
    }

    /// `max |a_ij - b_ij|`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        Operator {
            matrix: &self.matrix + &rhs.matrix,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        Operator {
            matrix: &self.matrix - &rhs.matrix,
            hermitian_hint: self.hermitian_hint && rhs.hermitian_hint,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        Operator {
            matrix: &self.matrix * &rhs.matrix,
            hermitian_hint: false,
        }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            matrix: -&self.matrix,
            hermitian_hint: self.hermitian_hint,
        }
    }
}

/// Single-qubit Pauli labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn operator(self) -> Operator {
        let z = ZERO;
        let o = ONE;
        let i = C64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [o, z, z, o],
            Pauli::X => [z, o, o, z],
            Pauli::Y => [z, -i, i, z],
            Pauli::Z => [o, z, z, -o],
        };
        Operator {
            matrix: DMatrix::from_row_slice(2, 2, &entries),
            hermitian_hint: true,
        }
    }
}

/// A normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Normalizes `amplitudes`; rejects empty or zero vectors.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(v: DVector<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::param("amplitudes", "empty state"));
        }
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::param("amplitudes", "state has zero or non-finite norm"));
        }
        Ok(Self {
            amplitudes: v.unscale(norm),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::param("index", format!("{index} >= dimension {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨ψ|U|ψ⟩|`.
    pub fn overlap_under(&self, op: &Operator) -> Result<f64> {
        let evolved = op.apply(self)?;
        Ok(self.amplitudes.dotc(&evolved).norm())
    }
}

/// A discrete distribution summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector {
    outcomes: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(outcomes: Vec<f64>) -> Result<Self> {
        if outcomes.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::param("outcomes", "entries must be finite and nonnegative"));
        }
        let total: f64 = outcomes.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("outcomes", format!("entries sum to {total}, not 1")));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DMatrix<C64>,
}

pub fn eigh(h: &Operator) -> Result<HermitianEigen> {
    require_hermitian(h)?;
    let eig = h.matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn eigenvalues(h: &Operator) -> Result<Vec<f64>> {
    require_hermitian(h)?;
    let mut values: Vec<f64> = h.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

pub(crate) fn require_hermitian(h: &Operator) -> Result<()> {
    if h.hermitian_hint {
        return Ok(());
    }
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Operator norm `max_{‖ψ‖=1} ‖Aψ‖`, the largest singular value.
pub fn op_norm(a: &Operator) -> f64 {
    if a.hermitian_hint {
        let values = a.matrix.clone().symmetric_eigenvalues();
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    a.matrix.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Trace norm `Tr √(A†A)`, the sum of singular values.
pub fn trace_norm(a: &Operator) -> f64 {
    if a.hermitian_hint {
        let values = a.matrix.clone().symmetric_eigenvalues();
        return values.iter().map(|v| v.abs()).sum();
    }
    a.matrix.singular_values().iter().sum()
}

/// Classical variation distance `Σ_i |P(i) − Q(i)|`.
pub fn variation_distance(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    check_dims(p.outcomes.len(), q.outcomes.len())?;
    Ok(p.outcomes
        .iter()
        .zip(&q.outcomes)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// `exp(−iHt)` for Hermitian `H`, from its eigen-decomposition.
pub fn evolve(h: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::Domain {
            name: "t",
            value: t,
            reason: "evolution time must be finite",
        });
    }
    let eig = eigh(h)?;
    let n = h.dim();
    let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, -l * t)).collect();
    let mut scaled = eig.vectors.clone();
    for (j, phase) in phases.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(Operator {
        matrix: scaled * eig.vectors.adjoint(),
        hermitian_hint: false,
    })
}
