//! System-bath Hamiltonians and the spectral-width decoherence measure.
//!
//! Tensor factors are ordered system qubits first (qubit 0 most significant),
//! bath last. A coupling term `σ_k[q] ⊗ A_k` therefore lives on a space of
//! dimension `2^n · bath_dim`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::operator::{
    eigh, evolve, op_norm, require_hermitian, Operator, Pauli, StateVector, HERMITIAN_TOL,
};
use crate::random::{random_hermitian, random_state, seeded};

/// Extremal spectrum of a Hermitian operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumSummary {
    pub mu_min: f64,
    pub mu_max: f64,
    /// Half the spectral width, `(μ_max − μ_min)/2`.
    pub delta: f64,
    /// Shift that minimizes `‖H + αI‖`, `−(μ_max + μ_min)/2`.
    pub alpha_opt: f64,
}

/// Half-width of the spectrum of `h` and the shift that attains it.
pub fn spectral_width(h: &Operator) -> Result<SpectrumSummary> {
    let values = crate::operator::eigenvalues(h)?;
    let mu_min = values[0];
    let mu_max = values[values.len() - 1];
    Ok(SpectrumSummary {
        mu_min,
        mu_max,
        delta: ((mu_max - mu_min) / 2.0).max(0.0),
        alpha_opt: -(mu_max + mu_min) / 2.0,
    })
}

/// `H + α_opt·I`, the minimal-norm representative of `h`.
pub fn min_norm_representative(h: &Operator) -> Result<(Operator, SpectrumSummary)> {
    let summary = spectral_width(h)?;
    Ok((h.shifted(summary.alpha_opt), summary))
}

/// One term `σ_k[qubit] ⊗ A_k` of the system-bath coupling.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTerm {
    pub qubit: usize,
    pub pauli: Pauli,
    pub bath_op: Operator,
}

impl CouplingTerm {
    pub fn new(qubit: usize, pauli: Pauli, bath_op: Operator) -> Self {
        Self {
            qubit,
            pauli,
            bath_op,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemBathModel {
    n_system_qubits: usize,
    bath_dim: usize,
    coupling_terms: Vec<CouplingTerm>,
    system_hamiltonian: Operator,
    bath_hamiltonian: Operator,
    t0: f64,
    lambda0: f64,
}

impl SystemBathModel {
    /// Model with zero system and bath Hamiltonians. `lambda0` defaults to the
    /// largest per-qubit spectral width.
    pub fn new(
        n_system_qubits: usize,
        bath_dim: usize,
        coupling_terms: Vec<CouplingTerm>,
        t0: f64,
    ) -> Result<Self> {
        if !(1..=2).contains(&n_system_qubits) {
            return Err(Error::param(
                "n_system_qubits",
                format!("{n_system_qubits} (supported: 1 or 2)"),
            ));
        }
        if bath_dim == 0 {
            return Err(Error::param("bath_dim", "must be positive"));
        }
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::param("t0", format!("{t0} (must be finite and nonnegative)")));
        }
        for term in &coupling_terms {
            validate_term(term, n_system_qubits, bath_dim)?;
        }
        let sys_dim = 1 << n_system_qubits;
        let mut model = Self {
            n_system_qubits,
            bath_dim,
            coupling_terms,
            system_hamiltonian: Operator::zeros(sys_dim),
            bath_hamiltonian: Operator::zeros(bath_dim),
            t0,
            lambda0: 0.0,
        };
        model.lambda0 = model
            .per_qubit_widths()?
            .into_iter()
            .fold(0.0, f64::max);
        Ok(model)
    }

    pub fn with_system_hamiltonian(mut self, h: Operator) -> Result<Self> {
        require_hermitian(&h)?;
        if h.dim() != self.system_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim(),
                found: h.dim(),
            });
        }
        self.system_hamiltonian = h;
        Ok(self)
    }

    pub fn with_bath_hamiltonian(mut self, h: Operator) -> Result<Self> {
        require_hermitian(&h)?;
        if h.dim() != self.bath_dim {
            return Err(Error::DimensionMismatch {
                expected: self.bath_dim,
                found: h.dim(),
            });
        }
        self.bath_hamiltonian = h;
        Ok(self)
    }

    /// Override the coupling bound; must dominate every per-qubit width.
    pub fn with_lambda0(mut self, lambda0: f64) -> Result<Self> {
        let widest = self.per_qubit_widths()?.into_iter().fold(0.0, f64::max);
        if !(lambda0.is_finite() && lambda0 >= widest - 1e-12) {
            return Err(Error::param(
                "lambda0",
                format!("{lambda0} is below the largest per-qubit spectral width {widest}"),
            ));
        }
        self.lambda0 = lambda0;
        Ok(self)
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 >= 0.0) {
            return Err(Error::param("t0", format!("{t0} (must be finite and nonnegative)")));
        }
        self.t0 = t0;
        Ok(self)
    }

    pub fn n_system_qubits(&self) -> usize {
        self.n_system_qubits
    }

    pub fn bath_dim(&self) -> usize {
        self.bath_dim
    }

    pub fn system_dim(&self) -> usize {
        1 << self.n_system_qubits
    }

    pub fn total_dim(&self) -> usize {
        self.system_dim() * self.bath_dim
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn coupling_terms(&self) -> &[CouplingTerm] {
        &self.coupling_terms
    }

    pub fn system_hamiltonian(&self) -> &Operator {
        &self.system_hamiltonian
    }

    pub fn bath_hamiltonian(&self) -> &Operator {
        &self.bath_hamiltonian
    }

    /// `Σ_k σ_k[q] ⊗ A_k` over all terms.
    pub fn coupling_hamiltonian(&self) -> Result<Operator> {
        self.coupling_for(|_| true)
    }

    /// Coupling of a single qubit, `H_SB[q]`, embedded in the full space.
    pub fn qubit_coupling(&self, qubit: usize) -> Result<Operator> {
        self.coupling_for(|t| t.qubit == qubit)
    }

    fn coupling_for(&self, keep: impl Fn(&CouplingTerm) -> bool) -> Result<Operator> {
        let mut total = Operator::zeros(self.total_dim());
        for term in self.coupling_terms.iter().filter(|t| keep(t)) {
            let embedded = self.embed_term(term)?;
            total = &total + &embedded;
        }
        Ok(total)
    }

    fn embed_term(&self, term: &CouplingTerm) -> Result<Operator> {
        let id = Pauli::I.operator();
        let sigma = term.pauli.operator();
        let mut factors: Vec<&Operator> = (0..self.n_system_qubits)
            .map(|q| if q == term.qubit { &sigma } else { &id })
            .collect();
        factors.push(&term.bath_op);
        Operator::kron_all(&factors)
    }

    /// Spectral half-width of each qubit's coupling.
    pub fn per_qubit_widths(&self) -> Result<Vec<f64>> {
        (0..self.n_system_qubits)
            .map(|q| Ok(spectral_width(&self.qubit_coupling(q)?)?.delta))
            .collect()
    }

    /// `H_S ⊗ I_B + I_S ⊗ H_B`.
    pub fn free_hamiltonian(&self) -> Result<Operator> {
        let hs = self
            .system_hamiltonian
            .kron(&Operator::identity(self.bath_dim))?;
        let hb = Operator::identity(self.system_dim()).kron(&self.bath_hamiltonian)?;
        Ok(&hs + &hb)
    }

    pub fn has_free_evolution(&self) -> bool {
        op_norm(&self.system_hamiltonian) > 0.0 || op_norm(&self.bath_hamiltonian) > 0.0
    }
}

fn validate_term(term: &CouplingTerm, n_qubits: usize, bath_dim: usize) -> Result<()> {
    if term.qubit >= n_qubits {
        return Err(Error::param(
            "coupling_terms",
            format!("qubit {} out of range for {n_qubits} system qubits", term.qubit),
        ));
    }
    if term.pauli == Pauli::I {
        return Err(Error::param(
            "coupling_terms",
            "identity on the system is a pure bath term, not a coupling",
        ));
    }
    if term.bath_op.dim() != bath_dim {
        return Err(Error::DimensionMismatch {
            expected: bath_dim,
            found: term.bath_op.dim(),
        });
    }
    require_hermitian(&term.bath_op)?;
    let mean = term.bath_op.trace() / bath_dim as f64;
    let traceless = &term.bath_op - &Operator::identity(bath_dim).scale(mean);
    if traceless.matrix().iter().all(|z| z.norm() <= HERMITIAN_TOL) {
        return Err(Error::param(
            "coupling_terms",
            "bath operator is proportional to the identity",
        ));
    }
    Ok(())
}

/// Parameters for [`random_model`].
#[derive(Clone, Copy, Debug)]
pub struct RandomModelSpec {
    pub n_system_qubits: usize,
    pub bath_dim: usize,
    pub t0: f64,
    /// Draw random `H_S` and `H_B`; otherwise both are zero.
    pub free_hamiltonians: bool,
}

/// Random model with an `X`, `Y` and `Z` coupling on every system qubit.
pub fn random_model<R: Rng + ?Sized>(rng: &mut R, spec: RandomModelSpec) -> Result<SystemBathModel> {
    if spec.bath_dim < 2 {
        return Err(Error::param("bath_dim", "random couplings need bath_dim >= 2"));
    }
    let mut terms = Vec::new();
    for q in 0..spec.n_system_qubits {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push(CouplingTerm::new(q, pauli, random_hermitian(rng, spec.bath_dim)));
        }
    }
    let mut model = SystemBathModel::new(spec.n_system_qubits, spec.bath_dim, terms, spec.t0)?;
    if spec.free_hamiltonians {
        let sys_dim = model.system_dim();
        model = model
            .with_system_hamiltonian(random_hermitian(rng, sys_dim))?
            .with_bath_hamiltonian(random_hermitian(rng, spec.bath_dim))?;
    }
    Ok(model)
}

/// Single qubit coupled to a bath qubit through `σ_z ⊗ σ_z`.
pub fn zz_model(t0: f64) -> SystemBathModel {
    SystemBathModel::new(1, 2, vec![CouplingTerm::new(0, Pauli::Z, Pauli::Z.operator())], t0)
        .expect("σz⊗σz is a valid coupling")
}

/// Worst-case fidelity `cos(Δt)`, valid for `Δt ≤ π/2`.
pub fn min_fidelity_analytic(delta: f64, t: f64) -> Result<f64> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Domain {
            name: "delta",
            value: delta,
            reason: "spectral width must be finite and nonnegative",
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            reason: "time must be finite and nonnegative",
        });
    }
    let dt = delta * t;
    // a few ulps of slack so that t = (pi/2)/delta round-trips
    if dt > FRAC_PI_2 * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::Domain {
            name: "delta*t",
            value: dt,
            reason: "the cosine floor only holds for delta*t <= pi/2",
        });
    }
    Ok(dt.min(FRAC_PI_2).cos())
}

/// Equal superposition of the lowest and highest eigenvectors of `h`.
///
/// Ties among degenerate extremal eigenvalues are broken lexicographically on
/// the amplitudes so the choice is deterministic.
pub fn worst_state(h: &Operator) -> Result<StateVector> {
    let eig = eigh(h)?;
    let n = h.dim();
    let column = |k: usize| -> Vec<crate::operator::C64> {
        eig.vectors.column(k).iter().copied().collect()
    };
    let pick = |target: f64| -> Vec<crate::operator::C64> {
        let mut candidates: Vec<Vec<_>> = (0..n)
            .filter(|&k| (eig.values[k] - target).abs() <= 1e-12 * (1.0 + target.abs()))
            .map(column)
            .collect();
        candidates.sort_by(|a, b| {
            for (x, y) in a.iter().zip(b) {
                let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
                if ord.is_ne() {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        });
        candidates.swap_remove(0)
    };
    let lo = pick(eig.values[0]);
    let hi = if n > 1 && eig.values[n - 1] - eig.values[0] <= 1e-12 * (1.0 + eig.values[0].abs()) {
        // flat spectrum: any orthogonal pair is extremal
        column(n - 1)
    } else {
        pick(eig.values[n - 1])
    };
    let amps = if lo == hi {
        lo
    } else {
        lo.iter().zip(&hi).map(|(a, b)| a + b).collect()
    };
    StateVector::new(amps)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityReport {
    pub delta: f64,
    pub t: f64,
    pub min_sampled_fidelity: f64,
    pub analytic_floor: f64,
    pub worst_state_fidelity: f64,
}

impl FidelityReport {
    /// Sampled states stay above the floor and the worst state attains it.
    pub fn holds(&self, tol: f64) -> bool {
        self.min_sampled_fidelity >= self.analytic_floor - tol
            && (self.worst_state_fidelity - self.analytic_floor).abs() <= tol
    }
}

/// Samples `|⟨ψ(0)|ψ(t)⟩|` over random initial states of system and bath.
pub fn verify_fidelity_decay(
    model: &SystemBathModel,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<FidelityReport> {
    if model.has_free_evolution() {
        return Err(Error::param(
            "model",
            "fidelity floor assumes zero system and bath Hamiltonians",
        ));
    }
    let h = model.coupling_hamiltonian()?;
    let summary = spectral_width(&h)?;
    let analytic_floor = min_fidelity_analytic(summary.delta, t)?;
    let u = evolve(&h, t)?;

    let mut rng = seeded(seed);
    let mut min_sampled = f64::INFINITY;
    for _ in 0..n_samples {
        let psi = random_state(&mut rng, h.dim());
        min_sampled = min_sampled.min(psi.overlap_under(&u)?);
    }
    let worst = worst_state(&h)?;
    Ok(FidelityReport {
        delta: summary.delta,
        t,
        min_sampled_fidelity: if n_samples == 0 { 1.0 } else { min_sampled },
        analytic_floor,
        worst_state_fidelity: worst.overlap_under(&u)?,
    })
}

/// Fidelity of a pure state with its image under a depolarizing channel.
pub fn depolarizing_fidelity(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            reason: "depolarizing probability must lie in [0, 1]",
        });
    }
    Ok((1.0 - p / 2.0).sqrt())
}
