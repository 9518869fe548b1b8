//! Good/fault decomposition of noisy gates and fault-path expansions.
//!
//! A gate acting for time `t0` splits as `U = U0 + E` where `U0 = U_S ⊗ U_B`
//! is the uncoupled evolution and `E` the fault operator. Products of gates
//! then expand into `2^n` fault paths, one per subset of faulty locations.

use crate::bath::{min_norm_representative, spectral_width, SystemBathModel};
use crate::error::{Error, Result};
use crate::operator::{check_dims, evolve, op_norm, Operator};

/// Operators are unitary when `U†U` is within this of the identity, entrywise.
const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct FaultDecomposition {
    /// Full noisy gate `U`.
    pub full: Operator,
    /// Uncoupled evolution `U0 = U_S ⊗ U_B`.
    pub free: Operator,
    /// Fault operator `E = U − U0`.
    pub fault: Operator,
    /// `t0·Δ` for a single qubit, `2·t0·λ0` for a two-qubit gate.
    pub bound: f64,
}

impl FaultDecomposition {
    pub fn fault_norm(&self) -> f64 {
        op_norm(&self.fault)
    }

    pub fn within_bound(&self, slack: f64) -> bool {
        self.fault_norm() <= self.bound + slack
    }
}

/// Splits the gate generated by `model` over `[0, t0]` into free and fault parts.
///
/// The coupling is replaced by its minimal-norm representative first; the
/// bound is only meaningful for that shift.
pub fn decompose_gate(model: &SystemBathModel) -> Result<FaultDecomposition> {
    let t0 = model.t0();
    let (coupling, summary) = min_norm_representative(&model.coupling_hamiltonian()?)?;
    let generator = &model.free_hamiltonian()? + &coupling;
    let full = evolve(&generator, t0)?;
    let u_s = evolve(model.system_hamiltonian(), t0)?;
    let u_b = evolve(model.bath_hamiltonian(), t0)?;
    let free = u_s.kron(&u_b)?;
    check_dims(full.dim(), free.dim())?;
    let fault = &full - &free;
    let bound = match model.n_system_qubits() {
        1 => t0 * summary.delta,
        _ => 2.0 * t0 * model.lambda0(),
    };
    Ok(FaultDecomposition {
        full,
        free,
        fault,
        bound,
    })
}

pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Norm bound on the part of `U_n⋯U_1` with at least `k` bad factors.
///
/// `C(n,k)·ε^k` when every good part is unitary, otherwise
/// `C(n,k)·ε^k·(1+ε)^{n−k}`.
pub fn binomial_tail_bound(n: u64, k: u64, eps: f64, good_is_unitary: bool) -> Result<f64> {
    if k > n {
        return Err(Error::param("k", format!("{k} exceeds n = {n}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::param("eps", format!("{eps} (must be finite and nonnegative)")));
    }
    let head = binomial(n, k) * eps.powi(k as i32);
    Ok(if good_is_unitary {
        head
    } else {
        head * (1.0 + eps).powi((n - k) as i32)
    })
}

/// One factor `U_i = G_i + B_i` of a product.
#[derive(Clone, Debug)]
pub struct SplitFactor {
    pub good: Operator,
    pub bad: Operator,
}

/// Sum of every term of `(G_n + B_n)⋯(G_1 + B_1)` holding at least `k` bad
/// factors, by explicit expansion over all `2^n` terms. Factor 0 acts first.
pub fn at_least_k_bad_sum(factors: &[SplitFactor], k: usize) -> Result<Operator> {
    let first = factors
        .first()
        .ok_or_else(|| Error::param("factors", "empty product"))?;
    let dim = first.good.dim();
    for f in factors {
        check_dims(dim, f.good.dim())?;
        check_dims(dim, f.bad.dim())?;
    }
    let n = factors.len();
    if n > 16 {
        return Err(Error::param("factors", "explicit expansion limited to 16 factors"));
    }
    let mut total = Operator::zeros(dim);
    for mask in 0u32..(1 << n) {
        if (mask.count_ones() as usize) < k {
            continue;
        }
        let term = factors.iter().enumerate().fold(Operator::identity(dim), |acc, (i, f)| {
            let factor = if mask & (1 << i) != 0 { &f.bad } else { &f.good };
            factor * &acc
        });
        total = &total + &term;
    }
    Ok(total)
}

fn require_unitary(u: &Operator) -> Result<()> {
    let dev = (&u.adjoint() * u).max_abs_diff(&Operator::identity(u.dim()));
    if dev > UNITARY_TOL {
        return Err(Error::param(
            "free evolution",
            format!("operator is not unitary (deviation {dev:e})"),
        ));
    }
    Ok(())
}

/// `U0·E·U0†`: the image of a fault under subsequent free evolution.
pub fn interaction_picture(fault: &Operator, free: &Operator) -> Result<Operator> {
    check_dims(free.dim(), fault.dim())?;
    require_unitary(free)?;
    Ok(&(free * fault) * &free.adjoint())
}

/// Ordered faulty locations with the times at which they occur.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeResolvedFaultPath {
    entries: Vec<(usize, f64)>,
}

impl TimeResolvedFaultPath {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        for w in entries.windows(2) {
            if !(w[1].1 > w[0].1) {
                return Err(Error::InvalidFaultPath(format!(
                    "fault times must be strictly increasing ({} then {})",
                    w[0].1, w[1].1
                )));
            }
        }
        if entries.iter().any(|(_, t)| !t.is_finite()) {
            return Err(Error::InvalidFaultPath("non-finite fault time".into()));
        }
        Ok(Self { entries })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }
}

/// One time step of a circuit: free part plus the coupling a fault replaces.
#[derive(Clone, Debug)]
pub struct CircuitInterval {
    pub duration: f64,
    pub free: Operator,
    pub coupling: Operator,
}

impl CircuitInterval {
    fn unitaries(&self) -> Result<(Operator, Operator)> {
        let free = evolve(&self.free, self.duration)?;
        let full = evolve(&(&self.free + &self.coupling), self.duration)?;
        Ok((free, full))
    }
}

#[derive(Clone, Debug)]
pub struct SpreadReport {
    /// `‖E_SB(𝒯)·U0†(t_F,t_I) − Π_m E[i_m](t_F,t_m)‖`.
    pub lhs_rhs_distance: f64,
    pub lhs_norm: f64,
}

/// Checks that a fault-path operator, referred back through the inverse free
/// evolution, equals the ordered product of its faults in the interaction
/// picture.
///
/// Location `i` is interval `i` and its fault is taken at the interval's end
/// time; the operator propagated from there is `E_i·U0_i†`.
pub fn verify_spread_identity(
    circuit: &[CircuitInterval],
    faults: &TimeResolvedFaultPath,
) -> Result<SpreadReport> {
    let first = circuit
        .first()
        .ok_or_else(|| Error::param("circuit", "no intervals"))?;
    let dim = first.free.dim();
    let mut ends = Vec::with_capacity(circuit.len());
    let mut clock = 0.0;
    for interval in circuit {
        check_dims(dim, interval.free.dim())?;
        check_dims(dim, interval.coupling.dim())?;
        if !(interval.duration >= 0.0 && interval.duration.is_finite()) {
            return Err(Error::param("duration", format!("{}", interval.duration)));
        }
        clock += interval.duration;
        ends.push(clock);
    }
    let t_final = clock;
    let time_tol = 1e-9 * (1.0 + t_final);

    for &(loc, t) in faults.entries() {
        if t < -time_tol || t > t_final + time_tol {
            return Err(Error::InvalidFaultPath(format!(
                "fault time {t} outside circuit span [0, {t_final}]"
            )));
        }
        let end = *ends.get(loc).ok_or_else(|| {
            Error::InvalidFaultPath(format!("location {loc} not in a {}-interval circuit", circuit.len()))
        })?;
        if (t - end).abs() > time_tol {
            return Err(Error::InvalidFaultPath(format!(
                "fault at location {loc} must be timed at its interval end {end}, got {t}"
            )));
        }
    }

    let pairs: Vec<(Operator, Operator)> = circuit
        .iter()
        .map(CircuitInterval::unitaries)
        .collect::<Result<_>>()?;
    let is_faulty = |j: usize| faults.entries().iter().any(|&(loc, _)| loc == j);

    // E_SB(𝒯): free evolution everywhere except the faulty intervals.
    let mut path = Operator::identity(dim);
    let mut free_total = Operator::identity(dim);
    for (j, (free, full)) in pairs.iter().enumerate() {
        let step = if is_faulty(j) { full - free } else { free.clone() };
        path = &step * &path;
        free_total = free * &free_total;
    }
    let lhs = &path * &free_total.adjoint();

    // U0(t_F, t_j) for each interval end.
    let mut tail = vec![Operator::identity(dim); circuit.len()];
    for j in (0..circuit.len().saturating_sub(1)).rev() {
        tail[j] = &tail[j + 1] * &pairs[j + 1].0;
    }
    let mut rhs = Operator::identity(dim);
    for &(loc, _) in faults.entries() {
        let (free, full) = &pairs[loc];
        let local = &(full - free) * &free.adjoint();
        let spread = interaction_picture(&local, &tail[loc])?;
        rhs = &spread * &rhs;
    }
    Ok(SpreadReport {
        lhs_rhs_distance: op_norm(&(&lhs - &rhs)),
        lhs_norm: op_norm(&lhs),
    })
}

/// `(2·λ0·t0)^k`, the norm bound on any fault path with `k` faults.
pub fn fault_path_norm_bound(k: i64, lambda0: f64, t0: f64) -> Result<f64> {
    if k < 0 {
        return Err(Error::param("k", format!("{k} (fault count must be nonnegative)")));
    }
    Ok((2.0 * lambda0 * t0).powi(k as i32))
}

/// One term of a fault-path expansion.
#[derive(Clone, Debug)]
pub struct FaultPathTerm {
    /// Indices of the locations carrying `E` instead of `U0`.
    pub faulty: Vec<usize>,
    pub operator: Operator,
}

impl FaultPathTerm {
    pub fn k(&self) -> usize {
        self.faulty.len()
    }
}

/// All `2^n` fault-path operators of a sequence of gates (location 0 first).
pub fn expand_fault_paths(locations: &[FaultDecomposition]) -> Result<Vec<FaultPathTerm>> {
    let first = locations
        .first()
        .ok_or_else(|| Error::param("locations", "empty circuit"))?;
    let dim = first.full.dim();
    for loc in locations {
        check_dims(dim, loc.full.dim())?;
    }
    let n = locations.len();
    if n > 12 {
        return Err(Error::param("locations", "exhaustive expansion limited to 12 locations"));
    }
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut op = Operator::identity(dim);
        let mut faulty = Vec::new();
        for (i, loc) in locations.iter().enumerate() {
            let factor = if mask & (1 << i) != 0 {
                faulty.push(i);
                &loc.fault
            } else {
                &loc.free
            };
            op = factor * &op;
        }
        terms.push(FaultPathTerm {
            faulty,
            operator: op,
        });
    }
    Ok(terms)
}

/// Product `U_n⋯U_1` of the full gates.
pub fn circuit_unitary(locations: &[FaultDecomposition]) -> Result<Operator> {
    let first = locations
        .first()
        .ok_or_else(|| Error::param("locations", "empty circuit"))?;
    let mut op = Operator::identity(first.full.dim());
    for loc in locations {
        op = loc.full.checked_mul(&op)?;
    }
    Ok(op)
}

/// Spectral half-width of the coupling each location carries.
pub fn location_width(model: &SystemBathModel) -> Result<f64> {
    Ok(spectral_width(&model.coupling_hamiltonian()?)?.delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{zz_model, CouplingTerm};
    use crate::operator::Pauli;

    #[test]
    fn uncoupled_gate_has_no_fault() {
        let model = SystemBathModel::new(1, 2, vec![], 0.3)
            .unwrap()
            .with_system_hamiltonian(Pauli::X.operator())
            .unwrap()
            .with_bath_hamiltonian(Pauli::Z.operator())
            .unwrap();
        let d = decompose_gate(&model).unwrap();
        assert!(d.fault.matrix().iter().all(|z| z.norm() < 1e-15));
        assert_eq!(d.bound, 0.0);
    }

    #[test]
    fn zz_fault_norm_closed_form() {
        let d = decompose_gate(&zz_model(0.1)).unwrap();
        let expected = 2.0 * (0.05f64).sin().abs();
        assert!((d.fault_norm() - expected).abs() < 1e-10);
        assert!(d.fault_norm() <= 0.1);
        assert!((d.bound - 0.1).abs() < 1e-15);
    }

    #[test]
    fn shifted_coupling_is_used() {
        // eigenvalues {0, 2}: unshifted ‖E‖ would be |e^{-2it0} − 1| ≈ 2t0
        let term = CouplingTerm::new(0, Pauli::Z, Operator::diag(&[1.0, 0.0]));
        let model = SystemBathModel::new(1, 2, vec![term], 0.2).unwrap();
        let h = model.coupling_hamiltonian().unwrap();
        let shifted_width = spectral_width(&h).unwrap().delta;
        assert!((shifted_width - 1.0).abs() < 1e-15);
        let d = decompose_gate(&model).unwrap();
        assert!(d.within_bound(1e-12));
    }

    #[test]
    fn binomial_tail_examples() {
        assert!((binomial_tail_bound(2, 1, 0.1, true).unwrap() - 0.2).abs() < 1e-15);
        assert!((binomial_tail_bound(2, 1, 0.1, false).unwrap() - 0.22).abs() < 1e-15);
        assert!((binomial_tail_bound(3, 2, 0.1, true).unwrap() - 0.03).abs() < 1e-15);
        assert!(binomial_tail_bound(2, 3, 0.1, true).is_err());
        assert_eq!(binomial(10, 2), 45.0);
        assert_eq!(binomial(4, 0), 1.0);
    }

    #[test]
    fn interaction_picture_identity_frame() {
        let e = Operator::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]).unwrap();
        let r = interaction_picture(&e, &Operator::identity(2)).unwrap();
        assert!(r.max_abs_diff(&e) < 1e-15);
        assert!(interaction_picture(&e, &Operator::identity(3)).is_err());
        let not_unitary = Operator::diag(&[2.0, 1.0]);
        assert!(interaction_picture(&e, &not_unitary).is_err());
    }

    #[test]
    fn fault_path_bound_examples() {
        assert_eq!(fault_path_norm_bound(0, 3.0, 2.0).unwrap(), 1.0);
        assert!((fault_path_norm_bound(2, 0.1, 0.1).unwrap() - 4e-4).abs() < 1e-18);
        assert!(fault_path_norm_bound(-1, 0.1, 0.1).is_err());
    }

    #[test]
    fn fault_path_validation() {
        assert!(TimeResolvedFaultPath::new(vec![(0, 0.2), (1, 0.2)]).is_err());
        assert!(TimeResolvedFaultPath::new(vec![(0, 0.2), (1, 0.1)]).is_err());
        let ok = TimeResolvedFaultPath::new(vec![(0, 0.1), (1, 0.2)]).unwrap();
        assert_eq!(ok.k(), 2);
    }

    fn identity_circuit(n: usize) -> Vec<CircuitInterval> {
        let coupling = Pauli::Z.operator().kron(&Pauli::X.operator()).unwrap().scale_real(0.3);
        (0..n)
            .map(|_| CircuitInterval {
                duration: 0.5,
                free: Operator::zeros(4),
                coupling: coupling.clone(),
            })
            .collect()
    }

    #[test]
    fn spread_identity_trivial_cases() {
        let circuit = identity_circuit(3);
        let r = verify_spread_identity(&circuit, &TimeResolvedFaultPath::empty()).unwrap();
        assert!(r.lhs_rhs_distance < 1e-15);
        assert!((r.lhs_norm - 1.0).abs() < 1e-12);

        let one = TimeResolvedFaultPath::new(vec![(1, 1.0)]).unwrap();
        let r = verify_spread_identity(&circuit, &one).unwrap();
        assert!(r.lhs_rhs_distance <= 1e-12);
    }

    #[test]
    fn spread_identity_rejects_bad_times() {
        let circuit = identity_circuit(3);
        let outside = TimeResolvedFaultPath::new(vec![(2, 2.0)]).unwrap();
        assert!(matches!(
            verify_spread_identity(&circuit, &outside),
            Err(Error::InvalidFaultPath(_))
        ));
        let misplaced = TimeResolvedFaultPath::new(vec![(2, 0.5)]).unwrap();
        assert!(verify_spread_identity(&circuit, &misplaced).is_err());
        let unknown = TimeResolvedFaultPath::new(vec![(7, 0.5)]).unwrap();
        assert!(verify_spread_identity(&circuit, &unknown).is_err());
    }

    #[test]
    fn expansion_sums_to_circuit() {
        let locs = vec![
            decompose_gate(&zz_model(0.2)).unwrap(),
            decompose_gate(&zz_model(0.1)).unwrap(),
        ];
        let terms = expand_fault_paths(&locs).unwrap();
        assert_eq!(terms.len(), 4);
        let sum = terms
            .iter()
            .fold(Operator::zeros(4), |acc, t| &acc + &t.operator);
        assert!(sum.max_abs_diff(&circuit_unitary(&locs).unwrap()) < 1e-14);
    }
}
