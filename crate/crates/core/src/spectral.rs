//! Coupling-strength bounds for spin-boson and hyperfine baths.
//!
//! The cooling expressions are approximate bounds: they are evaluated
//! exactly, but [`CoolingBound::heuristic`] is always set.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{op_norm, Operator, Pauli};
use crate::quadrature::integrate;
use crate::special::trigamma;

/// Ohmic integrals run over `[0, OHMIC_CUTOFF_MULTIPLE·ω_c]`.
pub const OHMIC_CUTOFF_MULTIPLE: f64 = 60.0;

/// Default norm constant for the hyperfine bound: `‖σ⃗·I⃗‖` for spin 1/2.
pub const HYPERFINE_KAPPA: f64 = 1.5;

const ABS_TOL: f64 = 1e-15;
const REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralShape {
    /// `J(ω) = α·ω·e^{−ω/ω_c}`.
    Ohmic { alpha: f64, omega_c: f64 },
    /// Samples `(ω, J(ω))` with strictly increasing `ω`.
    Tabulated { omega: Vec<f64>, j: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    #[serde(flatten)]
    pub shape: SpectralShape,
    #[serde(default)]
    pub beta_eff: Option<f64>,
}

impl SpectralDensity {
    pub fn ohmic(alpha: f64, omega_c: f64) -> Result<Self> {
        let d = Self {
            shape: SpectralShape::Ohmic { alpha, omega_c },
            beta_eff: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn tabulated(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (omega, j) = points.into_iter().unzip();
        let d = Self {
            shape: SpectralShape::Tabulated { omega, j },
            beta_eff: None,
        };
        d.validate()?;
        Ok(d)
    }

    /// Two-column CSV with header `omega,J`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Table(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "omega" || &headers[1] != "J" {
            return Err(Error::Table(format!(
                "expected header `omega,J`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for (line, rec) in rdr.deserialize::<(f64, f64)>().enumerate() {
            let p = rec.map_err(|e| Error::Table(format!("row {}: {e}", line + 1)))?;
            points.push(p);
        }
        Self::tabulated(points)
    }

    pub fn with_beta_eff(mut self, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || beta.is_nan() {
            return Err(Error::param("beta_eff", format!("{beta} (must be > 0)")));
        }
        self.beta_eff = Some(beta);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            SpectralShape::Ohmic { alpha, omega_c } => {
                if !(*alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::param("alpha", format!("{alpha} (must be >= 0)")));
                }
                if !(*omega_c > 0.0 && omega_c.is_finite()) {
                    return Err(Error::param("omega_c", format!("{omega_c} (must be > 0)")));
                }
            }
            SpectralShape::Tabulated { omega, j } => {
                if omega.len() != j.len() {
                    return Err(Error::Table("omega and J columns differ in length".into()));
                }
                if omega.len() < 2 {
                    return Err(Error::Table("at least two samples are required".into()));
                }
                if omega.iter().chain(j).any(|v| !v.is_finite()) {
                    return Err(Error::Table("non-finite sample".into()));
                }
                if omega[0] < 0.0 {
                    return Err(Error::Table("frequencies must be nonnegative".into()));
                }
                if omega.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Table("omega must be strictly increasing".into()));
                }
                if j.iter().any(|&v| v < 0.0) {
                    return Err(Error::Table("J must be nonnegative".into()));
                }
            }
        }
        if let Some(b) = self.beta_eff {
            if !(b > 0.0) {
                return Err(Error::param("beta_eff", format!("{b} (must be > 0)")));
            }
        }
        Ok(())
    }

    /// `J(ω)`; tabulated data is interpolated linearly and zero outside the grid.
    pub fn eval(&self, w: f64) -> f64 {
        match &self.shape {
            SpectralShape::Ohmic { alpha, omega_c } => alpha * w * (-w / omega_c).exp(),
            SpectralShape::Tabulated { omega, j } => {
                if w < omega[0] || w > omega[omega.len() - 1] {
                    return 0.0;
                }
                let k = omega.partition_point(|&x| x <= w).clamp(1, omega.len() - 1);
                let t = (w - omega[k - 1]) / (omega[k] - omega[k - 1]);
                j[k - 1] + t * (j[k] - j[k - 1])
            }
        }
    }
}

/// Trapezoid rule for `Σ g(ω_i, J_i)` over a table, with `g` evaluated at the
/// samples. At `ω = 0` the caller supplies the limiting value.
fn trapezoid(omega: &[f64], values: &[f64]) -> f64 {
    omega
        .windows(2)
        .zip(values.windows(2))
        .map(|(w, v)| 0.5 * (w[1] - w[0]) * (v[0] + v[1]))
        .sum()
}

/// `J(ω)/ω` on a table, using the secant slope at `ω = 0`.
fn table_j_over_omega(omega: &[f64], j: &[f64]) -> Result<Vec<f64>> {
    omega
        .iter()
        .zip(j)
        .enumerate()
        .map(|(i, (&w, &v))| {
            if w > 0.0 {
                Ok(v / w)
            } else if v != 0.0 {
                Err(Error::SingularIntegrand(format!("J(0) = {v} makes J(ω)/ω diverge")))
            } else {
                Ok(j[i + 1] / omega[i + 1])
            }
        })
        .collect()
}

/// `∫₀^∞ J(ω)/ω dω`.
pub fn reorg_integral(density: &SpectralDensity) -> Result<f64> {
    density.validate()?;
    match &density.shape {
        SpectralShape::Ohmic { alpha, omega_c } => {
            let wc = *omega_c;
            integrate(
                |w| alpha * (-w / wc).exp(),
                0.0,
                OHMIC_CUTOFF_MULTIPLE * wc,
                ABS_TOL,
                REL_TOL,
            )
        }
        SpectralShape::Tabulated { omega, j } => Ok(trapezoid(omega, &table_j_over_omega(omega, j)?)),
    }
}

/// `2·√(E·∫J(ω)/ω dω)`: coupling bound for bath states of energy at most `E`.
pub fn energy_bound(density: &SpectralDensity, bath_energy: f64) -> Result<f64> {
    if !(bath_energy >= 0.0 && bath_energy.is_finite()) {
        return Err(Error::Domain {
            name: "bath_energy",
            value: bath_energy,
            reason: "bath energy must be finite and nonnegative",
        });
    }
    Ok(2.0 * (bath_energy * reorg_integral(density)?).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingMethod {
    /// Adaptive quadrature of `∫J(ω)·coth(βω/2)/2 dω`.
    Quadrature,
    /// Ohmic closed form through the trigamma function.
    Closed,
    /// Ohmic low-temperature expansion.
    Series,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingBound {
    pub method: CoolingMethod,
    pub value: f64,
    /// The expression bounds the coupling only approximately.
    pub heuristic: bool,
    /// Set when `β_eff·ω_c ≤ 1`, outside the regime of the expansion.
    pub regime_warning: bool,
}

/// `ω·coth(βω/2)`, finite at `ω → 0`.
fn w_coth(w: f64, beta: f64) -> f64 {
    let x = 0.5 * beta * w;
    if x < 1e-6 {
        (2.0 / beta) * (1.0 + x * x / 3.0)
    } else {
        w / x.tanh()
    }
}

/// Thermal coupling bound for a bath at effective inverse temperature `β_eff`.
pub fn cooling_bound(density: &SpectralDensity, method: CoolingMethod) -> Result<CoolingBound> {
    density.validate()?;
    let beta = density
        .beta_eff
        .ok_or_else(|| Error::param("beta_eff", "required for the cooling bound"))?;
    let mut regime_warning = false;
    let value = match (&density.shape, method) {
        (SpectralShape::Ohmic { alpha, omega_c }, CoolingMethod::Quadrature) => {
            let wc = *omega_c;
            let integral = integrate(
                |w| 0.5 * alpha * (-w / wc).exp() * w_coth(w, beta),
                0.0,
                OHMIC_CUTOFF_MULTIPLE * wc,
                ABS_TOL,
                REL_TOL,
            )?;
            integral.sqrt()
        }
        (SpectralShape::Tabulated { omega, j }, CoolingMethod::Quadrature) => {
            let over = table_j_over_omega(omega, j)?;
            let vals: Vec<f64> = omega
                .iter()
                .zip(&over)
                .map(|(&w, &jw)| 0.5 * jw * w_coth(w, beta))
                .collect();
            trapezoid(omega, &vals).sqrt()
        }
        (SpectralShape::Ohmic { alpha, omega_c }, CoolingMethod::Closed) => {
            regime_warning = beta * omega_c <= 1.0;
            let inner = -omega_c * omega_c + 2.0 * trigamma(1.0 / (beta * omega_c))? / (beta * beta);
            (alpha / 2.0).sqrt() * inner.max(0.0).sqrt()
        }
        (SpectralShape::Ohmic { alpha, omega_c }, CoolingMethod::Series) => {
            regime_warning = beta * omega_c <= 1.0;
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            (alpha / 2.0).sqrt() * (omega_c * omega_c + pi2 / (3.0 * beta * beta)).sqrt()
        }
        (SpectralShape::Tabulated { .. }, _) => {
            return Err(Error::param(
                "method",
                "closed and series forms require an ohmic spectral density",
            ))
        }
    };
    Ok(CoolingBound {
        method,
        value,
        heuristic: true,
        regime_warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperfineModel {
    pub a_hf: f64,
    pub v0: f64,
    /// Electron probability `|ψ(i)|²` at each nuclear site.
    pub weights: Vec<f64>,
}

impl HyperfineModel {
    pub fn new(a_hf: f64, v0: f64, weights: Vec<f64>) -> Result<Self> {
        let m = Self { a_hf, v0, weights };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a_hf.is_finite() {
            return Err(Error::param("A_hf", "must be finite"));
        }
        if !(self.v0 >= 0.0 && self.v0.is_finite()) {
            return Err(Error::param("v0", format!("{} (must be >= 0)", self.v0)));
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::param("weights", "weights must be nonnegative"));
        }
        let total: f64 = self.weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::param("weights", format!("sum {total} exceeds 1")));
        }
        Ok(())
    }
}

/// `κ·|A|·v0·Σ|ψ(i)|²` with `κ` = [`HYPERFINE_KAPPA`].
pub fn hyperfine_bound(model: &HyperfineModel) -> Result<f64> {
    hyperfine_bound_with_kappa(model, HYPERFINE_KAPPA)
}

pub fn hyperfine_bound_with_kappa(model: &HyperfineModel, kappa: f64) -> Result<f64> {
    model.validate()?;
    if !(kappa >= 0.0) {
        return Err(Error::param("kappa", "must be nonnegative"));
    }
    Ok(kappa * model.a_hf.abs() * model.v0 * model.weights.iter().sum::<f64>())
}

/// The single-site coupling `σ⃗ ⊗ I⃗` with `I⃗ = σ⃗/2`.
pub fn sigma_dot_spin() -> Operator {
    [Pauli::X, Pauli::Y, Pauli::Z]
        .into_iter()
        .map(|p| {
            let s = p.operator();
            s.kron(&s.scale_real(0.5)).expect("4x4")
        })
        .fold(Operator::zeros(4), |acc, t| &acc + &t)
        .into_hermitian()
        .expect("Hermitian by construction")
}

pub fn sigma_dot_spin_norm() -> f64 {
    op_norm(&sigma_dot_spin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn reorg_examples() {
        assert_eq!(reorg_integral(&SpectralDensity::ohmic(0.0, 5.0).unwrap()).unwrap(), 0.0);
        let v = reorg_integral(&SpectralDensity::ohmic(0.1, 5.0).unwrap()).unwrap();
        assert!(rel(v, 0.5) < 1e-10);
    }

    #[test]
    fn singular_table() {
        let d = SpectralDensity::tabulated([(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(reorg_integral(&d), Err(Error::SingularIntegrand(_))));
        let ok = SpectralDensity::tabulated([(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).unwrap();
        assert!((reorg_integral(&ok).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn table_validation() {
        assert!(SpectralDensity::tabulated([(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(SpectralDensity::tabulated([(1.0, -1.0), (2.0, 2.0)]).is_err());
        assert!(SpectralDensity::tabulated([(1.0, 1.0)]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let text = "omega,J\n0.5,0.25\n1.0,0.5\n2.0,0.5\n";
        let d = SpectralDensity::from_csv(text.as_bytes()).unwrap();
        assert!((d.eval(0.75) - 0.375).abs() < 1e-15);
        assert_eq!(d.eval(3.0), 0.0);
        assert!(SpectralDensity::from_csv("w,J\n1,1\n".as_bytes()).is_err());
        assert!(SpectralDensity::from_csv("omega,J\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn energy_bound_examples() {
        let d = SpectralDensity::ohmic(0.1, 5.0).unwrap();
        assert_eq!(energy_bound(&d, 0.0).unwrap(), 0.0);
        assert!((energy_bound(&d, 2.0).unwrap() - 2.0).abs() < 1e-9);
        assert!(energy_bound(&d, -1.0).is_err());
    }

    #[test]
    fn cooling_needs_beta() {
        let d = SpectralDensity::ohmic(0.3, 1.0).unwrap();
        assert!(cooling_bound(&d, CoolingMethod::Series).is_err());
        let t = SpectralDensity::tabulated([(0.5, 0.1), (1.0, 0.2)])
            .unwrap()
            .with_beta_eff(1.0)
            .unwrap();
        assert!(cooling_bound(&t, CoolingMethod::Closed).is_err());
        assert!(cooling_bound(&t, CoolingMethod::Quadrature).is_ok());
    }

    #[test]
    fn warning_flag_in_high_temperature_regime() {
        let d = SpectralDensity::ohmic(0.3, 1.0).unwrap().with_beta_eff(0.5).unwrap();
        let c = cooling_bound(&d, CoolingMethod::Closed).unwrap();
        assert!(c.regime_warning && c.heuristic);
        let d = d.with_beta_eff(10.0).unwrap();
        assert!(!cooling_bound(&d, CoolingMethod::Closed).unwrap().regime_warning);
    }

    #[test]
    fn hyperfine_examples() {
        assert!((sigma_dot_spin_norm() - 1.5).abs() < 1e-12);
        let m = HyperfineModel::new(1.0, 1.0, vec![0.0; 3]).unwrap();
        assert_eq!(hyperfine_bound(&m).unwrap(), 0.0);
        let m = HyperfineModel::new(2.0, 0.5, vec![0.5, 0.5]).unwrap();
        assert!((hyperfine_bound(&m).unwrap() - 1.5).abs() < 1e-15);
        assert!(HyperfineModel::new(1.0, 1.0, vec![0.7, 0.7]).is_err());
        assert!(HyperfineModel::new(1.0, 1.0, vec![-0.1]).is_err());
    }
}
