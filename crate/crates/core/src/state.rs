//! Pure and mixed states on `n` qubits.

use std::borrow::Cow;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::spectral::{max_hermitian_deviation, HERMITICITY_TOL, PSD_TOL};
use crate::{CMatrix, CVector};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum StateForm {
    Pure(CVector),
    Density(CMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    form: StateForm,
}

fn check_len(n_qubits: usize, len: usize) -> Result<()> {
    let dim = 1usize << n_qubits;
    if len != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: len,
        });
    }
    Ok(())
}

impl QuantumState {
    /// Pure state; the vector must have unit norm within `1e-12`.
    pub fn pure(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "pure state has norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_qubits,
            form: StateForm::Pure(amplitudes),
        })
    }

    /// Pure state from an arbitrary non-zero vector, normalized on the way in.
    pub fn pure_normalized(n_qubits: usize, amplitudes: CVector) -> Result<Self> {
        check_len(n_qubits, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            n_qubits,
            form: StateForm::Pure(amplitudes / Complex64::new(norm, 0.0)),
        })
    }

    /// Density matrix; must be Hermitian, unit trace and PSD within tolerance.
    pub fn density(n_qubits: usize, rho: CMatrix) -> Result<Self> {
        check_len(n_qubits, rho.nrows())?;
        check_len(n_qubits, rho.ncols())?;
        let dev = max_hermitian_deviation(&rho);
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitianInput { max_deviation: dev });
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has trace {trace}, expected 1"
            )));
        }
        let sym = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min = sym
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self {
            n_qubits,
            form: StateForm::Density(sym),
        })
    }

    /// Density matrix produced by trusted internal algebra: symmetrized, not validated.
    pub(crate) fn density_trusted(n_qubits: usize, rho: CMatrix) -> Self {
        let sym = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            n_qubits,
            form: StateForm::Density(sym),
        }
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index,
                max: dim - 1,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            form: StateForm::Pure(v),
        })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            form: StateForm::Density(CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0)),
        }
    }

    /// Random mixed state `G G^dagger / Tr(G G^dagger)` with a complex Gaussian `G`.
    pub fn random_mixed(n_qubits: usize, rng: &mut (impl Rng + ?Sized)) -> Self {
        let dim = 1usize << n_qubits;
        let g = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
        let rho = &g * g.adjoint();
        let t = rho.trace();
        Self::density_trusted(n_qubits, rho / t)
    }

    /// Haar-random pure state.
    pub fn random_pure(n_qubits: usize, rng: &mut (impl Rng + ?Sized)) -> Self {
        let dim = 1usize << n_qubits;
        let v = CVector::from_fn(dim, |_, _| gaussian_complex(rng));
        Self::pure_normalized(n_qubits, v).expect("gaussian vector is non-zero")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn form(&self) -> &StateForm {
        &self.form
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.form, StateForm::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&CVector> {
        match &self.form {
            StateForm::Pure(v) => Some(v),
            StateForm::Density(_) => None,
        }
    }

    pub fn to_density_matrix(&self) -> Cow<'_, CMatrix> {
        match &self.form {
            StateForm::Pure(v) => Cow::Owned(v * v.adjoint()),
            StateForm::Density(m) => Cow::Borrowed(m),
        }
    }

    pub fn into_density(self) -> Self {
        match self.form {
            StateForm::Pure(ref v) => Self {
                n_qubits: self.n_qubits,
                form: StateForm::Density(v * v.adjoint()),
            },
            StateForm::Density(_) => self,
        }
    }

    /// `Re Tr(A rho)` for a Hermitian `A`.
    pub fn expectation(&self, op: &CMatrix) -> Result<f64> {
        if op.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.nrows(),
            });
        }
        Ok(match &self.form {
            StateForm::Pure(v) => v.dotc(&(op * v)).re,
            StateForm::Density(rho) => trace_of_product(op, rho),
        })
    }
}

/// `Re Tr(A B)` without forming the product.
pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

pub(crate) fn gaussian_complex(rng: &mut (impl Rng + ?Sized)) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validates_pure_norm() {
        let v = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(QuantumState::pure(1, v.clone()).is_err());
        let s = QuantumState::pure_normalized(1, v).unwrap();
        assert!((s.as_pure().unwrap().norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            QuantumState::pure(2, CVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn validates_density() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(QuantumState::density(1, bad_trace).is_err());
        let not_psd = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]));
        assert!(matches!(
            QuantumState::density(1, not_psd),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = QuantumState::random_mixed(2, &mut rng);
        let m = rho.to_density_matrix().into_owned();
        assert!(QuantumState::density(2, m).is_ok());
    }

    #[test]
    fn expectation_matches_between_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = QuantumState::random_pure(2, &mut rng);
        let rho = psi.clone().into_density();
        let a = CMatrix::from_fn(4, 4, |i, j| {
            Complex64::new((i + 2 * j) as f64, i as f64 - j as f64)
        });
        let herm = &a + a.adjoint();
        let e1 = psi.expectation(&herm).unwrap();
        let e2 = rho.expectation(&herm).unwrap();
        assert!((e1 - e2).abs() < 1e-12);
    }
}
