//! Random frustration-free Hamiltonians with a planted ground state.
//!
//! Each term acts on a support `S` larger than half the system. The planted state `|phi>`
//! has a reduced density matrix on `S` of rank at most `2^(n-|S|) < 2^|S|`, so the
//! kernel of that reduced state is non-trivial. The term is a random positive operator
//! compressed to that kernel, which annihilates `|phi>` exactly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{normalize_term, FrustrationFreeHamiltonian, LocalTerm};
use crate::path::{verify_frustration_free, InterpolationPath};
use crate::spectral::HermitianOperator;
use crate::state::{gaussian_complex, QuantumState};
use crate::{CMatrix, CVector};

use super::{CheckedPath, FF_CHECK_SAMPLES, FF_CHECK_TOL};

/// Largest supported system; the construction is verified densely.
pub const MAX_RANDOM_QUBITS: usize = 4;
/// Attempts per term before giving up on a non-constant compressed operator.
const MAX_ATTEMPTS: usize = 32;
/// Largest `|| H_i phi ||` accepted for the planted state.
const ANNIHILATION_TOL: f64 = 1e-10;
/// Eigenvalues of the reduced state above this count as its range.
const RANGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RandomFfInstance {
    pub hamiltonian: FrustrationFreeHamiltonian,
    pub planted: QuantumState,
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_RANDOM_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "n_qubits must lie in 1..={MAX_RANDOM_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Random instance with `m_terms` terms on `n_qubits` qubits, reproducible from `seed`.
pub fn random_ff_instance(n_qubits: usize, m_terms: usize, seed: u64) -> Result<RandomFfInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check_size(n_qubits)?;
    let planted = QuantumState::random_pure(n_qubits, &mut rng);
    let hamiltonian = random_ff_with_planted_state(&planted, m_terms, &mut rng)?;
    Ok(RandomFfInstance {
        hamiltonian,
        planted,
    })
}

/// Random instance whose ground space contains the given pure state.
pub fn random_ff_with_planted_state(
    planted: &QuantumState,
    m_terms: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<FrustrationFreeHamiltonian> {
    let phi = planted
        .as_pure()
        .ok_or_else(|| Error::InvalidState("planted state must be pure".into()))?;
    let n = planted.n_qubits();
    if m_terms == 0 {
        return Err(Error::InvalidParameter("m_terms must be at least 1".into()));
    }
    let mut terms = Vec::with_capacity(m_terms);
    for _ in 0..m_terms {
        let k = rng.random_range(n / 2 + 1..=n);
        let mut qubits: Vec<usize> = (0..n).collect();
        qubits.shuffle(rng);
        let support: Vec<usize> = qubits[..k].to_vec();
        let operator = annihilating_term(phi, &support, n, rng)?;
        let weight = rng.random_range(0.2..1.0);
        terms.push(LocalTerm::new(support, operator, weight)?);
    }
    let total: f64 = terms.iter().map(LocalTerm::weight).sum();
    let terms = terms
        .iter()
        .map(|t| t.with_weight(t.weight() / total))
        .collect::<Result<Vec<_>>>()?;
    let h = FrustrationFreeHamiltonian::new(n, terms)?;
    for (i, term) in h.terms().iter().enumerate() {
        let residual = (term.embedded(n)? * phi).norm();
        if residual > ANNIHILATION_TOL {
            return Err(Error::ConstructionFailed(format!(
                "term {i} leaves residual {residual:e} on the planted state"
            )));
        }
    }
    if h.ground_energy() > ANNIHILATION_TOL {
        return Err(Error::ConstructionFailed(format!(
            "ground energy {:e} is not zero",
            h.ground_energy()
        )));
    }
    Ok(h)
}

/// Reduced density matrix of `phi` on `support` (in support order).
fn reduced_density(phi: &CVector, support: &[usize], n: usize) -> CMatrix {
    let k = support.len();
    let rest: Vec<usize> = (0..n).filter(|q| !support.contains(q)).collect();
    let mut amplitudes = CMatrix::zeros(1 << k, 1 << rest.len());
    for (index, &a) in phi.iter().enumerate() {
        let gather = |qubits: &[usize]| {
            qubits
                .iter()
                .fold(0usize, |acc, &q| (acc << 1) | ((index >> (n - 1 - q)) & 1))
        };
        amplitudes[(gather(support), gather(&rest))] = a;
    }
    &amplitudes * amplitudes.adjoint()
}

fn annihilating_term(
    phi: &CVector,
    support: &[usize],
    n: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<HermitianOperator> {
    let sigma = HermitianOperator::new(reduced_density(phi, support, n))?;
    let spectrum = sigma.spectrum();
    let dim = sigma.dim();
    let mut kernel = CMatrix::zeros(dim, dim);
    for (j, &value) in spectrum.values.iter().enumerate() {
        if value <= RANGE_TOL {
            let v = spectrum.vectors.column(j);
            kernel += v * v.adjoint();
        }
    }
    for _ in 0..MAX_ATTEMPTS {
        let a = CMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
        let compressed = &kernel * (&a * a.adjoint()) * &kernel;
        let raw = HermitianOperator::new(compressed)?;
        if raw.max_eigenvalue() - raw.min_eigenvalue() > 1e-6 {
            return Ok(normalize_term(&raw));
        }
    }
    Err(Error::ConstructionFailed(format!(
        "no non-trivial term on support {support:?}"
    )))
}

/// Linear path between two independent random instances that share one planted state,
/// so every point of the path annihilates it.
pub fn random_ff_shared_path(n_qubits: usize, m_terms: usize, seed: u64) -> Result<CheckedPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check_size(n_qubits)?;
    let planted = QuantumState::random_pure(n_qubits, &mut rng);
    let initial = random_ff_with_planted_state(&planted, m_terms, &mut rng)?;
    let target = random_ff_with_planted_state(&planted, m_terms, &mut rng)?;
    let path = InterpolationPath::linear(initial, target)?;
    let report = verify_frustration_free(&path, FF_CHECK_SAMPLES, FF_CHECK_TOL)?;
    Ok(CheckedPath { path, report })
}
