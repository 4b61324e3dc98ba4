//! Dense Hermitian linear algebra: eigendecomposition, PSD square roots, norms,
//! ground-space projectors and gaps.
//!
//! Everything is dense. At the target scale (up to ten qubits) a full eigendecomposition
//! is cheap and is the most trustworthy way to get at spectral quantities.

use std::sync::OnceLock;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::QuantumState;
use crate::CMatrix;

/// Largest tolerated `|A_ij - conj(A_ji)|` for an input to count as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero by PSD operations.
pub const PSD_TOL: f64 = 1e-10;

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// A dense complex Hermitian matrix with a lazily computed, write-once spectral cache.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    entries: CMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl HermitianOperator {
    /// Checks Hermiticity within [`HERMITICITY_TOL`] and stores the symmetrized
    /// `(A + A^dagger) / 2`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let max_deviation = max_hermitian_deviation(&entries);
        if max_deviation > HERMITICITY_TOL {
            return Err(Error::NonHermitianInput { max_deviation });
        }
        Ok(Self::hermitize(entries))
    }

    /// Symmetrizes without checking. For matrices that are Hermitian by construction and
    /// only carry round-off asymmetry.
    pub(crate) fn hermitize(entries: CMatrix) -> Self {
        let sym = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        Self {
            entries: sym,
            spectrum: OnceLock::new(),
        }
    }

    /// Attach a spectrum already known to belong to `entries`.
    pub(crate) fn with_spectrum(entries: CMatrix, spectrum: Spectrum) -> Self {
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Self {
            entries,
            spectrum: cell,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::hermitize(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::hermitize(CMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        let spectrum = {
            // Cache the spectrum directly; diagonal operators appear often enough in tests
            // that the exact eigenbasis is worth keeping.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
            let mut vectors = CMatrix::zeros(n, n);
            for (col, &i) in order.iter().enumerate() {
                vectors[(i, col)] = Complex64::new(1.0, 0.0);
            }
            Spectrum {
                values: order.iter().map(|&i| diag[i]).collect(),
                vectors,
            }
        };
        Self::with_spectrum(m, spectrum)
    }

    /// `|v><v|` for a (not necessarily normalized) vector.
    pub fn outer(v: &crate::CVector) -> Self {
        Self::hermitize(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum
            .get_or_init(|| compute_spectrum(&self.entries))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self
            .eigenvalues()
            .last()
            .expect("operator has dimension >= 1")
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::hermitize(&self.entries * Complex64::new(factor, 0.0))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::hermitize(&self.entries + &other.entries))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self::hermitize(&self.entries - &other.entries))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        max_abs_diff(&self.entries, other)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

pub fn max_hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn compute_spectrum(m: &CMatrix) -> Spectrum {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Spectrum { values, vectors }
}

/// Ascending eigenvalues and unitary eigenvector matrix of a Hermitian operator.
pub fn eigendecompose(op: &HermitianOperator) -> (Vec<f64>, CMatrix) {
    let s = op.spectrum();
    (s.values.clone(), s.vectors.clone())
}

/// `V f(diag(lambda)) V^dagger`.
pub(crate) fn spectral_map(op: &HermitianOperator, f: impl Fn(f64) -> f64) -> CMatrix {
    let s = op.spectrum();
    let n = op.dim();
    let mut scaled = s.vectors.clone();
    for (c, &lambda) in s.values.iter().enumerate() {
        let w = Complex64::new(f(lambda), 0.0);
        for r in 0..n {
            scaled[(r, c)] *= w;
        }
    }
    scaled * s.vectors.adjoint()
}

/// Principal square root of a positive semidefinite operator.
///
/// Eigenvalues in `[-1e-10, 0)` are clipped to zero; anything more negative is rejected.
pub fn psd_sqrt(op: &HermitianOperator) -> Result<HermitianOperator> {
    let min = op.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    Ok(HermitianOperator::hermitize(spectral_map(op, |l| {
        l.max(0.0).sqrt()
    })))
}

/// Operator norm, which for a Hermitian operator is its largest absolute eigenvalue.
pub fn spectral_norm(op: &HermitianOperator) -> f64 {
    let values = op.eigenvalues();
    values[0].abs().max(values[values.len() - 1].abs())
}

/// Half the trace norm of `rho_a - rho_b`.
pub fn trace_distance(a: &QuantumState, b: &QuantumState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if let (Some(u), Some(v)) = (a.as_pure(), b.as_pure()) {
        let overlap = u.dotc(v).norm_sqr().min(1.0);
        return Ok((1.0 - overlap).sqrt());
    }
    let diff = a.to_density_matrix().as_ref() - b.to_density_matrix().as_ref();
    Ok(trace_norm_half(&diff))
}

/// `1/2 sum |lambda_i|` of a Hermitian matrix, clamped to `[0, 1]`.
pub(crate) fn trace_norm_half(diff: &CMatrix) -> f64 {
    let sym = (diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
    let total: f64 = sym.symmetric_eigenvalues().iter().map(|l| l.abs()).sum();
    (0.5 * total).clamp(0.0, 1.0)
}

/// Orthogonal projector with a known rank.
#[derive(Debug, Clone)]
pub struct Projector {
    operator: HermitianOperator,
    rank: usize,
}

impl Projector {
    /// Projector onto the span of the given orthonormal columns.
    pub fn from_orthonormal_columns(columns: &CMatrix) -> Self {
        Self {
            operator: HermitianOperator::hermitize(columns * columns.adjoint()),
            rank: columns.ncols(),
        }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn matrix(&self) -> &CMatrix {
        self.operator.entries()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// `Tr(P rho)`.
    pub fn overlap(&self, state: &QuantumState) -> Result<f64> {
        state.expectation(self.matrix())
    }

    /// Normalized projection `P rho P / Tr(P rho)` of a state onto the range.
    pub fn project(&self, state: &QuantumState) -> Result<(QuantumState, f64)> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let p = self.matrix();
        match state.as_pure() {
            Some(psi) => {
                let projected = p * psi;
                let weight = projected.norm_squared();
                if weight <= 0.0 {
                    return Err(Error::ZeroGroundOverlap);
                }
                let out = QuantumState::pure_normalized(state.n_qubits(), projected)?;
                Ok((out, weight))
            }
            None => {
                let rho = state.to_density_matrix();
                let projected = p * rho.as_ref() * p;
                let weight = projected.trace().re;
                if weight <= 0.0 {
                    return Err(Error::ZeroGroundOverlap);
                }
                let out = QuantumState::density_trusted(
                    state.n_qubits(),
                    projected / Complex64::new(weight, 0.0),
                );
                Ok((out, weight))
            }
        }
    }
}

/// Number of eigenvalues within `degeneracy_tol` of the minimum.
pub fn ground_band_size(op: &HermitianOperator, degeneracy_tol: f64) -> usize {
    let values = op.eigenvalues();
    let cutoff = values[0] + degeneracy_tol;
    values.iter().take_while(|&&l| l <= cutoff).count()
}

/// Projector onto the eigenvectors whose eigenvalue lies within `degeneracy_tol` of the
/// minimum eigenvalue.
pub fn ground_projector(op: &HermitianOperator, degeneracy_tol: f64) -> Projector {
    let rank = ground_band_size(op, degeneracy_tol);
    let vectors = op.spectrum().vectors.columns(0, rank).into_owned();
    Projector::from_orthonormal_columns(&vectors)
}

/// Distance from the minimum eigenvalue to the first eigenvalue above the ground band.
pub fn spectral_gap(op: &HermitianOperator, degeneracy_tol: f64) -> Result<f64> {
    let values = op.eigenvalues();
    let rank = ground_band_size(op, degeneracy_tol);
    if rank == values.len() {
        return Err(Error::NoGap);
    }
    Ok(values[rank] - values[0])
}
