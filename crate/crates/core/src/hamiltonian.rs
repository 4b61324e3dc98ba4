//! Frustration-free Hamiltonians as weighted sums of normalized local terms.
//!
//! Every term is normalized to have eigenvalues in `[0, 1]` with minimum exactly 0, and
//! the weights sum to 1. Under these conventions a Hamiltonian is frustration-free exactly
//! when its assembled ground energy is 0.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::PovmPair;
use crate::spectral::{ground_projector, spectral_gap, HermitianOperator, Projector, Spectrum};
use crate::{CMatrix, DEFAULT_DEGENERACY_TOL};

/// Eigenvalue slack allowed on a normalized term.
pub const TERM_TOL: f64 = 1e-10;
/// Slack on the sum of weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Ground energies at or below this count as zero after assembly.
pub const ASSEMBLY_TOL: f64 = 1e-9;

/// Affine rescaling `(raw - lambda_min) / (lambda_max - lambda_min)`.
///
/// Constant operators (zero spectral range) map to the zero operator.
pub fn normalize_term(raw: &HermitianOperator) -> HermitianOperator {
    let spectrum = raw.spectrum();
    let min = spectrum.values[0];
    let max = *spectrum.values.last().expect("non-empty spectrum");
    let range = max - min;
    let scale = min.abs().max(max.abs()).max(1.0);
    if range <= 1e-14 * scale {
        return HermitianOperator::from_real_diagonal(&vec![0.0; raw.dim()]);
    }
    let dim = raw.dim();
    let shifted = (raw.entries() - CMatrix::identity(dim, dim) * Complex64::new(min, 0.0))
        / Complex64::new(range, 0.0);
    let values: Vec<f64> = spectrum
        .values
        .iter()
        .map(|&l| ((l - min) / range).clamp(0.0, 1.0))
        .collect();
    HermitianOperator::with_spectrum(
        shifted,
        Spectrum {
            values,
            vectors: spectrum.vectors.clone(),
        },
    )
}

/// Place a `2^k x 2^k` operator acting on `support` into the full `2^n` space, with
/// identity on every other qubit. `support[0]` is the most significant local factor.
pub fn embed(local: &CMatrix, support: &[usize], n_qubits: usize) -> Result<CMatrix> {
    let k = support.len();
    if local.nrows() != 1 << k || local.ncols() != 1 << k {
        return Err(Error::DimensionMismatch {
            expected: 1 << k,
            found: local.nrows(),
        });
    }
    for &q in support {
        if q >= n_qubits {
            return Err(Error::SupportOutOfRange { index: q, n_qubits });
        }
    }
    let dim = 1usize << n_qubits;
    let masks: Vec<usize> = support.iter().map(|&q| 1 << (n_qubits - 1 - q)).collect();
    let support_mask: usize = masks.iter().sum();
    let scatter = |local_index: usize| -> usize {
        masks
            .iter()
            .enumerate()
            .filter(|(j, _)| local_index & (1 << (k - 1 - j)) != 0)
            .map(|(_, m)| m)
            .sum()
    };
    let scattered: Vec<usize> = (0..1 << k).map(scatter).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let base = row & !support_mask;
        let local_row = scattered
            .iter()
            .position(|&bits| bits == row & support_mask)
            .expect("every support pattern has a local index");
        for (local_col, &bits) in scattered.iter().enumerate() {
            out[(row, base | bits)] = local[(local_row, local_col)];
        }
    }
    Ok(out)
}

/// One weighted, normalized local term `omega_i H_i`.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    support: Vec<usize>,
    operator: HermitianOperator,
    weight: f64,
}

impl LocalTerm {
    /// The operator must already be normalized (spectrum in `[0, 1]`, minimum 0).
    pub fn new(support: Vec<usize>, operator: HermitianOperator, weight: f64) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidParameter("term support is empty".into()));
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "term support {support:?} repeats a qubit"
            )));
        }
        if operator.dim() != 1 << support.len() {
            return Err(Error::DimensionMismatch {
                expected: 1 << support.len(),
                found: operator.dim(),
            });
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "term weight must be positive, got {weight}"
            )));
        }
        let (min, max) = (operator.min_eigenvalue(), operator.max_eigenvalue());
        if min.abs() > TERM_TOL || max > 1.0 + TERM_TOL {
            return Err(Error::NotNormalizedTerm { min, max });
        }
        Ok(Self {
            support,
            operator,
            weight,
        })
    }

    /// Normalizes `raw` with [`normalize_term`] first.
    pub fn from_raw(support: Vec<usize>, raw: &HermitianOperator, weight: f64) -> Result<Self> {
        Self::new(support, normalize_term(raw), weight)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn with_weight(&self, weight: f64) -> Result<Self> {
        Self::new(self.support.clone(), self.operator.clone(), weight)
    }

    /// True when every eigenvalue is 0 or 1, i.e. the term is itself a projector.
    pub fn is_projective(&self) -> bool {
        self.operator
            .eigenvalues()
            .iter()
            .all(|&l| l.abs() <= TERM_TOL || (l - 1.0).abs() <= TERM_TOL)
    }

    pub fn embedded(&self, n_qubits: usize) -> Result<CMatrix> {
        embed(self.operator.entries(), &self.support, n_qubits)
    }
}

/// `H = sum_i omega_i H_i` over `n_qubits` qubits, with `sum_i omega_i = 1`.
#[derive(Debug, Clone)]
pub struct FrustrationFreeHamiltonian {
    n_qubits: usize,
    terms: Vec<LocalTerm>,
    degeneracy_tol: f64,
    full: OnceLock<HermitianOperator>,
    pub(crate) povms: OnceLock<Vec<PovmPair>>,
}

impl FrustrationFreeHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<LocalTerm>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("n_qubits must be positive".into()));
        }
        if terms.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one term is required".into(),
            ));
        }
        for term in &terms {
            for &q in term.support() {
                if q >= n_qubits {
                    return Err(Error::SupportOutOfRange { index: q, n_qubits });
                }
            }
        }
        let sum: f64 = terms.iter().map(LocalTerm::weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightsNotNormalized { sum });
        }
        Ok(Self {
            n_qubits,
            terms,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
            full: OnceLock::new(),
            povms: OnceLock::new(),
        })
    }

    /// Builds terms with weights `weights / sum(weights)`.
    pub fn with_weights(
        n_qubits: usize,
        parts: Vec<(Vec<usize>, HermitianOperator)>,
        weights: &[f64],
    ) -> Result<Self> {
        if parts.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: parts.len(),
                found: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidParameter(
                "weights must sum to a positive value".into(),
            ));
        }
        let terms = parts
            .into_iter()
            .zip(weights)
            .map(|((support, op), &w)| LocalTerm::new(support, op, w / total))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, terms)
    }

    /// Equal weights `1/m` over the given normalized operators.
    pub fn uniform(n_qubits: usize, parts: Vec<(Vec<usize>, HermitianOperator)>) -> Result<Self> {
        let weights = vec![1.0; parts.len()];
        Self::with_weights(n_qubits, parts, &weights)
    }

    pub fn with_degeneracy_tol(mut self, tol: f64) -> Self {
        self.degeneracy_tol = tol;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    /// Assembled `sum_i omega_i (H_i (x) I)` on the full `2^n` space.
    pub fn assemble_full(&self) -> &HermitianOperator {
        self.full.get_or_init(|| {
            let dim = self.dim();
            let mut acc = CMatrix::zeros(dim, dim);
            for term in &self.terms {
                let embedded = term
                    .embedded(self.n_qubits)
                    .expect("supports validated at construction");
                acc += embedded * Complex64::new(term.weight, 0.0);
            }
            HermitianOperator::hermitize(acc)
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.assemble_full().min_eigenvalue()
    }

    pub fn ground_projector(&self) -> Projector {
        ground_projector(self.assemble_full(), self.degeneracy_tol)
    }

    pub fn gap(&self) -> Result<f64> {
        spectral_gap(self.assemble_full(), self.degeneracy_tol)
    }

    /// Ground energy is 0 within [`ASSEMBLY_TOL`].
    pub fn is_frustration_free(&self) -> bool {
        self.ground_energy() <= ASSEMBLY_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::max_abs_diff;
    use crate::CVector;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn proj1() -> HermitianOperator {
        HermitianOperator::from_real_diagonal(&[0.0, 1.0])
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
    }

    #[test]
    fn normalize_examples() {
        let n = normalize_term(&HermitianOperator::from_real_diagonal(&[2.0, 4.0]));
        assert!(
            n.max_abs_diff(HermitianOperator::from_real_diagonal(&[0.0, 1.0]).entries()) < 1e-15
        );
        let p = proj1();
        assert!(normalize_term(&p).max_abs_diff(p.entries()) < 1e-15);
        let constant = normalize_term(&HermitianOperator::from_real_diagonal(&[3.0, 3.0]));
        assert!(constant.max_abs_diff(&CMatrix::zeros(2, 2)) < 1e-15);
    }

    #[test]
    fn normalized_random_term_spans_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = CMatrix::from_fn(4, 4, |_, _| {
                Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
            });
            let raw = HermitianOperator::hermitize(&a + a.adjoint());
            let n = normalize_term(&raw);
            let fresh = HermitianOperator::new(n.entries().clone()).unwrap();
            assert!(fresh.min_eigenvalue().abs() < 1e-12);
            assert!(fresh.max_eigenvalue() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn embedding_places_qubit_zero_most_significant() {
        // |1><1| on qubit 0 of two qubits is diag(0, 0, 1, 1).
        let e = embed(proj1().entries(), &[0], 2).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 1.0, 1.0]);
        assert!(expected.max_abs_diff(&e) < 1e-15);
        let e = embed(proj1().entries(), &[1], 2).unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 0.0, 1.0]);
        assert!(expected.max_abs_diff(&e) < 1e-15);
    }

    #[test]
    fn embedding_matches_kronecker_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = CMatrix::from_fn(2, 2, |_, _| Complex64::new(rng.random(), rng.random()));
        let b = CMatrix::from_fn(2, 2, |_, _| Complex64::new(rng.random(), rng.random()));
        let i2 = CMatrix::identity(2, 2);
        let ab = a.kronecker(&b);
        // support [0, 2] of three qubits: a on qubit 0, b on qubit 2.
        let expected = a.kronecker(&i2).kronecker(&b);
        assert!(max_abs_diff(&embed(&ab, &[0, 2], 3).unwrap(), &expected) < 1e-15);
        // Reversed support order swaps the factors.
        let ba = b.kronecker(&a);
        assert!(max_abs_diff(&embed(&ba, &[2, 0], 3).unwrap(), &expected) < 1e-15);
        assert!(matches!(
            embed(&ab, &[0, 3], 3),
            Err(Error::SupportOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn assemble_examples() {
        let h = FrustrationFreeHamiltonian::uniform(1, vec![(vec![0], proj1())]).unwrap();
        assert!(h.assemble_full().max_abs_diff(proj1().entries()) < 1e-15);

        let h =
            FrustrationFreeHamiltonian::uniform(2, vec![(vec![0], proj1()), (vec![1], proj1())])
                .unwrap();
        let expected = HermitianOperator::from_real_diagonal(&[0.0, 0.5, 0.5, 1.0]);
        assert!(h.assemble_full().max_abs_diff(expected.entries()) < 1e-15);
    }

    #[test]
    fn stabilizer_terms_give_bell_ground_state() {
        let i4 = CMatrix::identity(4, 4);
        let zz = pauli_z().kronecker(&pauli_z());
        let xx = pauli_x().kronecker(&pauli_x());
        let t1 = HermitianOperator::new((&i4 - zz) * c(0.5)).unwrap();
        let t2 = HermitianOperator::new((&i4 - xx) * c(0.5)).unwrap();
        let h = FrustrationFreeHamiltonian::uniform(2, vec![(vec![0, 1], t1), (vec![0, 1], t2)])
            .unwrap();
        assert_abs_diff_eq!(h.ground_energy(), 0.0, epsilon = 1e-12);
        let p = h.ground_projector();
        assert_eq!(p.rank(), 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        assert!(max_abs_diff(p.matrix(), &(&bell * bell.adjoint())) < 1e-12);
        assert!(h.is_frustration_free());
    }

    #[test]
    fn constructor_validation() {
        let bad_weight = vec![LocalTerm::new(vec![0], proj1(), 0.7).unwrap()];
        assert!(matches!(
            FrustrationFreeHamiltonian::new(1, bad_weight),
            Err(Error::WeightsNotNormalized { .. })
        ));
        let out_of_range = vec![LocalTerm::new(vec![2], proj1(), 1.0).unwrap()];
        assert!(matches!(
            FrustrationFreeHamiltonian::new(2, out_of_range),
            Err(Error::SupportOutOfRange { index: 2, .. })
        ));
        let unnormalized = HermitianOperator::from_real_diagonal(&[0.0, 2.0]);
        assert!(matches!(
            LocalTerm::new(vec![0], unnormalized.clone(), 1.0),
            Err(Error::NotNormalizedTerm { .. })
        ));
        assert!(LocalTerm::from_raw(vec![0], &unnormalized, 1.0).is_ok());
        assert!(LocalTerm::new(vec![0, 0], HermitianOperator::zeros(4), 1.0).is_err());
    }

    #[test]
    fn assembly_is_linear_in_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let parts: Vec<(Vec<usize>, HermitianOperator)> = (0..3)
            .map(|i| {
                let a = CMatrix::from_fn(4, 4, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                let op = normalize_term(&HermitianOperator::hermitize(&a + a.adjoint()));
                (vec![i, (i + 1) % 3], op)
            })
            .collect();
        let w1 = [0.2, 0.3, 0.5];
        let w2 = [0.6, 0.1, 0.3];
        let (a, b) = (0.25, 0.75);
        let mix: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
        let h1 = FrustrationFreeHamiltonian::with_weights(3, parts.clone(), &w1).unwrap();
        let h2 = FrustrationFreeHamiltonian::with_weights(3, parts.clone(), &w2).unwrap();
        let hm = FrustrationFreeHamiltonian::with_weights(3, parts, &mix).unwrap();
        let combo = h1.assemble_full().entries() * c(a) + h2.assemble_full().entries() * c(b);
        assert!(hm.assemble_full().max_abs_diff(&combo) < 1e-12);
    }
}
