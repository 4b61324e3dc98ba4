//! Pauli strings and stabilizer Hamiltonians.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::FrustrationFreeHamiltonian;
use crate::path::{verify_frustration_free, InterpolationPath};
use crate::spectral::HermitianOperator;
use crate::CMatrix;

use super::{CheckedPath, FF_CHECK_SAMPLES, FF_CHECK_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> CMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// Signed tensor product of single-qubit Paulis, one character per qubit ("XZI", "-ZZ").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    negative: bool,
    ops: Vec<Pauli>,
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {text:?}")));
        }
        let ops = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!(
                    "invalid Pauli character {other:?} in {text:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { negative, ops })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        for op in &self.ops {
            f.write_str(match op {
                Pauli::I => "I",
                Pauli::X => "X",
                Pauli::Y => "Y",
                Pauli::Z => "Z",
            })?;
        }
        Ok(())
    }
}

impl PauliString {
    pub fn n_qubits(&self) -> usize {
        self.ops.len()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// Symplectic `(x | z)` bit vector.
    pub fn symplectic(&self) -> Vec<bool> {
        let (xs, zs): (Vec<bool>, Vec<bool>) = self.ops.iter().map(|p| p.bits()).unzip();
        xs.into_iter().chain(zs).collect()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let anticommuting_sites = self
            .ops
            .iter()
            .zip(&other.ops)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anticommuting_sites % 2 == 0
    }

    /// Signed operator restricted to `support` (identity factors included where the string
    /// has `I`). `support` must contain every non-identity position.
    pub fn matrix_on(&self, support: &[usize]) -> Result<CMatrix> {
        for q in self.support() {
            if !support.contains(&q) {
                return Err(Error::InvalidParameter(format!(
                    "support {support:?} misses qubit {q} of {self}"
                )));
            }
        }
        let mut m = CMatrix::identity(1, 1);
        for &q in support {
            let op = self.ops.get(q).copied().ok_or(Error::SupportOutOfRange {
                index: q,
                n_qubits: self.ops.len(),
            })?;
            m = m.kronecker(&op.matrix());
        }
        if self.negative {
            m = -m;
        }
        Ok(m)
    }

    /// `(I - S) / 2` on the string's support: the projector onto its `-1` eigenspace.
    pub fn violation_projector(&self) -> Result<(Vec<usize>, HermitianOperator)> {
        let support = self.support();
        if support.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{self} is proportional to the identity"
            )));
        }
        let s = self.matrix_on(&support)?;
        let dim = s.nrows();
        let p = (CMatrix::identity(dim, dim) - s) * Complex64::new(0.5, 0.0);
        Ok((support, HermitianOperator::new(p)?))
    }
}

/// Rank over GF(2) of a set of bit vectors.
pub fn gf2_rank(rows: &[Vec<bool>]) -> usize {
    let mut rows: Vec<Vec<bool>> = rows.to_vec();
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] {
                let pivot_row = rows[rank].clone();
                for (bit, p) in rows[r].iter_mut().zip(pivot_row) {
                    *bit ^= p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Checks length, mutual commutation and independence of a generator set.
pub fn validate_generators(generators: &[PauliString], n_qubits: usize) -> Result<()> {
    if generators.is_empty() {
        return Err(Error::InvalidParameter("generator set is empty".into()));
    }
    for g in generators {
        if g.n_qubits() != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: g.n_qubits(),
            });
        }
    }
    for i in 0..generators.len() {
        for j in i + 1..generators.len() {
            if !generators[i].commutes_with(&generators[j]) {
                return Err(Error::NonCommutingGenerators(i, j));
            }
        }
    }
    let rows: Vec<Vec<bool>> = generators.iter().map(PauliString::symplectic).collect();
    if gf2_rank(&rows) != generators.len() {
        return Err(Error::DependentGenerators);
    }
    Ok(())
}

/// `sum_i (I - S_i) / 2m` for a commuting, independent generator set.
pub fn stabilizer_hamiltonian(
    generators: &[PauliString],
    n_qubits: usize,
) -> Result<FrustrationFreeHamiltonian> {
    validate_generators(generators, n_qubits)?;
    let parts = generators
        .iter()
        .map(PauliString::violation_projector)
        .collect::<Result<Vec<_>>>()?;
    FrustrationFreeHamiltonian::uniform(n_qubits, parts)
}

pub fn parse_generators(texts: &[impl AsRef<str>]) -> Result<Vec<PauliString>> {
    texts.iter().map(|t| t.as_ref().parse()).collect()
}

/// Linear path between two stabilizer Hamiltonians, with its frustration-freeness report.
///
/// Mid-path frustration-freeness holds only when the two stabilizer groups share a
/// common +1 eigenstate; the attached report says whether it does.
pub fn stabilizer_path(
    initial: &[PauliString],
    target: &[PauliString],
    n_qubits: usize,
) -> Result<CheckedPath> {
    let path = InterpolationPath::linear(
        stabilizer_hamiltonian(initial, n_qubits)?,
        stabilizer_hamiltonian(target, n_qubits)?,
    )?;
    let report = verify_frustration_free(&path, FF_CHECK_SAMPLES, FF_CHECK_TOL)?;
    Ok(CheckedPath { path, report })
}

/// Stabilizer path that rotates generators instead of mixing Hamiltonians.
///
/// Generator `j` becomes `S_j(s) = cos(theta) A_j + sin(theta) B_j` with `theta = s pi / 2`.
/// Pairs with `A_j = B_j` stay fixed; every other pair must anticommute so that
/// `S_j(s)^2 = I`, and generators at different positions must commute in all combinations.
/// Each `H(s)` is then a sum of commuting projectors, frustration-free at every `s`.
pub fn stabilizer_rotation_path(
    initial: &[PauliString],
    target: &[PauliString],
    n_qubits: usize,
) -> Result<CheckedPath> {
    validate_generators(initial, n_qubits)?;
    validate_generators(target, n_qubits)?;
    if initial.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: initial.len(),
            found: target.len(),
        });
    }
    for (j, (a, b)) in initial.iter().zip(target).enumerate() {
        if a != b && a.commutes_with(b) {
            return Err(Error::InvalidParameter(format!(
                "rotated generator pair {j} ({a}, {b}) must anticommute"
            )));
        }
        for (k, (c, d)) in initial.iter().zip(target).enumerate().skip(j + 1) {
            for (x, y) in [(a, c), (a, d), (b, c), (b, d)] {
                if !x.commutes_with(y) {
                    return Err(Error::NonCommutingGenerators(j, k));
                }
            }
        }
    }
    let pairs: Vec<(PauliString, PauliString)> = initial
        .iter()
        .cloned()
        .zip(target.iter().cloned())
        .collect();
    let sampler = Arc::new(move |s: f64| rotated_hamiltonian(&pairs, n_qubits, s));
    let path = InterpolationPath::custom("stabilizer-rotation", sampler)?;
    let report = verify_frustration_free(&path, FF_CHECK_SAMPLES, FF_CHECK_TOL)?;
    Ok(CheckedPath { path, report })
}

fn rotated_hamiltonian(
    pairs: &[(PauliString, PauliString)],
    n_qubits: usize,
    s: f64,
) -> Result<FrustrationFreeHamiltonian> {
    let (cos, sin) = if s == 0.0 {
        (1.0, 0.0)
    } else if s == 1.0 {
        (0.0, 1.0)
    } else {
        let theta = s * std::f64::consts::FRAC_PI_2;
        (theta.cos(), theta.sin())
    };
    let parts = pairs
        .iter()
        .map(|(a, b)| {
            if a == b {
                return a.violation_projector();
            }
            let mut support = a.support();
            support.extend(b.support());
            support.sort_unstable();
            support.dedup();
            let rotated = a.matrix_on(&support)? * Complex64::new(cos, 0.0)
                + b.matrix_on(&support)? * Complex64::new(sin, 0.0);
            let dim = rotated.nrows();
            let p = (CMatrix::identity(dim, dim) - rotated) * Complex64::new(0.5, 0.0);
            Ok((support, HermitianOperator::new(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    FrustrationFreeHamiltonian::uniform(n_qubits, parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::max_abs_diff;
    use crate::CVector;
    use approx::assert_abs_diff_eq;

    fn gens(texts: &[&str]) -> Vec<PauliString> {
        parse_generators(texts).unwrap()
    }

    fn ground_vector(h: &FrustrationFreeHamiltonian) -> CVector {
        let p = h.ground_projector();
        assert_eq!(p.rank(), 1);
        h.assemble_full().spectrum().vectors.column(0).into_owned()
    }

    #[test]
    fn parsing_and_display() {
        let p: PauliString = "-XZI".parse().unwrap();
        assert!(p.is_negative());
        assert_eq!(p.support(), vec![0, 1]);
        assert_eq!(p.to_string(), "-XZI");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
        assert_eq!("+ZZ".parse::<PauliString>().unwrap().to_string(), "ZZ");
    }

    #[test]
    fn commutation() {
        let g = gens(&["XX", "ZZ", "ZI", "YY"]);
        assert!(g[0].commutes_with(&g[1]));
        assert!(!g[0].commutes_with(&g[2]));
        assert!(g[3].commutes_with(&g[0]));
    }

    #[test]
    fn generator_validation() {
        assert_eq!(
            validate_generators(&gens(&["XI", "ZI"]), 2),
            Err(Error::NonCommutingGenerators(0, 1))
        );
        assert_eq!(
            validate_generators(&gens(&["ZZ", "ZI", "IZ"]), 2),
            Err(Error::DependentGenerators)
        );
        assert_eq!(
            validate_generators(&gens(&["Z", "-Z"]), 1),
            Err(Error::DependentGenerators)
        );
        assert!(validate_generators(&gens(&["ZZ", "XX"]), 2).is_ok());
    }

    #[test]
    fn stabilizer_terms_are_projectors() {
        let h = stabilizer_hamiltonian(&gens(&["ZZI", "IZZ", "XXX"]), 3).unwrap();
        for term in h.terms() {
            assert!(term.is_projective());
            let m = term.operator().entries();
            assert!(max_abs_diff(&(m * m), m) < 1e-12);
        }
    }

    #[test]
    fn plus_plus_to_bell_endpoints() {
        let checked = stabilizer_path(&gens(&["XI", "IX"]), &gens(&["ZZ", "XX"]), 2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h0 = checked.path.initial();
        let h1 = checked.path.target();
        assert_abs_diff_eq!(h0.ground_energy(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h1.ground_energy(), 0.0, epsilon = 1e-12);
        let plus_plus = CVector::from_element(4, Complex64::new(0.5, 0.0));
        let bell = CVector::from_vec(vec![
            Complex64::new(s, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
        ]);
        assert_abs_diff_eq!(
            ground_vector(h0).dotc(&plus_plus).norm(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(ground_vector(h1).dotc(&bell).norm(), 1.0, epsilon = 1e-12);
        // The endpoint ground states differ, so the mixed Hamiltonians are frustrated.
        assert!(!checked.report.passed);
    }

    #[test]
    fn single_qubit_x_to_z() {
        let checked = stabilizer_path(&gens(&["X"]), &gens(&["Z"]), 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = CVector::from_element(2, Complex64::new(s, 0.0));
        let zero = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert_abs_diff_eq!(
            ground_vector(checked.path.initial()).dotc(&plus).norm(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ground_vector(checked.path.target()).dotc(&zero).norm(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rotation_path_is_frustration_free() {
        let checked =
            stabilizer_rotation_path(&gens(&["XX", "XI"]), &gens(&["XX", "ZZ"]), 2).unwrap();
        assert!(checked.report.passed, "{:?}", checked.report);
        assert!(checked.report.max_residual <= 1e-12);
        let mid = checked.path.at(0.37).unwrap();
        assert!(mid.terms().iter().all(|t| t.is_projective()));
        assert_abs_diff_eq!(mid.gap().unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn rotation_path_rejects_commuting_pairs() {
        assert!(stabilizer_rotation_path(&gens(&["ZI"]), &gens(&["ZZ"]), 2).is_err());
    }
}
