//! k-SAT clause projectors (k <= 3).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::FrustrationFreeHamiltonian;
use crate::path::{verify_frustration_free, InterpolationPath};
use crate::spectral::HermitianOperator;
use crate::CMatrix;

use super::{CheckedPath, FF_CHECK_SAMPLES, FF_CHECK_TOL};

/// Variable count above which brute-force satisfiability counting is refused.
pub const MAX_SAT_VARS: usize = 20;

/// A disjunction of at most three literals over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    /// 0-based variable (qubit) indices.
    pub variables: Vec<usize>,
    /// `negated[j]` is true for the literal `NOT x_{variables[j]}`.
    pub negated: Vec<bool>,
}

impl Clause {
    pub fn new(variables: Vec<usize>, negated: Vec<bool>) -> Result<Self> {
        if variables.is_empty() || variables.len() > 3 {
            return Err(Error::InvalidParameter(format!(
                "clauses need 1 to 3 literals, got {}",
                variables.len()
            )));
        }
        if variables.len() != negated.len() {
            return Err(Error::DimensionMismatch {
                expected: variables.len(),
                found: negated.len(),
            });
        }
        let mut sorted = variables.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "clause repeats a variable: {variables:?}"
            )));
        }
        Ok(Self { variables, negated })
    }

    /// From DIMACS literals: `3` is `x_2`, `-1` is `NOT x_0`.
    pub fn from_literals(literals: &[i64]) -> Result<Self> {
        let mut variables = Vec::with_capacity(literals.len());
        let mut negated = Vec::with_capacity(literals.len());
        for &lit in literals {
            if lit == 0 {
                return Err(Error::Parse("literal 0 inside a clause".into()));
            }
            variables.push((lit.unsigned_abs() - 1) as usize);
            negated.push(lit < 0);
        }
        Self::new(variables, negated)
    }

    /// The single assignment of the clause's variables that violates it.
    pub fn violating_bits(&self) -> Vec<bool> {
        self.negated.clone()
    }

    pub fn is_satisfied_by(&self, assignment: usize, n_vars: usize) -> bool {
        self.variables
            .iter()
            .zip(&self.negated)
            .any(|(&v, &neg)| bit(assignment, v, n_vars) != neg)
    }

    /// `|violating><violating|` on the clause variables, in clause order.
    pub fn projector(&self) -> HermitianOperator {
        let index = self
            .violating_bits()
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let dim = 1 << self.variables.len();
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        HermitianOperator::from_real_diagonal(&diag)
    }
}

/// Value of variable `v` in basis index `assignment`, qubit 0 most significant.
fn bit(assignment: usize, v: usize, n_vars: usize) -> bool {
    (assignment >> (n_vars - 1 - v)) & 1 == 1
}

pub(crate) fn max_variable(clauses: &[Clause]) -> usize {
    clauses
        .iter()
        .flat_map(|c| c.variables.iter())
        .map(|&v| v + 1)
        .max()
        .unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct SatInstance {
    pub hamiltonian: FrustrationFreeHamiltonian,
    pub clauses: Vec<Clause>,
    pub n_vars: usize,
    pub satisfiable: bool,
    /// Basis indices of all satisfying assignments.
    pub satisfying_assignments: Vec<usize>,
}

impl SatInstance {
    pub fn require_satisfiable(&self) -> Result<&FrustrationFreeHamiltonian> {
        if self.satisfiable {
            Ok(&self.hamiltonian)
        } else {
            Err(Error::UnsatisfiableInstance)
        }
    }
}

/// Uniformly weighted clause projectors. Unsatisfiable formulas are returned with
/// `satisfiable = false`; use [`SatInstance::require_satisfiable`] to reject them.
pub fn sat_projector_instance(clauses: &[Clause], n_vars: usize) -> Result<SatInstance> {
    if clauses.is_empty() {
        return Err(Error::InvalidParameter("formula has no clauses".into()));
    }
    if n_vars == 0 || n_vars > MAX_SAT_VARS {
        return Err(Error::InvalidParameter(format!(
            "n_vars must lie in 1..={MAX_SAT_VARS}, got {n_vars}"
        )));
    }
    for clause in clauses {
        if let Some(&v) = clause.variables.iter().find(|&&v| v >= n_vars) {
            return Err(Error::SupportOutOfRange {
                index: v,
                n_qubits: n_vars,
            });
        }
    }
    let parts = clauses
        .iter()
        .map(|c| (c.variables.clone(), c.projector()))
        .collect();
    let hamiltonian = FrustrationFreeHamiltonian::uniform(n_vars, parts)?;
    let satisfying_assignments: Vec<usize> = (0..1usize << n_vars)
        .filter(|&a| clauses.iter().all(|c| c.is_satisfied_by(a, n_vars)))
        .collect();
    Ok(SatInstance {
        hamiltonian,
        clauses: clauses.to_vec(),
        n_vars,
        satisfiable: !satisfying_assignments.is_empty(),
        satisfying_assignments,
    })
}

/// Parse DIMACS CNF (`c` comments, one `p cnf V C` header, 0-terminated clauses).
pub fn parse_dimacs(text: &str) -> Result<(usize, Vec<Clause>)> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| {
                Error::Parse(format!("line {}: malformed header {line:?}", lineno + 1))
            })?);
            continue;
        }
        let Some((n_vars, _)) = header else {
            return Err(Error::Parse(format!(
                "line {}: clause before `p cnf` header",
                lineno + 1
            )));
        };
        for token in line.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad literal {token:?}", lineno + 1)))?;
            if lit == 0 {
                clauses.push(
                    Clause::from_literals(&current)
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
                );
                current.clear();
            } else {
                if lit.unsigned_abs() as usize > n_vars {
                    return Err(Error::Parse(format!(
                        "line {}: literal {lit} exceeds {n_vars} variables",
                        lineno + 1
                    )));
                }
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(Clause::from_literals(&current)?);
    }
    let (n_vars, n_clauses) =
        header.ok_or_else(|| Error::Parse("missing `p cnf` header".into()))?;
    if clauses.len() != n_clauses {
        return Err(Error::Parse(format!(
            "header declares {n_clauses} clauses, found {}",
            clauses.len()
        )));
    }
    Ok((n_vars, clauses))
}

/// `sum_q (I - X_q) / 2n`, whose unique ground state is `|+...+>`.
pub fn transverse_hamiltonian(n_qubits: usize) -> Result<FrustrationFreeHamiltonian> {
    let half = Complex64::new(0.5, 0.0);
    let minus_plus =
        HermitianOperator::new(CMatrix::from_row_slice(2, 2, &[half, -half, -half, half]))?;
    FrustrationFreeHamiltonian::uniform(
        n_qubits,
        (0..n_qubits)
            .map(|q| (vec![q], minus_plus.clone()))
            .collect(),
    )
}

/// Linear path from [`transverse_hamiltonian`] to the clause Hamiltonian. The mixed
/// Hamiltonians are generally frustrated; the attached report records whether they are.
pub fn sat_transverse_path(instance: &SatInstance) -> Result<CheckedPath> {
    let path = InterpolationPath::linear(
        transverse_hamiltonian(instance.n_vars)?,
        instance.hamiltonian.clone(),
    )?;
    let report = verify_frustration_free(&path, FF_CHECK_SAMPLES, FF_CHECK_TOL)?;
    Ok(CheckedPath { path, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_clause_projector() {
        // (x0 OR NOT x1) is violated only by x0 = 0, x1 = 1.
        let clause = Clause::from_literals(&[1, -2]).unwrap();
        let p = clause.projector();
        assert_eq!(p.eigenvalues(), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.entries()[(1, 1)].re, 1.0);
        let inst = sat_projector_instance(&[clause], 2).unwrap();
        assert!(inst.satisfiable);
        assert_eq!(inst.satisfying_assignments, vec![0, 2, 3]);
        assert_eq!(inst.hamiltonian.ground_projector().rank(), 3);
    }

    #[test]
    fn unsatisfiable_formula_is_flagged() {
        let clauses: Vec<Clause> = [[1], [-1]]
            .iter()
            .map(|c| Clause::from_literals(c).unwrap())
            .collect();
        let inst = sat_projector_instance(&clauses, 1).unwrap();
        assert!(!inst.satisfiable);
        assert_abs_diff_eq!(inst.hamiltonian.ground_energy(), 0.5, epsilon = 1e-12);
        assert_eq!(
            inst.require_satisfiable().unwrap_err(),
            Error::UnsatisfiableInstance
        );
    }

    #[test]
    fn ground_space_matches_satisfying_assignments() {
        let clauses: Vec<Clause> = [vec![1, 2, -3], vec![-1, 3], vec![2, 3]]
            .iter()
            .map(|c| Clause::from_literals(c).unwrap())
            .collect();
        let inst = sat_projector_instance(&clauses, 3).unwrap();
        let h = &inst.hamiltonian;
        assert_abs_diff_eq!(h.ground_energy(), 0.0, epsilon = 1e-12);
        let p = h.ground_projector();
        assert_eq!(p.rank(), inst.satisfying_assignments.len());
        for &a in &inst.satisfying_assignments {
            assert_abs_diff_eq!(p.matrix()[(a, a)].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn clause_validation() {
        assert!(Clause::from_literals(&[1, 2, 3, 4]).is_err());
        assert!(Clause::from_literals(&[]).is_err());
        assert!(Clause::from_literals(&[2, -2]).is_err());
        let c = Clause::from_literals(&[3]).unwrap();
        assert!(matches!(
            sat_projector_instance(&[c], 2),
            Err(Error::SupportOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn dimacs_parsing() {
        let text = "c example\np cnf 3 2\n1 -3 0\n2 3\n-1 0\n";
        let (n, clauses) = parse_dimacs(text).unwrap();
        assert_eq!(n, 3);
        assert_eq!(clauses.len(), 2);
        assert_eq!(clauses[0].variables, vec![0, 2]);
        assert_eq!(clauses[0].negated, vec![false, true]);
        assert_eq!(clauses[1].variables, vec![1, 2, 0]);
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 5 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 0\n").is_err());
    }

    #[test]
    fn transverse_start() {
        let h = transverse_hamiltonian(2).unwrap();
        assert_abs_diff_eq!(h.gap().unwrap(), 0.5, epsilon = 1e-12);
        let p = h.ground_projector();
        assert_eq!(p.rank(), 1);
        assert_abs_diff_eq!(p.matrix()[(0, 3)].re, 0.25, epsilon = 1e-12);
    }
}
