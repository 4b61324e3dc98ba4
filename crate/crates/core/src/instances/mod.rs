//! Fixture families with known ground spaces, gaps and path behaviour.

pub mod pauli;
pub mod random;
pub mod sat;

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::FrustrationFreeHamiltonian;
use crate::path::{verify_frustration_free, FrustrationFreeReport, InterpolationPath};
use crate::spectral::HermitianOperator;
use crate::CVector;

pub use pauli::{stabilizer_path, stabilizer_rotation_path, PauliString};
pub use random::{random_ff_instance, random_ff_with_planted_state, RandomFfInstance};
pub use sat::{parse_dimacs, sat_projector_instance, Clause, SatInstance};

/// Grid used when a constructor attaches a frustration-freeness report.
pub const FF_CHECK_SAMPLES: usize = 33;
/// Ground-energy tolerance of those reports.
pub const FF_CHECK_TOL: f64 = 1e-9;

/// A path together with the frustration-freeness check performed at construction.
#[derive(Debug, Clone)]
pub struct CheckedPath {
    pub path: InterpolationPath,
    pub report: FrustrationFreeReport,
}

/// `cos(theta)|0> + sin(theta)|1>`, the ground state of the rotating projector at angle `theta`.
pub fn rotating_ground_state(theta: f64) -> CVector {
    CVector::from_vec(vec![
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(theta.sin(), 0.0),
    ])
}

/// One qubit, one projective term `|v(s)><v(s)|` with `v = -sin(theta)|0> + cos(theta)|1>`
/// and `theta = s * total_angle`. The gap is 1 everywhere and the ground state is
/// [`rotating_ground_state`]`(theta)`.
pub fn rotating_projector_path(total_angle: f64) -> Result<CheckedPath> {
    if !(total_angle > 0.0 && total_angle <= std::f64::consts::FRAC_PI_2 + 1e-15) {
        return Err(Error::InvalidParameter(format!(
            "total_angle must lie in (0, pi/2], got {total_angle}"
        )));
    }
    let sampler = Arc::new(move |s: f64| {
        let theta = s * total_angle;
        let v = CVector::from_vec(vec![
            Complex64::new(-theta.sin(), 0.0),
            Complex64::new(theta.cos(), 0.0),
        ]);
        FrustrationFreeHamiltonian::uniform(1, vec![(vec![0], HermitianOperator::outer(&v))])
    });
    let path = InterpolationPath::custom("rotating-projector", sampler)?;
    let report = verify_frustration_free(&path, FF_CHECK_SAMPLES, FF_CHECK_TOL)?;
    Ok(CheckedPath { path, report })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizerInterpolation {
    /// `(1 - s) H_I + s H_F`.
    #[default]
    Linear,
    /// Generator-by-generator rotation, see [`stabilizer_rotation_path`].
    Rotation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SatPath {
    /// Linear path from the uniform `(I - X_q) / 2` Hamiltonian.
    #[default]
    FromTransverse,
    /// The clause Hamiltonian alone, held fixed.
    Constant,
}

/// Serializable description of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSpec {
    RotatingProjector {
        total_angle: f64,
    },
    StabilizerPath {
        n_qubits: usize,
        initial: Vec<String>,
        #[serde(rename = "final")]
        target: Vec<String>,
        #[serde(default)]
        interpolation: StabilizerInterpolation,
    },
    SatProjector {
        #[serde(default)]
        n_vars: Option<usize>,
        /// Clauses as signed 1-based literals, DIMACS style.
        #[serde(default)]
        clauses: Option<Vec<Vec<i64>>>,
        /// DIMACS CNF file, used when `clauses` is absent.
        #[serde(default)]
        dimacs: Option<PathBuf>,
        #[serde(default)]
        path: SatPath,
    },
    RandomFf {
        n_qubits: usize,
        m_terms: usize,
        seed: u64,
        /// Interpolate between two instances sharing the planted state instead of a
        /// constant path.
        #[serde(default)]
        interpolate: bool,
    },
}

impl InstanceSpec {
    pub fn family(&self) -> &'static str {
        match self {
            InstanceSpec::RotatingProjector { .. } => "rotating-projector",
            InstanceSpec::StabilizerPath { .. } => "stabilizer-path",
            InstanceSpec::SatProjector { .. } => "sat-projector",
            InstanceSpec::RandomFf { .. } => "random-ff",
        }
    }

    pub fn build(&self) -> Result<CheckedPath> {
        match self {
            InstanceSpec::RotatingProjector { total_angle } => {
                rotating_projector_path(*total_angle)
            }
            InstanceSpec::StabilizerPath {
                n_qubits,
                initial,
                target,
                interpolation,
            } => {
                let initial = pauli::parse_generators(initial)?;
                let target = pauli::parse_generators(target)?;
                match interpolation {
                    StabilizerInterpolation::Linear => {
                        stabilizer_path(&initial, &target, *n_qubits)
                    }
                    StabilizerInterpolation::Rotation => {
                        stabilizer_rotation_path(&initial, &target, *n_qubits)
                    }
                }
            }
            InstanceSpec::SatProjector {
                n_vars,
                clauses,
                dimacs,
                path,
            } => {
                let (n_vars, clauses) = match (clauses, dimacs) {
                    (Some(literals), _) => {
                        let clauses = literals
                            .iter()
                            .map(|c| Clause::from_literals(c))
                            .collect::<Result<Vec<_>>>()?;
                        let n_vars = n_vars.unwrap_or_else(|| sat::max_variable(&clauses));
                        (n_vars, clauses)
                    }
                    (None, Some(file)) => {
                        let text = std::fs::read_to_string(file).map_err(|e| {
                            Error::Parse(format!("cannot read {}: {e}", file.display()))
                        })?;
                        parse_dimacs(&text)?
                    }
                    (None, None) => {
                        return Err(Error::InvalidParameter(
                            "sat-projector needs `clauses` or `dimacs`".into(),
                        ))
                    }
                };
                let instance = sat_projector_instance(&clauses, n_vars)?;
                match path {
                    SatPath::FromTransverse => sat::sat_transverse_path(&instance),
                    SatPath::Constant => {
                        let path = InterpolationPath::constant(instance.hamiltonian);
                        let report = verify_frustration_free(&path, 2, FF_CHECK_TOL)?;
                        Ok(CheckedPath { path, report })
                    }
                }
            }
            InstanceSpec::RandomFf {
                n_qubits,
                m_terms,
                seed,
                interpolate,
            } => {
                if *interpolate {
                    random::random_ff_shared_path(*n_qubits, *m_terms, *seed)
                } else {
                    let instance = random_ff_instance(*n_qubits, *m_terms, *seed)?;
                    let path = InterpolationPath::constant(instance.hamiltonian);
                    let report = verify_frustration_free(&path, 2, FF_CHECK_TOL)?;
                    Ok(CheckedPath { path, report })
                }
            }
        }
    }
}
