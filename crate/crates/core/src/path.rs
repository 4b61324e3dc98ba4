//! Interpolation paths `H(s)`, `s in [0, 1]`, and their uniform discretization.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::FrustrationFreeHamiltonian;
use crate::spectral::spectral_norm;

/// Produces the instantaneous Hamiltonian at a path parameter.
pub type PathSampler = Arc<dyn Fn(f64) -> Result<FrustrationFreeHamiltonian> + Send + Sync>;

#[derive(Clone)]
pub enum PathKind {
    /// `H(s) = H_I = H_F` for every `s`.
    Constant,
    /// `(1 - s) H_I + s H_F`, kept as the union of both term lists with scaled weights.
    Linear,
    /// Arbitrary family given by a sampler.
    Custom { label: String, sampler: PathSampler },
}

impl fmt::Debug for PathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathKind::Constant => f.write_str("Constant"),
            PathKind::Linear => f.write_str("Linear"),
            PathKind::Custom { label, .. } => {
                f.debug_struct("Custom").field("label", label).finish()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct InterpolationPath {
    initial: FrustrationFreeHamiltonian,
    target: FrustrationFreeHamiltonian,
    kind: PathKind,
}

impl InterpolationPath {
    pub fn linear(
        initial: FrustrationFreeHamiltonian,
        target: FrustrationFreeHamiltonian,
    ) -> Result<Self> {
        if initial.n_qubits() != target.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: initial.n_qubits(),
                found: target.n_qubits(),
            });
        }
        Ok(Self {
            initial,
            target,
            kind: PathKind::Linear,
        })
    }

    /// `H(s) = H` for every `s`.
    pub fn constant(h: FrustrationFreeHamiltonian) -> Self {
        Self {
            initial: h.clone(),
            target: h,
            kind: PathKind::Constant,
        }
    }

    /// Endpoints are sampled once here and returned verbatim by [`Self::at`].
    pub fn custom(label: impl Into<String>, sampler: PathSampler) -> Result<Self> {
        let initial = sampler(0.0)?;
        let target = sampler(1.0)?;
        if initial.n_qubits() != target.n_qubits() {
            return Err(Error::DimensionMismatch {
                expected: initial.n_qubits(),
                found: target.n_qubits(),
            });
        }
        Ok(Self {
            initial,
            target,
            kind: PathKind::Custom {
                label: label.into(),
                sampler,
            },
        })
    }

    pub fn initial(&self) -> &FrustrationFreeHamiltonian {
        &self.initial
    }

    pub fn target(&self) -> &FrustrationFreeHamiltonian {
        &self.target
    }

    pub fn kind(&self) -> &PathKind {
        &self.kind
    }

    pub fn n_qubits(&self) -> usize {
        self.initial.n_qubits()
    }

    pub fn kind_name(&self) -> &str {
        match &self.kind {
            PathKind::Constant => "constant",
            PathKind::Linear => "linear",
            PathKind::Custom { label, .. } => label,
        }
    }

    pub fn at(&self, s: f64) -> Result<FrustrationFreeHamiltonian> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!(
                "path parameter {s} outside [0, 1]"
            )));
        }
        if s == 0.0 {
            return Ok(self.initial.clone());
        }
        if s == 1.0 {
            return Ok(self.target.clone());
        }
        match &self.kind {
            PathKind::Constant => Ok(self.initial.clone()),
            PathKind::Custom { sampler, .. } => sampler(s),
            PathKind::Linear => {
                let scaled_initial = self
                    .initial
                    .terms()
                    .iter()
                    .map(|t| t.with_weight((1.0 - s) * t.weight()));
                let scaled_target = self
                    .target
                    .terms()
                    .iter()
                    .map(|t| t.with_weight(s * t.weight()));
                let terms = scaled_initial
                    .chain(scaled_target)
                    .collect::<Result<Vec<_>>>()?;
                Ok(FrustrationFreeHamiltonian::new(self.n_qubits(), terms)?
                    .with_degeneracy_tol(self.initial.degeneracy_tol()))
            }
        }
    }
}

/// Outcome of checking that the ground energy vanishes along a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrustrationFreeReport {
    pub passed: bool,
    /// Largest ground energy seen on the grid.
    pub max_residual: f64,
    /// Path parameter where `max_residual` occurs.
    pub worst_s: f64,
    pub samples: usize,
    pub tolerance: f64,
}

impl FrustrationFreeReport {
    pub(crate) fn from_points(points: impl IntoIterator<Item = (f64, f64)>, tol: f64) -> Self {
        let mut report = Self {
            passed: true,
            max_residual: f64::NEG_INFINITY,
            worst_s: 0.0,
            samples: 0,
            tolerance: tol,
        };
        for (s, ground_energy) in points {
            report.samples += 1;
            if ground_energy > report.max_residual {
                report.max_residual = ground_energy;
                report.worst_s = s;
            }
            if ground_energy > tol {
                report.passed = false;
            }
        }
        report
    }
}

/// Evaluate the ground energy of `path(s)` on a uniform grid of `n_samples` points.
pub fn verify_frustration_free(
    path: &InterpolationPath,
    n_samples: usize,
    tol: f64,
) -> Result<FrustrationFreeReport> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(
            "n_samples must be at least 2".into(),
        ));
    }
    let points = (0..n_samples)
        .map(|j| {
            let s = j as f64 / (n_samples - 1) as f64;
            Ok((s, path.at(s)?.ground_energy()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrustrationFreeReport::from_points(points, tol))
}

/// `H_n = H(n / N)` for `n = 0..=N`.
#[derive(Debug, Clone)]
pub struct DiscretizedPath {
    steps: Vec<FrustrationFreeHamiltonian>,
}

impl DiscretizedPath {
    /// Number of measured steps `N` (one fewer than the number of Hamiltonians).
    pub fn n_steps(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn steps(&self) -> &[FrustrationFreeHamiltonian] {
        &self.steps
    }

    pub fn step(&self, n: usize) -> &FrustrationFreeHamiltonian {
        &self.steps[n]
    }

    pub fn s(&self, n: usize) -> f64 {
        n as f64 / self.n_steps() as f64
    }

    /// Apply one ground-band tolerance to every step.
    pub fn with_degeneracy_tol(self, tol: f64) -> Self {
        Self {
            steps: self
                .steps
                .into_iter()
                .map(|h| h.with_degeneracy_tol(tol))
                .collect(),
        }
    }

    /// Ground energies of every step, as a frustration-freeness report.
    pub fn frustration_free_report(&self, tol: f64) -> FrustrationFreeReport {
        FrustrationFreeReport::from_points(
            self.steps
                .iter()
                .enumerate()
                .map(|(n, h)| (self.s(n), h.ground_energy())),
            tol,
        )
    }
}

pub fn discretize(path: &InterpolationPath, n_steps: usize) -> Result<DiscretizedPath> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let steps = (0..=n_steps)
        .map(|n| path.at(n as f64 / n_steps as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscretizedPath { steps })
}

/// `||H_n - H_{n-1}||` for `1 <= n <= N`.
pub fn step_difference_norm(path: &DiscretizedPath, n: usize) -> Result<f64> {
    let max = path.n_steps();
    if n == 0 || n > max {
        return Err(Error::IndexOutOfRange { index: n, max });
    }
    let diff = path.steps[n]
        .assemble_full()
        .checked_sub(path.steps[n - 1].assemble_full())?;
    Ok(spectral_norm(&diff))
}
