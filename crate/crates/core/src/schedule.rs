//! Step-count analysis for measuring a discretized path.
//!
//! Measuring `H_1, ..., H_N` in sequence succeeds with probability at least
//! `1 - sum_n ||H_n - H_{n-1}||^2 / g(H_n)^2`, so the sequence reaches the final ground
//! space with probability `1 - eps` whenever `N * max_n ratio_n <= eps`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{discretize, step_difference_norm, DiscretizedPath, InterpolationPath};
use crate::spectral::spectral_gap;

/// Default discretization used to estimate the path derivative.
pub const DEFAULT_PROBE_STEPS: usize = 64;

/// Upper limit for [`required_steps`].
pub const MAX_STEPS: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepAnalysis {
    pub n: usize,
    pub s: f64,
    pub gap: f64,
    pub delta_norm: f64,
    /// `delta_norm^2 / gap^2`, the failure bound of this step.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleAnalysis {
    pub n_steps: usize,
    pub per_step: Vec<StepAnalysis>,
    pub max_ratio: f64,
    /// `N * max_ratio`: the smallest `eps` for which the step condition holds.
    pub epsilon_bound: f64,
}

impl ScheduleAnalysis {
    /// `sum_n ratio_n`, the total failure bound of the sequence.
    pub fn total_ratio(&self) -> f64 {
        self.per_step.iter().map(|r| r.ratio).sum()
    }
}

pub fn analyze_schedule(
    path: &InterpolationPath,
    n_steps: usize,
    degeneracy_tol: f64,
) -> Result<ScheduleAnalysis> {
    analyze_discretized(&discretize(path, n_steps)?, degeneracy_tol)
}

pub fn analyze_discretized(
    path: &DiscretizedPath,
    degeneracy_tol: f64,
) -> Result<ScheduleAnalysis> {
    let n_steps = path.n_steps();
    let per_step = (1..=n_steps)
        .map(|n| {
            let s = path.s(n);
            let gap =
                spectral_gap(path.step(n).assemble_full(), degeneracy_tol).map_err(
                    |e| match e {
                        Error::NoGap => Error::NoGapAtStep { step: n, s },
                        other => other,
                    },
                )?;
            let delta_norm = step_difference_norm(path, n)?;
            Ok(StepAnalysis {
                n,
                s,
                gap,
                delta_norm,
                ratio: (delta_norm / gap).powi(2),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = per_step.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ScheduleAnalysis {
        n_steps,
        per_step,
        max_ratio,
        epsilon_bound: n_steps as f64 * max_ratio,
    })
}

/// Smallest certified `N` (up to the doubling search) with `N * max_ratio <= epsilon`.
///
/// The scaled difference `N (H_n - H_{n-1})` is estimated on a probe grid of `n_probe`
/// steps, which gives `N = ceil(max (N_probe ||dH||)^2 / g^2 / epsilon)`. The guess is then
/// checked with [`analyze_schedule`] and doubled until the check passes.
pub fn required_steps(
    path: &InterpolationPath,
    epsilon: f64,
    n_probe: usize,
    degeneracy_tol: f64,
) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let probe = analyze_schedule(path, n_probe, degeneracy_tol)?;
    let scaled = (n_probe as f64).powi(2) * probe.max_ratio;
    let guess = (scaled / epsilon).ceil();
    if guess > MAX_STEPS as f64 {
        return Err(Error::NonConvergent);
    }
    let mut n = (guess as usize).max(1);
    loop {
        if analyze_schedule(path, n, degeneracy_tol)?.epsilon_bound <= epsilon {
            return Ok(n);
        }
        n *= 2;
        if n > MAX_STEPS {
            return Err(Error::NonConvergent);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub s: f64,
    /// `None` when the operator at `s` has no gap above its ground band.
    pub gap: Option<f64>,
    pub ground_energy: f64,
}

pub fn gap_profile(
    path: &InterpolationPath,
    n_samples: usize,
    degeneracy_tol: f64,
) -> Result<Vec<GapPoint>> {
    if n_samples < 2 {
        return Err(Error::InvalidParameter(
            "n_samples must be at least 2".into(),
        ));
    }
    (0..n_samples)
        .map(|j| {
            let s = j as f64 / (n_samples - 1) as f64;
            let h = path.at(s)?;
            let op = h.assemble_full();
            Ok(GapPoint {
                s,
                gap: spectral_gap(op, degeneracy_tol).ok(),
                ground_energy: op.min_eigenvalue(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::FrustrationFreeHamiltonian;
    use crate::spectral::HermitianOperator;
    use crate::DEFAULT_DEGENERACY_TOL as TOL;
    use approx::assert_abs_diff_eq;

    fn diag(values: &[f64]) -> FrustrationFreeHamiltonian {
        FrustrationFreeHamiltonian::uniform(
            1,
            vec![(vec![0], HermitianOperator::from_real_diagonal(values))],
        )
        .unwrap()
    }

    #[test]
    fn constant_path_needs_one_step() {
        let path = InterpolationPath::constant(diag(&[0.0, 1.0]));
        let a = analyze_schedule(&path, 10, TOL).unwrap();
        assert!(a
            .per_step
            .iter()
            .all(|r| r.delta_norm == 0.0 && r.gap == 1.0));
        assert_eq!(a.epsilon_bound, 0.0);
        assert_eq!(
            required_steps(&path, 0.1, DEFAULT_PROBE_STEPS, TOL).unwrap(),
            1
        );
    }

    #[test]
    fn single_step_is_the_definition() {
        let initial = diag(&[0.0, 1.0]);
        let target = diag(&[0.0, 0.4]);
        let path = InterpolationPath::linear(initial, target).unwrap();
        let a = analyze_schedule(&path, 1, TOL).unwrap();
        assert_eq!(a.per_step.len(), 1);
        assert_abs_diff_eq!(a.epsilon_bound, (0.6f64 / 0.4).powi(2), epsilon = 1e-12);
    }

    #[test]
    fn gapless_step_reports_location() {
        // (1 - s)|1><1| + s|0><0| is I/2 at s = 1/2.
        let path = InterpolationPath::linear(diag(&[0.0, 1.0]), diag(&[1.0, 0.0])).unwrap();
        assert_eq!(
            analyze_schedule(&path, 4, TOL).unwrap_err(),
            Error::NoGapAtStep { step: 2, s: 0.5 }
        );
        assert!(matches!(
            required_steps(&path, 0.1, DEFAULT_PROBE_STEPS, TOL),
            Err(Error::NoGapAtStep { .. })
        ));
        let profile = gap_profile(&path, 5, TOL).unwrap();
        assert_eq!(profile[2].gap, None);
        assert_abs_diff_eq!(profile[2].ground_energy, 0.5, epsilon = 1e-12);
        assert!(profile[0].gap.is_some());
    }

    #[test]
    fn epsilon_is_validated() {
        let path = InterpolationPath::constant(diag(&[0.0, 1.0]));
        assert!(required_steps(&path, 0.0, 8, TOL).is_err());
        assert!(required_steps(&path, 1.0, 8, TOL).is_err());
    }

    #[test]
    fn constant_profile() {
        let path = InterpolationPath::constant(diag(&[0.0, 0.7]));
        let profile = gap_profile(&path, 6, TOL).unwrap();
        assert!(profile
            .iter()
            .all(|p| p.gap == Some(0.7) && p.ground_energy == 0.0));
    }
}
