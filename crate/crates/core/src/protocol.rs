//! End-to-end runs of the step-by-step measurement protocol.
//!
//! The system starts in the ground space of `H_0 = H(0)` and for `n = 1..=N` the
//! Hamiltonian `H_n = H(n / N)` is measured. The ideal variant projects onto the ground
//! space of `H_n` directly; the measured variant instead applies the random-term operation
//! `k_n` times. In both cases the run succeeds only if every step succeeds.
//!
//! Every run evolves the success-conditioned density matrix exactly. Trajectory and both
//! modes additionally sample pure-state trajectories and report an empirical success rate.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    apply_m_repeated, apply_m_trajectory_repeated, trajectory_rng, RepetitionPolicy,
};
use crate::path::{discretize, step_difference_norm, FrustrationFreeReport, InterpolationPath};
use crate::schedule::{required_steps, ScheduleAnalysis, DEFAULT_PROBE_STEPS};
use crate::spectral::{spectral_gap, trace_distance, Projector};
use crate::state::{gaussian_complex, QuantumState};
use crate::{CVector, DEFAULT_DEGENERACY_TOL};

/// Slack allowed when comparing a realized step failure with its bound.
const BOUND_SLACK: f64 = 1e-9;
/// Ground energy above which the discretized path is reported as frustrated.
const FF_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolMode {
    #[default]
    ExactChannel,
    Trajectory,
    Both,
}

impl ProtocolMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolMode::ExactChannel => "exact-channel",
            ProtocolMode::Trajectory => "trajectory",
            ProtocolMode::Both => "both",
        }
    }

    fn samples_trajectories(self) -> bool {
        self != ProtocolMode::ExactChannel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Exact ground-space projections.
    Ideal,
    /// Repeated random-term measurements.
    Measured,
}

/// Repetition rule for the measured variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum RepetitionConfig {
    Fixed {
        k: u64,
    },
    /// `k_n = ceil(alpha / g(H_n))`, extended until the step is within `delta / 2N` of its
    /// target. `alpha` defaults to `ln(4N / delta)`.
    Adaptive {
        #[serde(default)]
        alpha: Option<f64>,
        k_max: u64,
    },
}

impl Default for RepetitionConfig {
    fn default() -> Self {
        RepetitionConfig::Adaptive {
            alpha: None,
            k_max: 100_000,
        }
    }
}

impl RepetitionConfig {
    /// Per-step policy for a run with `n_steps` steps and failure budget `delta`.
    pub fn policy(&self, n_steps: usize, delta: f64) -> Result<RepetitionPolicy> {
        let policy = match *self {
            RepetitionConfig::Fixed { k } => RepetitionPolicy::Fixed { k },
            RepetitionConfig::Adaptive { alpha, k_max } => RepetitionPolicy::Adaptive {
                alpha: alpha.unwrap_or_else(|| (4.0 * n_steps as f64 / delta).ln()),
                target_distance: delta / (2.0 * n_steps as f64),
                k_max,
            },
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Run parameters; the path itself is passed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub epsilon: f64,
    /// `0` selects the ideal variant.
    #[serde(default)]
    pub delta: f64,
    /// Number of steps; computed from `epsilon` when absent.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub repetition: RepetitionConfig,
    #[serde(default)]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: ProtocolMode,
    #[serde(default = "default_degeneracy_tol")]
    pub degeneracy_tol: f64,
}

fn default_degeneracy_tol() -> f64 {
    DEFAULT_DEGENERACY_TOL
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            delta: 0.0,
            steps: None,
            repetition: RepetitionConfig::default(),
            trajectories: 0,
            seed: 0,
            mode: ProtocolMode::ExactChannel,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in [0, 1), got {}",
                self.delta
            )));
        }
        if self.epsilon + self.delta >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon + delta must be below 1, got {}",
                self.epsilon + self.delta
            )));
        }
        if self.steps == Some(0) {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if self.mode.samples_trajectories() && self.trajectories == 0 {
            return Err(Error::InvalidParameter(format!(
                "mode {} needs trajectories > 0",
                self.mode.as_str()
            )));
        }
        if self.degeneracy_tol.is_nan() || self.degeneracy_tol < 0.0 {
            return Err(Error::InvalidParameter(
                "degeneracy_tol must be non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        if self.delta == 0.0 {
            Variant::Ideal
        } else {
            Variant::Measured
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    pub s: f64,
    /// Probability that step `n` succeeds given success so far.
    pub p_n: f64,
    pub epsilon_n: f64,
    /// `||H_n - H_{n-1}||^2 / g(H_n)^2`.
    pub bound_epsilon_n: f64,
    /// `Tr(P_n rho_n)` after the step.
    pub overlap_after: f64,
    /// Applications of the operation (0 in the ideal variant).
    pub k_used: u64,
    /// Trace distance from `rho_n` to the normalized projection of `rho_{n-1}` onto the
    /// ground space of `H_n`.
    pub distance_to_ground: f64,
    pub within_step_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSuccess {
    pub rate: f64,
    pub std_error: f64,
    pub n_trajectories: usize,
}

impl EmpiricalSuccess {
    fn from_counts(successes: usize, n: usize) -> Self {
        let rate = successes as f64 / n as f64;
        Self {
            rate,
            std_error: (rate * (1.0 - rate) / n as f64).sqrt(),
            n_trajectories: n,
        }
    }
}

/// Full record of one run. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub variant: Variant,
    pub mode: ProtocolMode,
    pub seed: u64,
    pub path_kind: String,
    pub epsilon: f64,
    pub delta: f64,
    pub n_used: usize,
    /// True when `n_used` was computed from `epsilon`.
    pub n_from_schedule: bool,
    /// Ground energies of the measured steps `H_0..H_N`.
    pub frustration_free: FrustrationFreeReport,
    pub per_step: Vec<StepRecord>,
    /// `prod_n p_n` from the exact channel.
    pub overall_success_exact: f64,
    pub overall_success_empirical: Option<EmpiricalSuccess>,
    /// `max(0, 1 - sum_n bound_epsilon_n)`.
    pub success_lower_bound: f64,
    /// `1 - epsilon - delta`.
    pub target_success: f64,
    pub meets_target: bool,
    /// `Tr(P_N rho_N)`.
    pub final_state_fidelity: f64,
    pub final_distance_to_target: f64,
    /// `N / max_n (N ||H_n - H_{n-1}||)`; absent for constant paths.
    pub conventional_time: Option<f64>,
}

/// A report together with the exact final state.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub report: ProtocolReport,
    pub final_state: QuantumState,
}

/// `N / max_n (N * delta_norm_n)`, i.e. the reciprocal of the largest step norm.
pub fn compute_conventional_time(analysis: &ScheduleAnalysis) -> Result<f64> {
    let max_norm = analysis
        .per_step
        .iter()
        .map(|r| r.delta_norm)
        .fold(0.0, f64::max);
    if max_norm <= 0.0 {
        return Err(Error::DegeneratePath);
    }
    let n = analysis.n_steps as f64;
    Ok(n / (n * max_norm))
}

/// Per-step data shared by the exact and trajectory backends.
struct Prepared {
    steps: crate::path::DiscretizedPath,
    projectors: Vec<Projector>,
    bounds: Vec<f64>,
    max_delta_norm: f64,
    n_from_schedule: bool,
}

fn prepare(path: &InterpolationPath, config: &ProtocolConfig) -> Result<Prepared> {
    config.validate()?;
    let tol = config.degeneracy_tol;
    let (n_steps, n_from_schedule) = match config.steps {
        Some(n) => (n, false),
        None => (
            required_steps(path, config.epsilon, DEFAULT_PROBE_STEPS, tol)?,
            true,
        ),
    };
    let steps = discretize(path, n_steps)?.with_degeneracy_tol(tol);
    let projectors: Vec<Projector> = steps.steps().iter().map(|h| h.ground_projector()).collect();
    let mut bounds = Vec::with_capacity(n_steps);
    let mut max_delta_norm: f64 = 0.0;
    for n in 1..=n_steps {
        let gap = spectral_gap(steps.step(n).assemble_full(), tol).map_err(|e| match e {
            Error::NoGap => Error::NoGapAtStep {
                step: n,
                s: steps.s(n),
            },
            other => other,
        })?;
        let delta_norm = step_difference_norm(&steps, n)?;
        max_delta_norm = max_delta_norm.max(delta_norm);
        bounds.push((delta_norm / gap).powi(2));
    }
    Ok(Prepared {
        steps,
        projectors,
        bounds,
        max_delta_norm,
        n_from_schedule,
    })
}

/// Ground state of `H_0`: the ground vector when it is unique, otherwise the
/// maximally mixed state on the ground space.
fn exact_initial_state(prepared: &Prepared) -> QuantumState {
    let h0 = prepared.steps.step(0);
    let projector = &prepared.projectors[0];
    if projector.rank() == 1 {
        let v = h0.assemble_full().spectrum().vectors.column(0).into_owned();
        QuantumState::pure(h0.n_qubits(), v).expect("eigenvectors have unit norm")
    } else {
        let rho = projector.matrix() / num_complex::Complex64::new(projector.rank() as f64, 0.0);
        QuantumState::density(h0.n_qubits(), rho).expect("normalized projector is a state")
    }
}

/// Uniformly random unit vector in the ground space of `H_0`.
fn sampled_initial_state(prepared: &Prepared, rng: &mut impl Rng) -> Result<QuantumState> {
    let h0 = prepared.steps.step(0);
    let projector = &prepared.projectors[0];
    if projector.rank() == 1 {
        return Ok(exact_initial_state(prepared));
    }
    let basis = h0
        .assemble_full()
        .spectrum()
        .vectors
        .columns(0, projector.rank());
    let coefficients = CVector::from_fn(projector.rank(), |_, _| gaussian_complex(rng));
    QuantumState::pure_normalized(h0.n_qubits(), basis * coefficients)
}

/// Run the variant selected by `config.delta`.
pub fn run(path: &InterpolationPath, config: &ProtocolConfig) -> Result<ProtocolRun> {
    match config.variant() {
        Variant::Ideal => run_ideal(path, config),
        Variant::Measured => run_measured(path, config),
    }
}

/// Ideal variant: exact projection onto each ground space in turn.
pub fn run_ideal(path: &InterpolationPath, config: &ProtocolConfig) -> Result<ProtocolRun> {
    let prepared = prepare(path, config)?;
    let n_steps = prepared.steps.n_steps();
    let mut state = exact_initial_state(&prepared);
    let mut per_step = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let projector = &prepared.projectors[n];
        let (next, p_n) = projector.project(&state)?;
        let p_n = p_n.clamp(0.0, 1.0);
        let bound = prepared.bounds[n - 1];
        let epsilon_n = 1.0 - p_n;
        per_step.push(StepRecord {
            n,
            s: prepared.steps.s(n),
            p_n,
            epsilon_n,
            bound_epsilon_n: bound,
            overlap_after: projector.overlap(&next)?,
            k_used: 0,
            distance_to_ground: 0.0,
            within_step_bound: epsilon_n <= bound + BOUND_SLACK,
        });
        state = next;
    }
    let empirical = if config.mode.samples_trajectories() {
        Some(sample_trajectories(config, |rng| {
            ideal_trajectory(&prepared, rng)
        })?)
    } else {
        None
    };
    finish(path, config, &prepared, per_step, empirical, state, 0.0)
}

/// Measured variant: `k_n` applications of the random-term operation per step.
pub fn run_measured(path: &InterpolationPath, config: &ProtocolConfig) -> Result<ProtocolRun> {
    if config.delta <= 0.0 {
        return Err(Error::InvalidParameter(
            "the measured variant needs delta > 0".into(),
        ));
    }
    let prepared = prepare(path, config)?;
    let n_steps = prepared.steps.n_steps();
    let policy = config.repetition.policy(n_steps, config.delta)?;
    let mut state = exact_initial_state(&prepared);
    let mut per_step = Vec::with_capacity(n_steps);
    let mut final_distance = 0.0;
    for n in 1..=n_steps {
        let h = prepared.steps.step(n);
        let repeated = apply_m_repeated(h, &state, &policy)?;
        let bound = prepared.bounds[n - 1];
        let epsilon_n = 1.0 - repeated.cumulative_success;
        per_step.push(StepRecord {
            n,
            s: prepared.steps.s(n),
            p_n: repeated.cumulative_success,
            epsilon_n,
            bound_epsilon_n: bound,
            overlap_after: *repeated
                .overlap_trace
                .last()
                .expect("trace holds the input"),
            k_used: repeated.k_used,
            distance_to_ground: repeated.distance_to_target,
            within_step_bound: epsilon_n <= bound + BOUND_SLACK,
        });
        final_distance = repeated.distance_to_target;
        state = repeated.state;
    }
    let empirical = if config.mode.samples_trajectories() {
        let schedule: Vec<u64> = per_step.iter().map(|r| r.k_used).collect();
        Some(sample_trajectories(config, |rng| {
            measured_trajectory(&prepared, &schedule, rng)
        })?)
    } else {
        None
    };
    finish(
        path,
        config,
        &prepared,
        per_step,
        empirical,
        state,
        final_distance,
    )
}

fn finish(
    path: &InterpolationPath,
    config: &ProtocolConfig,
    prepared: &Prepared,
    per_step: Vec<StepRecord>,
    empirical: Option<EmpiricalSuccess>,
    final_state: QuantumState,
    final_distance: f64,
) -> Result<ProtocolRun> {
    let overall: f64 = per_step.iter().map(|r| r.p_n).product();
    let bound_sum: f64 = prepared.bounds.iter().sum();
    let target_success = 1.0 - config.epsilon - config.delta;
    let final_projector = prepared.projectors.last().expect("at least two steps");
    let report = ProtocolReport {
        variant: config.variant(),
        mode: config.mode,
        seed: config.seed,
        path_kind: path.kind_name().to_string(),
        epsilon: config.epsilon,
        delta: config.delta,
        n_used: prepared.steps.n_steps(),
        n_from_schedule: prepared.n_from_schedule,
        frustration_free: prepared.steps.frustration_free_report(FF_TOL),
        per_step,
        overall_success_exact: overall,
        overall_success_empirical: empirical,
        success_lower_bound: (1.0 - bound_sum).max(0.0),
        target_success,
        meets_target: overall >= target_success,
        final_state_fidelity: final_projector.overlap(&final_state)?,
        final_distance_to_target: final_distance,
        conventional_time: (prepared.max_delta_norm > 0.0).then(|| 1.0 / prepared.max_delta_norm),
    };
    Ok(ProtocolRun {
        report,
        final_state,
    })
}

/// Run `config.trajectories` independent trajectories in parallel; trajectory `i` draws
/// from `trajectory_rng(seed, i)`, so the outcome does not depend on scheduling.
fn sample_trajectories<F>(config: &ProtocolConfig, trajectory: F) -> Result<EmpiricalSuccess>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<bool> + Sync,
{
    let outcomes = (0..config.trajectories as u64)
        .into_par_iter()
        .map(|i| trajectory(&mut trajectory_rng(config.seed, i)))
        .collect::<Result<Vec<bool>>>()?;
    let successes = outcomes.iter().filter(|&&ok| ok).count();
    Ok(EmpiricalSuccess::from_counts(
        successes,
        config.trajectories,
    ))
}

fn ideal_trajectory(prepared: &Prepared, rng: &mut rand_chacha::ChaCha8Rng) -> Result<bool> {
    let mut state = sampled_initial_state(prepared, rng)?;
    for projector in &prepared.projectors[1..] {
        let p = projector.overlap(&state)?;
        if rng.random::<f64>() >= p {
            return Ok(false);
        }
        state = projector.project(&state)?.0;
    }
    Ok(true)
}

fn measured_trajectory(
    prepared: &Prepared,
    schedule: &[u64],
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<bool> {
    let mut state = sampled_initial_state(prepared, rng)?;
    for (h, &k) in prepared.steps.steps()[1..].iter().zip(schedule) {
        let (next, all_accepted, _) = apply_m_trajectory_repeated(h, &state, k, rng)?;
        if !all_accepted {
            return Ok(false);
        }
        state = next;
    }
    Ok(true)
}

/// Trace distance between the run's final state and a reference state.
pub fn final_distance_to(run: &ProtocolRun, reference: &QuantumState) -> Result<f64> {
    trace_distance(&run.final_state, reference)
}
