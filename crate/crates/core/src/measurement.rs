//! Random-term measurement of a frustration-free Hamiltonian.
//!
//! Each term `H_i` defines a two-outcome POVM with Kraus operators `E_i = sqrt(I - H_i)`
//! (accept) and `F_i = sqrt(H_i)` (reject). One application of the operation picks term
//! `i` with probability `omega_i` and measures it; accepting is success. Conditioned on
//! success the state maps to
//!
//! ```text
//! rho' = sum_i omega_i E_i rho E_i / (1 - Tr(H rho))
//! ```
//!
//! and the ground-space weight grows as `Tr(P rho') = Tr(P rho) / (1 - Tr(H rho))`, because
//! every `E_i` acts as the identity on the common ground space.
//!
//! Two backends are provided: [`apply_m_channel`] evolves the success-conditioned density
//! matrix exactly, [`apply_m_trajectory`] samples a single pure-state outcome.

use std::borrow::Cow;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{embed, FrustrationFreeHamiltonian, LocalTerm, TERM_TOL};
use crate::spectral::{psd_sqrt, trace_norm_half, HermitianOperator};
use crate::state::QuantumState;
use crate::{CMatrix, CVector};

/// Probabilities below this are treated as impossible events.
const MIN_PROBABILITY: f64 = 1e-14;

/// Accept/reject Kraus pair of one term, on the term's own support.
#[derive(Debug, Clone)]
pub struct PovmPair {
    term_index: usize,
    support: Vec<usize>,
    accept: HermitianOperator,
    reject: HermitianOperator,
    projective: bool,
    embedded: OnceLock<EmbeddedPovm>,
}

/// A [`PovmPair`] lifted to the full register.
#[derive(Debug, Clone)]
pub struct EmbeddedPovm {
    pub n_qubits: usize,
    pub accept: CMatrix,
    pub reject: CMatrix,
}

impl PovmPair {
    pub fn term_index(&self) -> usize {
        self.term_index
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn accept(&self) -> &HermitianOperator {
        &self.accept
    }

    pub fn reject(&self) -> &HermitianOperator {
        &self.reject
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// Largest entry of `E^dagger E + F^dagger F - I`.
    pub fn completeness_residual(&self) -> f64 {
        let a = self.accept.entries();
        let r = self.reject.entries();
        let dim = a.nrows();
        let sum = a.adjoint() * a + r.adjoint() * r;
        crate::spectral::max_abs_diff(&sum, &CMatrix::identity(dim, dim))
    }

    /// Full-register operators, cached for the first register size requested.
    pub fn embedded(&self, n_qubits: usize) -> Result<Cow<'_, EmbeddedPovm>> {
        if let Some(cached) = self.embedded.get() {
            if cached.n_qubits == n_qubits {
                return Ok(Cow::Borrowed(cached));
            }
            return self.build_embedding(n_qubits).map(Cow::Owned);
        }
        let built = self.build_embedding(n_qubits)?;
        let _ = self.embedded.set(built);
        match self.embedded.get() {
            Some(cached) if cached.n_qubits == n_qubits => Ok(Cow::Borrowed(cached)),
            _ => self.build_embedding(n_qubits).map(Cow::Owned),
        }
    }

    fn build_embedding(&self, n_qubits: usize) -> Result<EmbeddedPovm> {
        Ok(EmbeddedPovm {
            n_qubits,
            accept: embed(self.accept.entries(), &self.support, n_qubits)?,
            reject: embed(self.reject.entries(), &self.support, n_qubits)?,
        })
    }
}

/// `E = sqrt(I - H_i)`, `F = sqrt(H_i)`. Terms whose spectrum is `{0, 1}` get the exact
/// projective pair `(I - H_i, H_i)` instead of numerically computed roots.
pub fn build_povm(term: &LocalTerm, term_index: usize) -> Result<PovmPair> {
    let op = term.operator();
    let (min, max) = (op.min_eigenvalue(), op.max_eigenvalue());
    if min < -TERM_TOL || max > 1.0 + TERM_TOL {
        return Err(Error::NotNormalizedTerm { min, max });
    }
    let dim = op.dim();
    let complement = HermitianOperator::hermitize(CMatrix::identity(dim, dim) - op.entries());
    let projective = term.is_projective();
    let (accept, reject) = if projective {
        (complement, op.clone())
    } else {
        (psd_sqrt(&complement)?, psd_sqrt(op)?)
    };
    Ok(PovmPair {
        term_index,
        support: term.support().to_vec(),
        accept,
        reject,
        projective,
        embedded: OnceLock::new(),
    })
}

impl FrustrationFreeHamiltonian {
    /// One POVM pair per term, built on first use.
    pub fn povms(&self) -> Result<&[PovmPair]> {
        if let Some(p) = self.povms.get() {
            return Ok(p);
        }
        let built = self
            .terms()
            .iter()
            .enumerate()
            .map(|(i, t)| build_povm(t, i))
            .collect::<Result<Vec<_>>>()?;
        let _ = self.povms.set(built);
        Ok(self.povms.get().expect("just set"))
    }

    fn term_sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(self.terms().iter().map(LocalTerm::weight))
            .expect("weights are positive and finite")
    }
}

fn check_dim(h: &FrustrationFreeHamiltonian, state: &QuantumState) -> Result<()> {
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: state.dim(),
        });
    }
    Ok(())
}

/// Probability `1 - Tr(H rho)` that one application of the operation accepts.
pub fn success_probability(h: &FrustrationFreeHamiltonian, rho: &QuantumState) -> Result<f64> {
    check_dim(h, rho)?;
    let energy = rho.expectation(h.assemble_full().entries())?;
    Ok((1.0 - energy).clamp(0.0, 1.0))
}

/// The same probability evaluated as `sum_i omega_i Tr(E_i rho E_i^dagger)`.
pub fn success_probability_termwise(
    h: &FrustrationFreeHamiltonian,
    rho: &QuantumState,
) -> Result<f64> {
    check_dim(h, rho)?;
    let mut total = 0.0;
    for (term, povm) in h.terms().iter().zip(h.povms()?) {
        let e = povm.embedded(h.n_qubits())?;
        let accept_sq = e.accept.adjoint() * &e.accept;
        total += term.weight() * rho.expectation(&accept_sq)?;
    }
    Ok(total)
}

/// Success-conditioned output `sum_i omega_i E_i rho E_i / p` and the success probability `p`.
pub fn apply_m_channel(
    h: &FrustrationFreeHamiltonian,
    rho: &QuantumState,
) -> Result<(QuantumState, f64)> {
    check_dim(h, rho)?;
    let p = success_probability(h, rho)?;
    if p < MIN_PROBABILITY {
        return Err(Error::ZeroSuccessProbability);
    }
    let dense = rho.to_density_matrix();
    let dim = h.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for (term, povm) in h.terms().iter().zip(h.povms()?) {
        let e = povm.embedded(h.n_qubits())?;
        acc +=
            (&e.accept * dense.as_ref() * e.accept.adjoint()) * Complex64::new(term.weight(), 0.0);
    }
    let trace = acc.trace().re;
    if trace < MIN_PROBABILITY {
        return Err(Error::ZeroSuccessProbability);
    }
    let out = QuantumState::density_trusted(h.n_qubits(), acc / Complex64::new(trace, 0.0));
    Ok((out, p))
}

/// Result of a single sampled application.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub success: bool,
    pub term_index: usize,
    /// `||E_i psi||^2` for the sampled term, before the outcome was drawn.
    pub pre_success_probability: f64,
}

/// Sample one application on a pure state.
///
/// On acceptance the state becomes `E_i psi / ||E_i psi||`; on rejection
/// `F_i psi / ||F_i psi||` and the outcome is marked as a failure.
pub fn apply_m_trajectory<R: Rng + ?Sized>(
    h: &FrustrationFreeHamiltonian,
    psi: &QuantumState,
    rng: &mut R,
) -> Result<(QuantumState, MeasurementOutcome)> {
    check_dim(h, psi)?;
    let vector = psi
        .as_pure()
        .ok_or_else(|| Error::InvalidState("trajectory sampling needs a pure state".into()))?;
    let term_index = h.term_sampler().sample(rng);
    let povm = &h.povms()?[term_index];
    let e = povm.embedded(h.n_qubits())?;
    let accepted: CVector = &e.accept * vector;
    let p_accept = accepted.norm_squared().clamp(0.0, 1.0);
    let success = rng.random::<f64>() < p_accept;
    let next = if success {
        accepted
    } else {
        &e.reject * vector
    };
    let state = QuantumState::pure_normalized(h.n_qubits(), next)?;
    Ok((
        state,
        MeasurementOutcome {
            success,
            term_index,
            pre_success_probability: p_accept,
        },
    ))
}

/// Apply the sampled operation up to `k` times, stopping at the first rejection.
///
/// Returns the final state, whether all applications accepted, and how many were made.
pub fn apply_m_trajectory_repeated<R: Rng + ?Sized>(
    h: &FrustrationFreeHamiltonian,
    psi: &QuantumState,
    k: u64,
    rng: &mut R,
) -> Result<(QuantumState, bool, u64)> {
    let mut state = psi.clone();
    for applied in 1..=k {
        let (next, outcome) = apply_m_trajectory(h, &state, rng)?;
        state = next;
        if !outcome.success {
            return Ok((state, false, applied));
        }
    }
    Ok((state, true, k))
}

/// Independent, reproducible random stream for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// How many times to apply the operation before handing the state on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum RepetitionPolicy {
    Fixed {
        k: u64,
    },
    /// Start at `k = ceil(alpha / gap)` and keep going until the trace distance to the
    /// normalized ground-space projection of the input is at most `target_distance`.
    Adaptive {
        alpha: f64,
        target_distance: f64,
        k_max: u64,
    },
}

impl RepetitionPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RepetitionPolicy::Fixed { k } if k >= 1 => Ok(()),
            RepetitionPolicy::Fixed { .. } => Err(Error::InvalidParameter(
                "fixed repetition needs k >= 1".into(),
            )),
            RepetitionPolicy::Adaptive {
                alpha,
                target_distance,
                k_max,
            } => {
                if !(alpha > 0.0 && target_distance > 0.0 && k_max >= 1) {
                    return Err(Error::InvalidParameter(format!(
                        "adaptive repetition needs alpha > 0, target_distance > 0, k_max >= 1 \
                         (got {alpha}, {target_distance}, {k_max})"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// `k = ceil(alpha / gap)`, which guarantees `(1 - gap)^k <= e^-alpha`.
pub fn repetitions_for(alpha: f64, gap: f64) -> u64 {
    ((alpha / gap).ceil() as u64).max(1)
}

/// Lower bound on the ground-space weight after `k` successful applications:
/// `1 / (1 + (1 - gap)^k (1 / overlap - 1))`.
pub fn overlap_lower_bound(gap: f64, initial_overlap: f64, k: u64) -> f64 {
    let ratio = 1.0 / initial_overlap - 1.0;
    1.0 / (1.0 + (1.0 - gap).powf(k as f64) * ratio)
}

/// Excited-to-ground weight ratio `1 / overlap - 1`.
pub fn overlap_ratio(overlap: f64) -> f64 {
    1.0 / overlap - 1.0
}

#[derive(Debug, Clone)]
pub struct RepeatedMeasurement {
    pub state: QuantumState,
    pub k_used: u64,
    /// Probability that every application succeeded (product of per-application values).
    pub cumulative_success: f64,
    /// `Tr(P rho^(l))` for `l = 0..=k_used`; entry 0 is the input.
    pub overlap_trace: Vec<f64>,
    /// Trace distance from the output to the normalized ground-space projection of the input.
    pub distance_to_target: f64,
}

/// Apply the success-conditioned channel repeatedly according to `policy`.
pub fn apply_m_repeated(
    h: &FrustrationFreeHamiltonian,
    rho: &QuantumState,
    policy: &RepetitionPolicy,
) -> Result<RepeatedMeasurement> {
    check_dim(h, rho)?;
    policy.validate()?;
    let projector = h.ground_projector();
    let initial_overlap = projector.overlap(rho)?;
    if initial_overlap <= MIN_PROBABILITY {
        return Err(Error::ZeroGroundOverlap);
    }
    let (target, _) = projector.project(rho)?;
    let target = target.into_density();
    let target_matrix = target.to_density_matrix().into_owned();

    let mut state = rho.clone().into_density();
    let mut cumulative_success = 1.0;
    let mut overlap_trace = vec![initial_overlap];
    let mut step = |state: &mut QuantumState| -> Result<()> {
        let (next, p) = apply_m_channel(h, state)?;
        cumulative_success *= p;
        overlap_trace.push(projector.overlap(&next)?);
        *state = next;
        Ok(())
    };
    let distance = |state: &QuantumState| {
        trace_norm_half(&(state.to_density_matrix().as_ref() - &target_matrix))
    };

    let k_used = match *policy {
        RepetitionPolicy::Fixed { k } => {
            for _ in 0..k {
                step(&mut state)?;
            }
            k
        }
        RepetitionPolicy::Adaptive {
            alpha,
            target_distance,
            k_max,
        } => {
            let gap = h.gap()?;
            let initial_k = repetitions_for(alpha, gap).min(k_max);
            for _ in 0..initial_k {
                step(&mut state)?;
            }
            let mut k = initial_k;
            loop {
                let d = distance(&state);
                if d <= target_distance {
                    break;
                }
                if k >= k_max {
                    return Err(Error::KMaxExceeded {
                        k_max,
                        distance: d,
                        target: target_distance,
                    });
                }
                step(&mut state)?;
                k += 1;
            }
            k
        }
    };
    let distance_to_target = distance(&state);
    Ok(RepeatedMeasurement {
        state,
        k_used,
        cumulative_success,
        overlap_trace,
        distance_to_target,
    })
}
