use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zeno_aqc::instances::random_ff_instance;
use zeno_aqc::measurement::{
    apply_m_channel, apply_m_trajectory, success_probability, trajectory_rng,
};
use zeno_aqc::spectral::trace_distance;
use zeno_aqc::{CMatrix, QuantumState};

const SAMPLES: usize = 10_000;

fn fixture(seed: u64) -> (zeno_aqc::FrustrationFreeHamiltonian, QuantumState) {
    let h = random_ff_instance(2, 3, seed).unwrap().hamiltonian;
    let psi = QuantumState::random_pure(2, &mut ChaCha8Rng::seed_from_u64(seed + 500));
    (h, psi)
}

#[test]
fn success_frequency_matches_exact_probability() {
    for seed in 0..3 {
        let (h, psi) = fixture(seed);
        let p = success_probability(&h, &psi).unwrap();
        let successes = (0..SAMPLES as u64)
            .filter(|&i| {
                apply_m_trajectory(&h, &psi, &mut trajectory_rng(seed, i))
                    .unwrap()
                    .1
                    .success
            })
            .count();
        let rate = successes as f64 / SAMPLES as f64;
        let sigma = (p * (1.0 - p) / SAMPLES as f64).sqrt();
        assert!(
            (rate - p).abs() <= 3.0 * sigma,
            "seed {seed}: {rate} vs {p}"
        );
    }
}

#[test]
fn successful_trajectories_average_to_channel_output() {
    let (h, psi) = fixture(9);
    let (expected, _) = apply_m_channel(&h, &psi).unwrap();
    let dim = psi.dim();
    let mut sum = CMatrix::zeros(dim, dim);
    let mut accepted = 0usize;
    let mut i = 0u64;
    while accepted < SAMPLES {
        let (out, outcome) = apply_m_trajectory(&h, &psi, &mut trajectory_rng(77, i)).unwrap();
        i += 1;
        if outcome.success {
            sum += out.to_density_matrix().as_ref();
            accepted += 1;
        }
    }
    let average = QuantumState::density(2, sum / Complex64::new(accepted as f64, 0.0)).unwrap();
    assert!(trace_distance(&average, &expected).unwrap() <= 0.05);
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let (h, psi) = fixture(4);
    let draw = |seed, index| {
        let (state, outcome) =
            apply_m_trajectory(&h, &psi, &mut trajectory_rng(seed, index)).unwrap();
        (state, outcome)
    };
    assert_eq!(draw(5, 3), draw(5, 3));
    let distinct = (0..50).filter(|&i| draw(5, i).1 != draw(6, i).1).count();
    assert!(distinct > 0);
}
