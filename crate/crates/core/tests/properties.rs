use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zeno_aqc::hamiltonian::normalize_term;
use zeno_aqc::instances::random::random_ff_shared_path;
use zeno_aqc::instances::{random_ff_instance, rotating_projector_path};
use zeno_aqc::measurement::{
    apply_m_channel, apply_m_repeated, overlap_lower_bound, success_probability,
    success_probability_termwise, RepetitionPolicy,
};
use zeno_aqc::protocol::{run_ideal, run_measured, ProtocolConfig};
use zeno_aqc::schedule::{analyze_schedule, required_steps, DEFAULT_PROBE_STEPS};
use zeno_aqc::spectral::trace_distance;
use zeno_aqc::DEFAULT_DEGENERACY_TOL as TOL;
use zeno_aqc::{CMatrix, FrustrationFreeHamiltonian, HermitianOperator, QuantumState};

fn instance(n: usize, m: usize, seed: u64) -> (FrustrationFreeHamiltonian, QuantumState) {
    let h = random_ff_instance(n, m, seed).unwrap().hamiltonian;
    let rho = QuantumState::random_mixed(n, &mut ChaCha8Rng::seed_from_u64(seed ^ 0xfeed));
    (h, rho)
}

fn hermitian(dim: usize) -> impl Strategy<Value = HermitianOperator> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |xs| {
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            num_complex::Complex64::new(xs[2 * (i * dim + j)], xs[2 * (i * dim + j) + 1])
        });
        HermitianOperator::new((&m + m.adjoint()) * num_complex::Complex64::new(0.5, 0.0)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_terms_span_unit_interval(op in hermitian(4)) {
        let t = normalize_term(&op);
        prop_assert!(t.min_eigenvalue().abs() <= 1e-12);
        prop_assert!(t.max_eigenvalue() <= 1.0 + 1e-12);
    }

    #[test]
    fn assembly_is_linear_in_weights(seed in 0u64..1000, a in 0.1f64..0.9) {
        let (h, _) = instance(3, 3, seed);
        let parts: Vec<_> = h.terms().iter().map(|t| (t.support().to_vec(), t.operator().clone())).collect();
        let w1 = [1.0, 2.0, 3.0];
        let w2 = [3.0, 1.0, 1.0];
        let mix: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x / 6.0 + (1.0 - a) * y / 5.0).collect();
        let h1 = FrustrationFreeHamiltonian::with_weights(3, parts.clone(), &w1).unwrap();
        let h2 = FrustrationFreeHamiltonian::with_weights(3, parts.clone(), &w2).unwrap();
        let hm = FrustrationFreeHamiltonian::with_weights(3, parts, &mix).unwrap();
        let combined = h1.assemble_full().entries() * num_complex::Complex64::new(a, 0.0)
            + h2.assemble_full().entries() * num_complex::Complex64::new(1.0 - a, 0.0);
        prop_assert!(hm.assemble_full().max_abs_diff(&combined) <= 1e-12);
    }

    #[test]
    fn overlap_update_is_exact(seed in 0u64..10_000, n in 1usize..=3, m in 1usize..=5) {
        let (h, rho) = instance(n, m, seed);
        let p = h.ground_projector();
        let energy = rho.expectation(h.assemble_full().entries()).unwrap();
        let (out, success) = apply_m_channel(&h, &rho).unwrap();
        let expected = p.overlap(&rho).unwrap() / (1.0 - energy);
        prop_assert!((p.overlap(&out).unwrap() - expected).abs() <= 1e-9);
        prop_assert!((success - success_probability_termwise(&h, &rho).unwrap()).abs() <= 1e-10);
        prop_assert!((out.to_density_matrix().trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn povm_pairs_are_complete(seed in 0u64..10_000, n in 1usize..=3, m in 1usize..=5) {
        let (h, _) = instance(n, m, seed);
        for pair in h.povms().unwrap() {
            prop_assert!(pair.completeness_residual() <= 1e-9);
        }
    }

    #[test]
    fn repeated_application_beats_bound(seed in 0u64..10_000, k in 1u64..40) {
        let (h, rho) = instance(2, 3, seed);
        let p = h.ground_projector();
        let initial = p.overlap(&rho).unwrap();
        let out = apply_m_repeated(&h, &rho, &RepetitionPolicy::Fixed { k }).unwrap();
        let bound = overlap_lower_bound(h.gap().unwrap(), initial, k);
        prop_assert!(p.overlap(&out.state).unwrap() >= bound - 1e-9);
        prop_assert!(out.cumulative_success >= initial - 1e-9);
        let (target, _) = p.project(&rho).unwrap();
        let (projected, _) = p.project(&out.state).unwrap();
        prop_assert!(trace_distance(&target, &projected).unwrap() <= 1e-9);
    }

    #[test]
    fn required_steps_is_certified(angle in 0.1f64..std::f64::consts::FRAC_PI_2, eps in 0.01f64..0.5) {
        let path = rotating_projector_path(angle).unwrap().path;
        let n = required_steps(&path, eps, DEFAULT_PROBE_STEPS, TOL).unwrap();
        prop_assert!(analyze_schedule(&path, n, TOL).unwrap().epsilon_bound <= eps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ideal_runs_respect_step_bounds(seed in 0u64..10_000, n in 1usize..=3, steps in 2usize..12) {
        let checked = random_ff_shared_path(n, 3, seed).unwrap();
        prop_assume!(checked.report.passed);
        let config = ProtocolConfig { steps: Some(steps), ..ProtocolConfig::default() };
        let report = run_ideal(&checked.path, &config).unwrap().report;
        for s in &report.per_step {
            prop_assert!(s.epsilon_n <= s.bound_epsilon_n + 1e-9, "{s:?}");
        }
        prop_assert!(report.overall_success_exact >= report.success_lower_bound - 1e-9);
        let product: f64 = report.per_step.iter().map(|s| s.p_n).product();
        prop_assert!((product - report.overall_success_exact).abs() <= 1e-10);
    }

    #[test]
    fn measured_runs_meet_their_budget(seed in 0u64..10_000, angle in 0.3f64..1.5) {
        let path = rotating_projector_path(angle).unwrap().path;
        let config = ProtocolConfig { epsilon: 0.1, delta: 0.05, seed, ..ProtocolConfig::default() };
        let report = run_measured(&path, &config).unwrap().report;
        let budget = 0.05 / (2.0 * report.n_used as f64);
        prop_assert!(report.per_step.iter().all(|s| s.distance_to_ground <= budget + 1e-9));
        prop_assert!(report.overall_success_exact >= 1.0 - 0.15 - 1e-6);
    }

    #[test]
    fn measured_runs_on_soft_terms(seed in 0u64..10_000, n in 1usize..=2) {
        let checked = random_ff_shared_path(n, 2, seed).unwrap();
        let config = ProtocolConfig {
            epsilon: 0.2,
            delta: 0.1,
            steps: Some(6),
            ..ProtocolConfig::default()
        };
        let run = run_measured(&checked.path, &config).unwrap();
        let budget = 0.1 / 12.0;
        prop_assert!(run.report.per_step.iter().all(|s| s.distance_to_ground <= budget + 1e-9));
        prop_assert!(run.report.final_distance_to_target <= budget + 1e-9);
        prop_assert!(success_probability(checked.path.target(), &run.final_state).unwrap() > 0.0);
    }
}
