//! Property tests for the channel algebra: randomized CPTP maps,
//! pipeline compression against direct full-register evolution, and
//! angle-wrapping invariants.

mod common;

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use qrepsim::channel::{compose, Channel};
use qrepsim::linalg::{self, CMat};
use qrepsim::noise::{dephase, noisy_rotation, povm_measure, NoiseParams, PauliAxis};
use qrepsim::pipeline::Pipeline;
use qrepsim::states::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn randomized_channel_algebra_holds_to_1e10() {
    common::run_channel_algebra_suite(120, 0x5eed);
}

/// A random unitary, obtained by exponentiating a random
/// anti-Hermitian generator (machine-precision unitary).
fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = common::ginibre(dim, dim, rng);
    let h = (&g + g.adjoint()).map(|z| z * Complex64::new(0.35, 0.0));
    linalg::expm(&h.map(|z| z * Complex64::new(0.0, -1.0)))
}

fn random_circuit(n: usize, gates: usize, rng: &mut ChaCha8Rng) -> Pipeline {
    let mut pipe = Pipeline::new(n);
    for g in 0..gates {
        match g % 4 {
            // Random single-qubit unitary.
            0 => {
                let u = Channel::from_unitary(&random_unitary(2, rng)).unwrap();
                let q = rng.gen_range(0..n);
                pipe.push(&u, &[q]).unwrap();
            }
            // Random two-qubit unitary on a random ordered pair.
            1 => {
                let u = Channel::from_unitary(&random_unitary(4, rng)).unwrap();
                let a = rng.gen_range(0..n);
                let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
                pipe.push(&u, &[a, b]).unwrap();
            }
            // Dephasing idle.
            2 => {
                let d = dephase(rng.gen_range(0.0..30.0), rng.gen_range(0.0..0.05)).unwrap();
                let q = rng.gen_range(0..n);
                pipe.push(&d, &[q]).unwrap();
            }
            // A post-selected measurement branch (trace-decreasing).
            _ => {
                let m = povm_measure(rng.gen_range(0.5..1.0), 0).unwrap();
                let q = rng.gen_range(0..n);
                pipe.push(&m, &[q]).unwrap();
            }
        }
    }
    pipe
}

#[test]
fn compression_matches_direct_full_register_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    // Three-qubit circuits: compress [0] → [2] against the direct
    // register simulation, and [0, 1] → [0, 1] likewise.
    for round in 0..4 {
        let pipe = random_circuit(3, 6, &mut rng);
        let reference = common::random_density(4, &mut rng); // qubits 1, 2
        let rho_in = common::random_density(2, &mut rng);

        let (ch, _) = pipe.compress(&[0], &[2], &reference).unwrap();
        let compressed = ch.apply(&rho_in).unwrap();

        let full = rho_in.tensor(&reference);
        let direct = pipe.apply(&full).unwrap().partial_trace(&[2]).unwrap();
        let diff = linalg::max_abs_diff(compressed.matrix(), direct.matrix());
        assert!(diff <= 1e-10, "round {round}: 3-qubit mismatch {diff:.3e}");
    }

    // Five-qubit circuit: compress [0, 1] → [3, 4].
    let pipe = random_circuit(5, 7, &mut rng);
    let reference = common::random_density(8, &mut rng); // qubits 2, 3, 4
    let rho_in = common::random_density(4, &mut rng);

    let (ch, _) = pipe.compress(&[0, 1], &[3, 4], &reference).unwrap();
    let compressed = ch.apply(&rho_in).unwrap();

    let full = rho_in.tensor(&reference);
    let direct = pipe.apply(&full).unwrap().partial_trace(&[3, 4]).unwrap();
    let diff = linalg::max_abs_diff(compressed.matrix(), direct.matrix());
    assert!(diff <= 1e-10, "5-qubit mismatch {diff:.3e}");
}

#[test]
fn compression_probability_is_one_for_trace_preserving_pipelines() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut pipe = Pipeline::new(3);
    for _ in 0..3 {
        let u = Channel::from_unitary(&random_unitary(4, &mut rng)).unwrap();
        pipe.push(&u, &[rng.gen_range(0..3), 2]).unwrap();
        // keep targets distinct
        pipe.push(&dephase(12.0, 0.01).unwrap(), &[0]).unwrap();
    }
    let reference = common::random_density(4, &mut rng);
    let (_, prob) = pipe.compress(&[0], &[0], &reference).unwrap();
    assert_relative_eq!(prob, 1.0, epsilon = 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Rotation angles wrap modulo 2π into the same physical channel.
    #[test]
    fn rotation_angles_wrap_modulo_two_pi(theta in -10.0f64..10.0, wraps in 1u32..3) {
        let params = NoiseParams::default();
        let (a, ta) = noisy_rotation(PauliAxis::X, theta, &params).unwrap();
        let shifted = theta + wraps as f64 * std::f64::consts::TAU;
        let (b, tb) = noisy_rotation(PauliAxis::X, shifted, &params).unwrap();
        prop_assert!(linalg::max_abs_diff(a.superop(), b.superop()) < 1e-9);
        prop_assert!((ta - tb).abs() < 1e-15);
    }

    /// The two reported-outcome branches of a measurement always sum
    /// to a deterministic (trace-preserving) channel.
    #[test]
    fn measurement_branches_sum_to_unit_probability(eta in 0.0f64..=1.0, seed in 0u64..1000) {
        let b0 = povm_measure(eta, 0).unwrap();
        let b1 = povm_measure(eta, 1).unwrap();
        let sum = b0.try_add(&b1).unwrap();
        prop_assert!(sum.tp_deviation() <= 1e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = common::random_density(2, &mut rng);
        let p0 = b0.apply(&rho).unwrap().trace();
        let p1 = b1.apply(&rho).unwrap().trace();
        prop_assert!((p0 + p1 - 1.0).abs() <= 1e-10);
    }

    /// Composing a channel with the identity changes nothing.
    #[test]
    fn identity_is_neutral_for_composition(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = Channel::from_kraus(&common::random_cptp(4, 3, &mut rng));
        let id = Channel::identity(4);
        let left = compose(&id, &ch).unwrap();
        let right = compose(&ch, &id).unwrap();
        prop_assert!(linalg::max_abs_diff(left.superop(), ch.superop()) <= 1e-12);
        prop_assert!(linalg::max_abs_diff(right.superop(), ch.superop()) <= 1e-12);
    }
}

#[test]
fn serialized_channels_round_trip_through_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [2, 4] {
        let ch = Channel::from_kraus(&common::random_cptp(dim, 2, &mut rng));
        let text = ch.to_text();
        let back = Channel::from_text(&text).unwrap();
        assert!(linalg::max_abs_diff(ch.superop(), back.superop()) <= 1e-12);
        assert_eq!(back.dim(), dim);
    }
}

#[test]
fn constant_channels_erase_their_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let target = common::random_density(4, &mut rng);
    let ch = Channel::constant(&target);
    let a = ch.apply(&common::random_density(4, &mut rng)).unwrap();
    let b = ch.apply(&DensityMatrix::maximally_mixed(2)).unwrap();
    assert!(linalg::max_abs_diff(a.matrix(), b.matrix()) <= 1e-12);
    assert!(linalg::max_abs_diff(a.matrix(), target.matrix()) <= 1e-12);
}
