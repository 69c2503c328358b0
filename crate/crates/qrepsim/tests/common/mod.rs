//! Self-contained reference implementations used by the integration
//! tests: dense-matrix circuit mechanics and a Runge–Kutta
//! master-equation integrator, written directly against nalgebra so
//! they share no code with the channel/pipeline machinery under test.
//!
//! Conventions match the library: qubit 0 is the leftmost (most
//! significant) tensor factor, kets are column vectors, and the
//! master equation is ρ̇ = −i[H,ρ] + Σ_j (γ/2)(L_j ρ L_j − ρ) for
//! Hermitian involutive jump operators `L_j`.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(dim: usize) -> M {
    M::identity(dim, dim)
}

pub fn kron2(a: &M, b: &M) -> M {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = M::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn sigma_x() -> M {
    M::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> M {
    M::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> M {
    M::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// `exp(−i θ σ/2)` for a Hermitian involutive `σ`:
/// `cos(θ/2)·I − i·sin(θ/2)·σ`.
pub fn axis_rotation(sigma: &M, theta: f64) -> M {
    let dim = sigma.nrows();
    eye(dim).map(|z| z * c((theta / 2.0).cos(), 0.0))
        + sigma.map(|z| z * c(0.0, -(theta / 2.0).sin()))
}

/// Embeds a single-qubit operator at `qubit` (0 = leftmost factor) in
/// an `n`-qubit register.
pub fn embed1(op: &M, qubit: usize, n: usize) -> M {
    let mut out = eye(1);
    for q in 0..n {
        let factor = if q == qubit { op.clone() } else { eye(2) };
        out = kron2(&out, &factor);
    }
    out
}

/// CNOT with the given control and target qubits in an `n`-qubit
/// register: `|0⟩⟨0|_c ⊗ I + |1⟩⟨1|_c ⊗ X_t`.
pub fn cnot(control: usize, target: usize, n: usize) -> M {
    let p0 = M::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let p1 = M::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    embed1(&p0, control, n) + embed1(&p1, control, n) * embed1(&sigma_x(), target, n)
}

/// The four Bell kets as columns of length 4, indexed Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
pub fn bell_ket(k: usize) -> M {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rows: [[f64; 4]; 4] = [
        [s, 0.0, 0.0, s],
        [s, 0.0, 0.0, -s],
        [0.0, s, s, 0.0],
        [0.0, s, -s, 0.0],
    ];
    M::from_fn(4, 1, |i, _| c(rows[k][i], 0.0))
}

pub fn projector(ket: &M) -> M {
    ket * ket.adjoint()
}

/// `U ρ U†`.
pub fn conj_apply(u: &M, rho: &M) -> M {
    u * rho * u.adjoint()
}

fn bit_of(index: usize, qubit: usize, n: usize) -> usize {
    (index >> (n - 1 - qubit)) & 1
}

/// Partial trace keeping the (ascending) qubits in `keep`, preserving
/// their relative order.
pub fn ptrace(rho: &M, n: usize, keep: &[usize]) -> M {
    let dim = 1usize << n;
    assert_eq!(rho.nrows(), dim);
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let compact = |i: usize| -> usize {
        keep.iter()
            .enumerate()
            .map(|(t, &q)| bit_of(i, q, n) << (k - 1 - t))
            .sum()
    };
    let mut out = M::zeros(1 << k, 1 << k);
    for i in 0..dim {
        for j in 0..dim {
            if traced.iter().all(|&q| bit_of(i, q, n) == bit_of(j, q, n)) {
                out[(compact(i), compact(j))] += rho[(i, j)];
            }
        }
    }
    out
}

pub fn trace_re(m: &M) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

pub fn max_abs_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// ⟨Φ⁺| ρ |Φ⁺⟩ for a two-qubit ρ.
pub fn phi_plus_fidelity(rho: &M) -> f64 {
    let phi = bell_ket(0);
    (phi.adjoint() * rho * &phi)[(0, 0)].re
}

/// Right-hand side of the dephasing master equation:
/// `−i[H,ρ] + Σ_j (γ/2)(L_j ρ L_j − ρ)`.
fn lindblad_rhs(h: &M, jumps: &[M], gamma: f64, rho: &M) -> M {
    let mut out = (h * rho - rho * h).map(|z| z * c(0.0, -1.0));
    for l in jumps {
        out += (l * rho * l - rho).map(|z| z * c(gamma / 2.0, 0.0));
    }
    out
}

/// Classical fixed-step fourth-order Runge–Kutta integration of the
/// master equation from `rho0` over time `t`.
pub fn rk4_master_equation(
    h: &M,
    jumps: &[M],
    gamma: f64,
    rho0: &M,
    t: f64,
    steps: usize,
) -> M {
    let dt = t / steps as f64;
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(h, jumps, gamma, &rho);
        let k2 = lindblad_rhs(h, jumps, gamma, &(&rho + k1.map(|z| z * c(dt / 2.0, 0.0))));
        let k3 = lindblad_rhs(h, jumps, gamma, &(&rho + k2.map(|z| z * c(dt / 2.0, 0.0))));
        let k4 = lindblad_rhs(h, jumps, gamma, &(&rho + k3.map(|z| z * c(dt, 0.0))));
        rho += (k1 + k2.map(|z| z * c(2.0, 0.0)) + k3.map(|z| z * c(2.0, 0.0)) + k4)
            .map(|z| z * c(dt / 6.0, 0.0));
    }
    rho
}

// ---------------------------------------------------------------------------
// Randomized channel-algebra suite (shared by the property tests and
// the acceptance run).
// ---------------------------------------------------------------------------

use qrepsim::channel::{compose, Channel, KrausSet};
use qrepsim::linalg::{self, CMat};
use qrepsim::noise::{dephase, noisy_rotation, NoiseParams, PauliAxis};
use qrepsim::states::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller from two open-interval uniforms.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        num_complex::Complex64::new(gaussian(rng), gaussian(rng))
    })
}

/// A Haar-ish random CPTP channel: `k` Ginibre blocks right-normalized
/// by the inverse square root of their completeness sum.
pub fn random_cptp(dim: usize, k: usize, rng: &mut ChaCha8Rng) -> KrausSet {
    let blocks: Vec<CMat> = (0..k).map(|_| ginibre(dim, dim, rng)).collect();
    let mut s = CMat::zeros(dim, dim);
    for b in &blocks {
        s += b.adjoint() * b;
    }
    let (vals, vecs) = linalg::hermitian_eigen(&s);
    let inv_sqrt = &vecs
        * CMat::from_fn(dim, dim, |i, j| {
            if i == j {
                num_complex::Complex64::new(1.0 / vals[i].sqrt(), 0.0)
            } else {
                num_complex::Complex64::new(0.0, 0.0)
            }
        })
        * vecs.adjoint();
    KrausSet::new(blocks.into_iter().map(|b| b * &inv_sqrt).collect()).unwrap()
}

/// A random full-rank density matrix, `GG†` normalized.
pub fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    DensityMatrix::new(m.map(|z| z / num_complex::Complex64::new(tr, 0.0))).unwrap()
}

/// Runs `cases` randomized channel-algebra checks, all at tolerance
/// 1e-10: complete positivity via the Choi spectrum, trace
/// preservation, Kraus↔superoperator round-trips, composition against
/// sequential application, the dephasing semigroup law, and
/// z-rotation/dephasing commutation. Panics on the first violation.
pub fn run_channel_algebra_suite(cases: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let dim = if case % 2 == 0 { 2 } else { 4 };
        let k = 1 + case % 4;

        let kraus = random_cptp(dim, k, &mut rng);
        assert!(
            kraus.completeness_deviation() <= 1e-10,
            "case {case}: completeness deviation {:.3e}",
            kraus.completeness_deviation()
        );
        let ch = Channel::from_kraus(&kraus);
        assert!(ch.is_trace_preserving(), "case {case}: not TP");
        assert!(ch.tp_deviation() <= 1e-10, "case {case}");

        // Complete positivity, checked on the Choi spectrum directly.
        ch.validate_cp()
            .unwrap_or_else(|e| panic!("case {case}: CP validation failed: {e}"));
        let (choi_vals, _) = linalg::hermitian_eigen(&ch.choi());
        let min_eig = choi_vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-10, "case {case}: Choi eigenvalue {min_eig:.3e}");

        // Kraus ↔ superoperator round-trip.
        let back = Channel::from_kraus(&ch.to_kraus().unwrap());
        assert!(
            linalg::max_abs_diff(ch.superop(), back.superop()) <= 1e-10,
            "case {case}: round-trip mismatch"
        );

        // Composition = sequential application.
        let second = Channel::from_kraus(&random_cptp(dim, 1 + (case + 1) % 3, &mut rng));
        let composed = compose(&second, &ch).unwrap();
        let rho = random_density(dim, &mut rng);
        let sequential = second.apply(&ch.apply(&rho).unwrap()).unwrap();
        let direct = composed.apply(&rho).unwrap();
        assert!(
            linalg::max_abs_diff(direct.matrix(), sequential.matrix()) <= 1e-10,
            "case {case}: composition mismatch"
        );

        // Dephasing semigroup: E(t₁)∘E(t₂) = E(t₁+t₂).
        let gamma = rng.gen_range(0.0..50.0);
        let (t1, t2) = (rng.gen_range(0.0..0.1), rng.gen_range(0.0..0.1));
        let split = compose(&dephase(gamma, t1).unwrap(), &dephase(gamma, t2).unwrap()).unwrap();
        let whole = dephase(gamma, t1 + t2).unwrap();
        assert!(
            linalg::max_abs_diff(split.superop(), whole.superop()) <= 1e-10,
            "case {case}: semigroup violation"
        );

        // z rotations commute with dephasing.
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let params = NoiseParams {
            gamma,
            ..NoiseParams::default()
        };
        let (rz, t_rz) = noisy_rotation(PauliAxis::Z, theta, &params).unwrap();
        let deph = dephase(gamma, t_rz.max(1e-9)).unwrap();
        let ab = compose(&rz, &deph).unwrap();
        let ba = compose(&deph, &rz).unwrap();
        assert!(
            linalg::max_abs_diff(ab.superop(), ba.superop()) <= 1e-10,
            "case {case}: commutation violation"
        );
    }
}

/// Single-qubit reference density matrices spanning the Hermitian
/// operator space: |0⟩, |1⟩, |+⟩, |+i⟩.
pub fn spanning_qubit_states() -> Vec<M> {
    let kets: Vec<M> = vec![
        M::from_fn(2, 1, |i, _| c(if i == 0 { 1.0 } else { 0.0 }, 0.0)),
        M::from_fn(2, 1, |i, _| c(if i == 1 { 1.0 } else { 0.0 }, 0.0)),
        M::from_fn(2, 1, |_, _| c(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
        M::from_fn(2, 1, |i, _| {
            if i == 0 {
                c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
            } else {
                c(0.0, std::f64::consts::FRAC_1_SQRT_2)
            }
        }),
    ];
    kets.iter().map(projector).collect()
}
