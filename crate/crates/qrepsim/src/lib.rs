//! Density-matrix simulation of noisy quantum circuits and nested
//! entanglement-repeater protocols.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, Hermitian
//!   eigendecomposition, matrix exponentials, qubit permutations.
//! - [`states`]: density matrices, Bell states, Werner and binary pair
//!   families, fidelity and partial trace.
//! - [`channel`]: completely positive maps as superoperators, Kraus and
//!   Choi conversions, composition, tensor products, embedding into
//!   registers, text serialization.
//! - [`pipeline`]: compiling a sequence of gates on a register, with
//!   measurement post-selection, into a single channel on the surviving
//!   qubits via process tomography.
//! - [`noise`]: continuous-time dephasing, finite-speed rotations and
//!   Ising-type two-qubit gates for single atoms, and imperfect
//!   single-atom measurements.
//! - [`dfs`]: gates and measurements on decoherence-protected qubit
//!   pairs driven through an auxiliary atom.
//! - [`blocks`]: the protocol building blocks (entanglement transfer,
//!   entanglement swapping, purification) as channels with durations
//!   and success probabilities.
//! - [`protocol`]: the nested repeater recursion (distances, timings,
//!   fidelity per nesting level).
//! - [`config`] and [`run`]: the key/value run-description format, the
//!   sweep driver, and CSV output.

pub mod blocks;
pub mod channel;
pub mod config;
pub mod dfs;
pub mod error;
pub mod linalg;
pub mod noise;
pub mod pipeline;
pub mod protocol;
pub mod run;
pub mod states;

pub use error::Error;

/// Convenient crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Numerical tolerance used by validity checks (trace preservation,
/// complete positivity, Hermiticity, unit trace).
///
/// Defaults to `1e-10`; override with the `QREPSIM_TOL` environment
/// variable (read once per process).
pub fn tolerance() -> f64 {
    use std::sync::OnceLock;
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("QREPSIM_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|t| *t > 0.0)
            .unwrap_or(1e-10)
    })
}
