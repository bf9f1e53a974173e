//! Shared fixtures for the benchmarks.

use gaussnet_core::network::{apply_protocol, build_initial_state, NetworkSpec};
use gaussnet_core::state::random_state;
use gaussnet_core::symplectic::random_symplectic;
use gaussnet_core::{GaussianState, SymplecticMatrix};

/// The nine-mode chain resultant of three tritter sources.
pub fn chain_resultant(gamma: f64) -> GaussianState {
    let spec = NetworkSpec::chain_example(gamma);
    let initial = build_initial_state(&spec).expect("chain sources are valid");
    apply_protocol(&initial, &spec).expect("chain protocol runs").state
}

/// Seeded random mixed states on `n` modes.
pub fn random_states(n: usize, count: u64) -> Vec<GaussianState> {
    (0..count).map(|seed| random_state(n, seed).expect("random states are valid")).collect()
}

/// Seeded random two-mode symplectic matrices.
pub fn random_two_mode(count: u64) -> Vec<SymplecticMatrix> {
    (0..count).map(|seed| random_symplectic(2, seed)).collect()
}
