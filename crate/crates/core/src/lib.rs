//! Mixing coefficients, geometric-ergodicity constants, and concentration
//! bounds for finite Markov and hidden Markov chains.
//!
//! The crate is organized around four layers:
//!
//! - [`chain`]: distributions, column-stochastic kernels, HMM specs,
//!   total variation, exact joint laws, and seeded trajectory sampling.
//! - [`mixing`]: Döblin contraction coefficients, inverse mixing times
//!   `τ_s`, fitted `(G, θ)` geometric-ergodicity constants, brute-force
//!   η̄-mixing coefficients, and the Δ matrix with its operator norms.
//! - [`bounds`]: the closed-form concentration, DKW-type, and uniform
//!   Chernoff inequalities driven by `(G, θ)`.
//! - [`empirics`]: Monte Carlo deviation and expectation experiments, the
//!   Hamming-Lipschitz audit, and the exact lemma suite that verifies
//!   every inequality on tiny instances by exhaustive enumeration.
//!
//! All types are immutable after construction; sampling is pure given
//! `(spec, n, seed)` and per-trial streams are derived so experiment
//! results do not depend on worker count.

pub mod bounds;
pub mod chain;
pub mod empirics;
pub mod error;
pub mod mixing;
pub mod report;
pub mod rng;
pub mod spec_file;

pub use chain::{
    check_ergodic, emit_law, exact_joint_law, sample_trajectory, stationary_distribution,
    step_law, tv_distance, ChainSpec, JointLaw, StochasticMatrix, StochasticVector, Trajectory,
};
pub use error::{Error, Result};
pub use mixing::{
    contraction_coefficient, delta_2_norm, delta_inf_norm, delta_matrix, eta_bar_exact,
    fit_ergodicity, inverse_mixing_time, verify_contraction, DeltaMatrix, ErgodicityConstants,
};
