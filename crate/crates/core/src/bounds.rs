//! Closed-form inequalities: the master η-mixing bound, concentration for
//! geometrically ergodic HMMs, the DKW-type bound, the uniform Chernoff
//! bound with its Λₙ threshold, and nonstationarity corrections.
//!
//! Throughout, ε is the per-coordinate deviation scale (the event is
//! `f − E f > nε` for 1-Lipschitz `f`). Raw bound values are exposed
//! alongside their capped-at-1 probabilities.

use crate::chain::{tv_distance, StochasticVector};
use crate::error::Result;
use crate::mixing::ErgodicityConstants;

/// A tail bound: the raw formula value plus its capped probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub raw: f64,
}

impl TailBound {
    /// The bound as an honest probability, capped at 1.
    pub fn probability(&self) -> f64 {
        self.raw.min(1.0)
    }
}

/// Inputs for evaluating the concentration bounds at a single `(n, ε)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundQuery {
    pub n: usize,
    pub epsilon: f64,
    pub constants: ErgodicityConstants,
    /// Hamming-Lipschitz constant of the statistic; the bounds assume 1.
    pub lipschitz_constant: f64,
}

impl BoundQuery {
    pub fn new(n: usize, epsilon: f64, constants: ErgodicityConstants) -> Self {
        Self {
            n,
            epsilon,
            constants,
            lipschitz_constant: 1.0,
        }
    }
}

/// The master bound `2·exp(−2nε² / min(‖Δ‖₂, ‖Δ‖∞)²)` for 1-Lipschitz
/// functions under the Hamming metric.
pub fn master_bound(delta_inf: f64, delta_2: f64, n: usize, epsilon: f64) -> TailBound {
    let norm = delta_2.min(delta_inf);
    TailBound {
        raw: 2.0 * (-2.0 * n as f64 * epsilon * epsilon / (norm * norm)).exp(),
    }
}

/// One-tailed concentration for a geometrically ergodic (hidden) Markov
/// chain: `exp(−n(1−θ)²ε² / (2G²L²))` for an `L`-Lipschitz statistic.
pub fn hmm_concentration_bound(q: &BoundQuery) -> TailBound {
    let g = q.constants.g();
    let theta = q.constants.theta();
    let l = q.lipschitz_constant;
    let exponent = -(q.n as f64) * (1.0 - theta).powi(2) * q.epsilon * q.epsilon
        / (2.0 * g * g * l * l);
    TailBound { raw: exponent.exp() }
}

/// Two-tailed variant of [`hmm_concentration_bound`].
pub fn hmm_concentration_bound_two_tailed(q: &BoundQuery) -> TailBound {
    TailBound {
        raw: 2.0 * hmm_concentration_bound(q).raw,
    }
}

/// `γₙ(G,θ) = ½·√((1+2Gθ)/(n(1−θ)))`.
pub fn gamma_n(constants: &ErgodicityConstants, n: usize) -> f64 {
    assert!(n >= 1);
    let g = constants.g();
    let theta = constants.theta();
    0.5 * ((1.0 + 2.0 * g * theta) / (n as f64 * (1.0 - theta))).sqrt()
}

/// The DKW-type bound: `P(‖ρ−ρ̂‖∞ > threshold + ε) ≤ tail`, with
/// `threshold = √((1+2Gθ)/(n(1−θ))) = 2γₙ`.
pub fn dkw_bound(constants: &ErgodicityConstants, n: usize, epsilon: f64) -> (f64, TailBound) {
    let threshold = 2.0 * gamma_n(constants, n);
    let tail = hmm_concentration_bound(&BoundQuery::new(n, epsilon, constants.clone()));
    (threshold, tail)
}

/// Upper bound on `E‖ρ−ρ̂⁽ⁿ⁾‖∞`; identical to the DKW threshold.
pub fn expectation_sup_bound(constants: &ErgodicityConstants, n: usize) -> f64 {
    2.0 * gamma_n(constants, n)
}

/// Upper bound on `Var[ρ̂_y]`: `ρ_y·(1+2Gθ)/(n(1−θ)) = 4γₙ²ρ_y`.
pub fn variance_bound(rho_y: f64, constants: &ErgodicityConstants, n: usize) -> f64 {
    let gamma = gamma_n(constants, n);
    4.0 * gamma * gamma * rho_y
}

/// Components of the Λₙ threshold. Atoms with `ρ_y ≥ 1/n` are "heavy";
/// the boundary atom goes to the heavy sum (strict `<` selects light).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LambdaBreakdown {
    pub gamma_n: f64,
    /// `γₙ·Σ_{ρ_y ≥ 1/n} √ρ_y`.
    pub heavy_sum: f64,
    /// `Σ_{ρ_y < 1/n} √ρ_y`, unweighted.
    pub light_sqrt_sum: f64,
    /// `Σ_{ρ_y < 1/n} ρ_y`.
    pub light_mass_sum: f64,
    /// `heavy_sum + min(γₙ·light_sqrt_sum, light_mass_sum)`.
    pub lambda: f64,
}

/// The Λₙ threshold of the uniform Chernoff bound.
pub fn lambda_n(rho: &StochasticVector, constants: &ErgodicityConstants, n: usize) -> LambdaBreakdown {
    let gamma = gamma_n(constants, n);
    let cut = 1.0 / n as f64;
    let mut heavy_sqrt = 0.0f64;
    let mut light_sqrt_sum = 0.0f64;
    let mut light_mass_sum = 0.0f64;
    for &p in rho.probs() {
        if p >= cut {
            heavy_sqrt += p.sqrt();
        } else {
            light_sqrt_sum += p.sqrt();
            light_mass_sum += p;
        }
    }
    let heavy_sum = gamma * heavy_sqrt;
    let lambda = heavy_sum + (gamma * light_sqrt_sum).min(light_mass_sum);
    LambdaBreakdown {
        gamma_n: gamma,
        heavy_sum,
        light_sqrt_sum,
        light_mass_sum,
        lambda,
    }
}

/// The uniform Chernoff bound:
/// `P(sup_E |ρ(E) − ρ̂(E)| > Λₙ + ε) ≤ tail`. Returns `(Λₙ, tail)`.
pub fn uniform_chernoff_bound(
    rho: &StochasticVector,
    constants: &ErgodicityConstants,
    n: usize,
    epsilon: f64,
) -> (LambdaBreakdown, TailBound) {
    let breakdown = lambda_n(rho, constants, n);
    let tail = hmm_concentration_bound(&BoundQuery::new(n, epsilon, constants.clone()));
    (breakdown, tail)
}

/// Bound on the empirical-mean drift `TV(E ρ̂⁽ⁿ⁾ − ρ) ≤ G/((1−θ)n)` for an
/// arbitrary start.
pub fn empirical_mean_drift_bound(constants: &ErgodicityConstants, n: usize) -> f64 {
    assert!(n >= 1);
    constants.g() / ((1.0 - constants.theta()) * n as f64)
}

/// Additive probability correction for a non-stationary start:
/// `TV(π − π′)`.
pub fn nonstationary_correction(
    pi: &StochasticVector,
    pi_prime: &StochasticVector,
) -> Result<f64> {
    tv_distance(pi, pi_prime)
}

/// Smallest `s` with `G·θˢ ≤ target`: the burn-in needed before the
/// start-distribution error drops below `target`.
pub fn burn_in_steps(constants: &ErgodicityConstants, target: f64) -> usize {
    assert!(target > 0.0);
    let g = constants.g();
    let theta = constants.theta();
    if g <= target {
        return 0;
    }
    if theta == 0.0 {
        return 1;
    }
    let s = ((target / g).ln() / theta.ln()).ceil();
    let mut s = s.max(1.0) as usize;
    // guard against edge-of-ulp rounding in the closed form
    while g * theta.powi(s as i32) > target {
        s += 1;
    }
    while s > 0 && g * theta.powi(s as i32 - 1) <= target {
        s -= 1;
    }
    s
}
