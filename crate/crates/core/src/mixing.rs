//! Contraction coefficients, inverse mixing times, fitted
//! geometric-ergodicity constants, brute-force η̄-mixing coefficients, and
//! the Δ matrix with its ℓ∞ and ℓ₂ operator norms.

use crate::chain::{
    exact_joint_law, stationary_distribution, step_law, tv_raw, ChainSpec, StochasticMatrix,
    StochasticVector, ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};

/// Döblin contraction coefficient: the maximum total variation distance
/// between any two columns of the kernel.
pub fn contraction_coefficient(a: &StochasticMatrix) -> f64 {
    let k = a.cols();
    let mut kappa = 0.0f64;
    for x in 0..k {
        for xp in x + 1..k {
            kappa = kappa.max(tv_raw(a.column(x), a.column(xp)));
        }
    }
    kappa
}

/// Evaluate both sides of the Markov contraction inequality
/// `TV(Ap − Aq) ≤ κ(A)·TV(p − q)`. Returns `(lhs, rhs)`.
pub fn verify_contraction(
    a: &StochasticMatrix,
    p: &StochasticVector,
    q: &StochasticVector,
) -> Result<(f64, f64)> {
    let ap = a.apply(p)?;
    let aq = a.apply(q)?;
    let lhs = crate::chain::tv_distance(&ap, &aq)?;
    let rhs = contraction_coefficient(a) * crate::chain::tv_distance(p, q)?;
    Ok((lhs, rhs))
}

/// Inverse mixing time `τ_s`: the worst-case TV distance between the
/// `s`-step conditional law and the stationary distribution.
pub fn inverse_mixing_time(a: &StochasticMatrix, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::InvalidArgument("inverse_mixing_time requires s >= 1".into()));
    }
    let pi = stationary_distribution(a)?;
    let k = a.cols();
    let mut tau = 0.0f64;
    for x in 0..k {
        let law = step_law(a, &StochasticVector::point_mass(k, x), s)?;
        tau = tau.max(crate::chain::tv_distance(&law, &pi)?);
    }
    Ok(tau)
}

/// Fitted geometric-ergodicity constants `(G, θ)` together with the
/// `τ_s` table used as evidence, satisfying `τ_s ≤ G·θ^{s−1}` for every
/// tabulated `s` (convention `0⁰ = 1`).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErgodicityConstants {
    g: f64,
    theta: f64,
    tau_table: Vec<f64>,
    /// Set when `τ_horizon` has not dropped below `½·τ₁`, i.e. the horizon
    /// is too short for a trustworthy fit.
    pub short_horizon_warning: bool,
}

impl ErgodicityConstants {
    /// Constants supplied directly, without a `τ` table.
    pub fn from_constants(g: f64, theta: f64) -> Result<Self> {
        if !(g >= 1.0) || !g.is_finite() {
            return Err(Error::InvalidArgument(format!("G must be >= 1, got {g}")));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!(
                "theta must be in [0, 1), got {theta}"
            )));
        }
        Ok(Self {
            g,
            theta,
            tau_table: Vec::new(),
            short_horizon_warning: false,
        })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `τ_s` values for `s = 1..=horizon`; empty for directly-supplied constants.
    pub fn tau_table(&self) -> &[f64] {
        &self.tau_table
    }

    /// `G·θ^{s−1}` with the `0⁰ = 1` convention.
    pub fn envelope(&self, s: usize) -> f64 {
        assert!(s >= 1);
        if s == 1 {
            self.g
        } else {
            self.g * self.theta.powi(s as i32 - 1)
        }
    }
}

/// Fit `(G, θ)` to the tabulated inverse mixing times `τ_1..τ_horizon`.
///
/// θ is the largest consecutive ratio `τ_{s+1}/τ_s` over rows with
/// `τ_s > 1e−13` (zero when the chain mixes exactly), and
/// `G = max(1, max_s τ_s/θ^{s−1})`. This makes the envelope
/// `G·θ^{s−1}` a valid upper bound on every tabulated `τ_s` by
/// construction.
pub fn fit_ergodicity(a: &StochasticMatrix, horizon: usize) -> Result<ErgodicityConstants> {
    if horizon < 2 {
        return Err(Error::InvalidArgument("fit horizon must be at least 2".into()));
    }
    let pi = stationary_distribution(a)?;
    let k = a.cols();
    // one pass per start state, reusing the evolving law
    let mut tau_table = vec![0.0f64; horizon];
    for x in 0..k {
        let mut law = StochasticVector::point_mass(k, x);
        for s in 0..horizon {
            if s > 0 {
                law = a.apply(&law)?;
            }
            let tv = crate::chain::tv_distance(&law, &pi)?;
            if tv > tau_table[s] {
                tau_table[s] = tv;
            }
        }
    }
    const FLOOR: f64 = 1e-13;
    // TV values carry ~1e-16 absolute noise from cancellation against pi,
    // so ratios are trusted only while tau is well above that noise
    let noise_floor = FLOOR.max(1e-3 * tau_table[0]);
    let mut theta = 0.0f64;
    for s in 0..horizon - 1 {
        if tau_table[s] > FLOOR && tau_table[s + 1] > noise_floor {
            theta = theta.max(tau_table[s + 1] / tau_table[s]);
        }
    }
    theta = theta.min(1.0 - 1e-12);
    let mut g = 1.0f64;
    for (s, &tau) in tau_table.iter().enumerate() {
        let pow = if s == 0 { 1.0 } else { theta.powi(s as i32) };
        if tau > FLOOR || s == 0 {
            if pow > 0.0 {
                g = g.max(tau / pow);
            }
        }
    }
    // postcondition: tau_s <= G theta^{s-1} + 1e-12 for every tabulated s
    for (s, &tau) in tau_table.iter().enumerate() {
        let env = if s == 0 { g } else { g * theta.powi(s as i32) };
        if tau > env + 1e-12 {
            return Err(Error::NoConvergence(s));
        }
    }
    let short_horizon_warning = tau_table[horizon - 1] > 0.5 * tau_table[0];
    Ok(ErgodicityConstants {
        g,
        theta,
        tau_table,
        short_horizon_warning,
    })
}

/// Brute-force η̄-mixing coefficient of the observed process: the supremum
/// over realizable histories `(y, w, w')` of the TV distance between the two
/// conditional laws of the suffix `(Y_j, …, Y_n)`.
///
/// Indices are 1-based with `1 ≤ i < j ≤ n`, matching the usual convention
/// for these coefficients. Prefixes with probability zero are skipped.
pub fn eta_bar_exact(spec: &ChainSpec, n: usize, i: usize, j: usize) -> Result<f64> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidArgument(format!(
            "eta_bar_exact requires 1 <= i < j <= n, got i={i}, j={j}, n={n}"
        )));
    }
    let m = spec.symbol_count();
    let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard(format!(
            "{m}^{n} = {total} trajectories exceeds the {ENUMERATION_LIMIT} limit"
        )));
    }
    let law = exact_joint_law(spec, n)?;
    let suffix_len = n - j + 1;
    let suffix_count = m.pow(suffix_len as u32);
    let base_count = m.pow((i - 1) as u32);
    // mass[base][w] and joint suffix mass cond[base][w][suffix]
    let mut mass = vec![0.0f64; base_count * m];
    let mut cond = vec![0.0f64; base_count * m * suffix_count];
    let mid_count = m.pow((j - 1 - i) as u32);
    for (idx, &p) in law.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let suffix = idx % suffix_count;
        let rest = idx / (suffix_count * mid_count);
        let w = rest % m;
        let base = rest / m;
        mass[base * m + w] += p;
        cond[(base * m + w) * suffix_count + suffix] += p;
    }
    let mut sup = 0.0f64;
    let mut lw = vec![0.0f64; suffix_count];
    let mut lwp = vec![0.0f64; suffix_count];
    for base in 0..base_count {
        for w in 0..m {
            let mw = mass[base * m + w];
            if mw == 0.0 {
                continue;
            }
            for wp in w + 1..m {
                let mwp = mass[base * m + wp];
                if mwp == 0.0 {
                    continue;
                }
                let cw = &cond[(base * m + w) * suffix_count..(base * m + w + 1) * suffix_count];
                let cwp =
                    &cond[(base * m + wp) * suffix_count..(base * m + wp + 1) * suffix_count];
                for s in 0..suffix_count {
                    lw[s] = cw[s] / mw;
                    lwp[s] = cwp[s] / mwp;
                }
                sup = sup.max(tv_raw(&lw, &lwp));
            }
        }
    }
    Ok(sup)
}

/// The upper-triangular Δ matrix with unit diagonal; entry `(i, j)` for
/// `i < j` is `η̄ᵢⱼ` or an upper bound on it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMatrix {
    n: usize,
    /// Row-major `n×n`, zero below the diagonal.
    entries: Vec<f64>,
}

impl DeltaMatrix {
    /// Build from an entry function over 1-based index pairs `i < j`.
    /// Values are clipped to `[0, 1]`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n >= 1);
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
            for j in i + 1..n {
                entries[i * n + j] = f(i + 1, j + 1).clamp(0.0, 1.0);
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 0-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }
}

/// Δ filled with the geometric-ergodicity bound `min(1, 2G·θ^{j−i})`.
pub fn delta_matrix(constants: &ErgodicityConstants, n: usize) -> DeltaMatrix {
    let g = constants.g();
    let theta = constants.theta();
    DeltaMatrix::from_fn(n, |i, j| 2.0 * g * theta.powi((j - i) as i32))
}

/// `‖Δ‖∞`: the maximum row sum.
pub fn delta_inf_norm(d: &DeltaMatrix) -> f64 {
    let n = d.n();
    let mut best = 0.0f64;
    for i in 0..n {
        let row: f64 = (i..n).map(|j| d.entry(i, j)).sum();
        best = best.max(row);
    }
    best
}

/// `‖Δ‖₁`: the maximum column sum.
pub fn delta_1_norm(d: &DeltaMatrix) -> f64 {
    let n = d.n();
    let mut best = 0.0f64;
    for j in 0..n {
        let col: f64 = (0..=j).map(|i| d.entry(i, j)).sum();
        best = best.max(col);
    }
    best
}

const POWER_ITERATION_CAP: usize = 100_000;
const POWER_ITERATION_TOL: f64 = 1e-10;

/// `‖Δ‖₂`: the largest singular value, via power iteration on `ΔᵀΔ`
/// started from the all-ones vector.
pub fn delta_2_norm(d: &DeltaMatrix) -> Result<f64> {
    let n = d.n();
    let mut v = vec![1.0f64; n];
    let mut lambda = 0.0f64;
    for iter in 0..POWER_ITERATION_CAP {
        // w = Δᵀ(Δv)
        let mut dv = vec![0.0f64; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in i..n {
                s += d.entry(i, j) * v[j];
            }
            dv[i] = s;
        }
        let mut w = vec![0.0f64; n];
        for j in 0..n {
            let mut s = 0.0;
            for i in 0..=j {
                s += d.entry(i, j) * dv[i];
            }
            w[j] = s;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if iter > 0 && (next - lambda).abs() <= POWER_ITERATION_TOL * next.max(1.0) {
            return Ok(next.sqrt());
        }
        lambda = next;
    }
    Err(Error::NoConvergence(POWER_ITERATION_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::StochasticVector;

    fn two_state_kernel() -> StochasticMatrix {
        StochasticMatrix::from_column_major(2, 2, vec![0.9, 0.1, 0.2, 0.8]).unwrap()
    }

    #[test]
    fn kappa_of_rank_one_is_zero() {
        let col = StochasticVector::new(vec![0.3, 0.7]).unwrap();
        let a = StochasticMatrix::rank_one(&col, 2);
        assert_eq!(contraction_coefficient(&a), 0.0);
    }

    #[test]
    fn kappa_of_identity_is_one() {
        assert_eq!(contraction_coefficient(&StochasticMatrix::identity(2)), 1.0);
    }

    #[test]
    fn kappa_of_two_state_kernel() {
        assert!((contraction_coefficient(&two_state_kernel()) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn contraction_holds_at_point_masses() {
        let a = two_state_kernel();
        let p = StochasticVector::point_mass(2, 0);
        let q = StochasticVector::point_mass(2, 1);
        let (lhs, rhs) = verify_contraction(&a, &p, &q).unwrap();
        assert!((lhs - 0.7).abs() < 1e-15);
        assert!((rhs - 0.7).abs() < 1e-15);
        let (l0, r0) = verify_contraction(&a, &p, &p).unwrap();
        assert_eq!((l0, r0), (0.0, 0.0));
    }

    #[test]
    fn tau_values_of_two_state_kernel() {
        let a = two_state_kernel();
        assert!((inverse_mixing_time(&a, 1).unwrap() - 2.0 / 3.0).abs() < 1e-13);
        assert!((inverse_mixing_time(&a, 2).unwrap() - 7.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn tau_of_rank_one_after_one_step() {
        let col = StochasticVector::new(vec![0.3, 0.7]).unwrap();
        let a = StochasticMatrix::rank_one(&col, 2);
        assert!(inverse_mixing_time(&a, 2).unwrap() < 1e-14);
    }

    #[test]
    fn fit_two_state_kernel() {
        let c = fit_ergodicity(&two_state_kernel(), 64).unwrap();
        assert!((c.theta() - 0.7).abs() < 1e-12, "theta {}", c.theta());
        assert!((c.g() - 1.0).abs() < 1e-10, "g {}", c.g());
        // tau_s = (2/3) 0.7^{s-1}
        for (s, &tau) in c.tau_table().iter().enumerate() {
            let expect = (2.0 / 3.0) * 0.7f64.powi(s as i32);
            assert!((tau - expect).abs() < 1e-10, "s={} tau={tau}", s + 1);
        }
        assert!(!c.short_horizon_warning);
    }

    #[test]
    fn fit_rank_one_kernel() {
        let col = StochasticVector::new(vec![0.3, 0.7]).unwrap();
        let a = StochasticMatrix::rank_one(&col, 2);
        let c = fit_ergodicity(&a, 8).unwrap();
        assert_eq!(c.theta(), 0.0);
        assert_eq!(c.g(), 1.0);
    }

    #[test]
    fn fit_rejects_identity() {
        assert!(fit_ergodicity(&StochasticMatrix::identity(2), 8).is_err());
    }

    #[test]
    fn fit_short_horizon_warns() {
        // slow kernel: theta = 0.98
        let a = StochasticMatrix::from_column_major(2, 2, vec![0.99, 0.01, 0.01, 0.99]).unwrap();
        let c = fit_ergodicity(&a, 4).unwrap();
        assert!(c.short_horizon_warning);
    }

    #[test]
    fn eta_bar_iid_is_zero() {
        let col = StochasticVector::new(vec![0.3, 0.7]).unwrap();
        let a = StochasticMatrix::rank_one(&col, 2);
        let spec = ChainSpec::markov(StochasticVector::uniform(2), a).unwrap();
        assert!(eta_bar_exact(&spec, 4, 1, 3).unwrap() < 1e-14);
    }

    #[test]
    fn eta_bar_identity_kernel_is_one() {
        let spec =
            ChainSpec::markov(StochasticVector::uniform(2), StochasticMatrix::identity(2)).unwrap();
        // conditioning on X_1 = w pins every later X_j, so the two suffix
        // laws are disjoint point masses
        assert!((eta_bar_exact(&spec, 4, 1, 3).unwrap() - 1.0).abs() < 1e-14);
        // for i >= 2 the identity chain realizes only one symbol per prefix,
        // so no pair of conditioning values is jointly realizable
        assert_eq!(eta_bar_exact(&spec, 4, 2, 4).unwrap(), 0.0);
    }

    #[test]
    fn eta_bar_matches_power_kernel_contraction() {
        let a = two_state_kernel();
        let spec = ChainSpec::markov(StochasticVector::uniform(2), a.clone()).unwrap();
        for n in 2..=5 {
            for i in 1..n {
                for j in i + 1..=n {
                    let eta = eta_bar_exact(&spec, n, i, j).unwrap();
                    let kappa = contraction_coefficient(&a.power(j - i).unwrap());
                    assert!(
                        (eta - kappa).abs() < 1e-12,
                        "n={n} i={i} j={j}: eta={eta} kappa={kappa}"
                    );
                    assert!((eta - 0.7f64.powi((j - i) as i32)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn eta_bar_rejects_bad_indices() {
        let spec = ChainSpec::markov(StochasticVector::uniform(2), two_state_kernel()).unwrap();
        assert!(eta_bar_exact(&spec, 3, 2, 2).is_err());
        assert!(eta_bar_exact(&spec, 3, 0, 2).is_err());
        assert!(eta_bar_exact(&spec, 3, 1, 4).is_err());
    }

    #[test]
    fn delta_matrix_theta_zero_is_identity() {
        let c = ErgodicityConstants::from_constants(1.0, 0.0).unwrap();
        let d = delta_matrix(&c, 4);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(d.entry(i, j), expect);
            }
        }
        assert_eq!(delta_inf_norm(&d), 1.0);
        assert!((delta_2_norm(&d).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn delta_matrix_worked_example() {
        // G = 1, theta = 0.5, n = 3: off-diagonals 1, 0.5 and 1
        let c = ErgodicityConstants::from_constants(1.0, 0.5).unwrap();
        let d = delta_matrix(&c, 3);
        assert_eq!(d.entry(0, 1), 1.0);
        assert_eq!(d.entry(0, 2), 0.5);
        assert_eq!(d.entry(1, 2), 1.0);
        assert!((delta_inf_norm(&d) - 2.5).abs() < 1e-15);
    }

    #[test]
    fn delta_inf_norm_bounded_by_geometric_series() {
        let c = ErgodicityConstants::from_constants(1.3, 0.6).unwrap();
        for n in [1, 2, 5, 20, 100] {
            let d = delta_matrix(&c, n);
            assert!(delta_inf_norm(&d) <= 2.0 * c.g() / (1.0 - c.theta()) + 1e-12);
        }
    }

    #[test]
    fn delta_2_norm_closed_form_2x2() {
        for a in [0.0, 0.25, 0.5, 1.0] {
            let d = DeltaMatrix::from_fn(2, |_, _| a);
            let expect = (1.0 + a * a / 2.0 + a * (1.0 + a * a / 4.0).sqrt()).sqrt();
            let got = delta_2_norm(&d).unwrap();
            assert!((got - expect).abs() < 1e-9, "a={a}: {got} vs {expect}");
        }
    }

    #[test]
    fn delta_2_norm_holder_interpolation() {
        let c = ErgodicityConstants::from_constants(1.2, 0.4).unwrap();
        for n in [2, 5, 17] {
            let d = delta_matrix(&c, n);
            let two = delta_2_norm(&d).unwrap();
            let bound = (delta_1_norm(&d) * delta_inf_norm(&d)).sqrt();
            assert!(two <= bound + 1e-9, "n={n}: {two} vs {bound}");
        }
    }
}
