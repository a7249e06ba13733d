//! Monte Carlo and exact-enumeration verification: empirical distribution
//! estimators, deviation-frequency measurement against the closed-form
//! bounds, expectation estimators, the Hamming-Lipschitz audit, and the
//! exact lemma suite on tiny instances.

use crate::bounds::{
    expectation_sup_bound, hmm_concentration_bound, lambda_n, BoundQuery,
};
use crate::chain::{
    exact_joint_law, sample_trajectory_with, stationary_distribution, tv_raw, ChainSpec,
    StochasticMatrix, StochasticVector, Trajectory, ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::mixing::{contraction_coefficient, eta_bar_exact, fit_ergodicity, verify_contraction};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Monte Carlo confidence level per grid row.
pub const DELTA_MC: f64 = 1e-3;

/// The statistic measured by an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    SupNorm,
    TotalVariation,
    /// Reserved in the report schema for externally-supplied statistics;
    /// no built-in experiment produces it.
    CustomLipschitz,
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Statistic::SupNorm => write!(f, "sup_norm"),
            Statistic::TotalVariation => write!(f, "total_variation"),
            Statistic::CustomLipschitz => write!(f, "custom_lipschitz"),
        }
    }
}

/// Per-symbol occupation counts of a length-`n` trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalDistribution {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn prob(&self, y: usize) -> f64 {
        self.counts[y] as f64 / self.n as f64
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Count-weighted merge of two empirical distributions.
    pub fn concat(&self, other: &EmpiricalDistribution) -> Result<EmpiricalDistribution> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "concat: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(EmpiricalDistribution {
            counts,
            n: self.n + other.n,
        })
    }
}

/// Occupation frequencies `ρ̂⁽ⁿ⁾` of a trajectory over `alphabet` symbols.
pub fn empirical_distribution(t: &Trajectory, alphabet: usize) -> EmpiricalDistribution {
    assert!(!t.is_empty());
    let mut counts = vec![0u64; alphabet];
    for &y in &t.observations {
        counts[y] += 1;
    }
    EmpiricalDistribution {
        counts,
        n: t.len() as u64,
    }
}

/// `max_y |ρ_y − ρ̂_y|`.
pub fn sup_norm_stat(e: &EmpiricalDistribution, rho: &StochasticVector) -> Result<f64> {
    if e.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sup_norm_stat: {} vs {}",
            e.dim(),
            rho.dim()
        )));
    }
    Ok((0..e.dim())
        .map(|y| (rho.get(y) - e.prob(y)).abs())
        .fold(0.0, f64::max))
}

/// `½ Σ_y |ρ_y − ρ̂_y| = sup_E |ρ(E) − ρ̂(E)|`.
pub fn tv_stat(e: &EmpiricalDistribution, rho: &StochasticVector) -> Result<f64> {
    if e.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "tv_stat: {} vs {}",
            e.dim(),
            rho.dim()
        )));
    }
    Ok(0.5
        * (0..e.dim())
            .map(|y| (rho.get(y) - e.prob(y)).abs())
            .sum::<f64>())
}

/// One grid row of a deviation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub epsilon: f64,
    pub threshold: f64,
    pub empirical_frequency: f64,
    pub mc_halfwidth: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Empirical deviation frequencies against the theoretical bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub spec_id: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub statistic: Statistic,
    pub stationary: bool,
    /// `TV(π − π′)` added to the bound column for nonstationary runs.
    pub correction: f64,
    pub delta_mc: f64,
    pub rows: Vec<DeviationRow>,
}

impl DeviationReport {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }
}

/// Shared experiment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec_id: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub statistic: Statistic,
    pub epsilon_grid: Vec<f64>,
    /// Replace the start distribution with π when true; otherwise run from
    /// the spec's own initial and add the additive TV(π − π′) correction.
    pub stationary: bool,
    /// Worker threads for trial partitioning; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            spec_id: "chain".into(),
            n: 1000,
            trials: 10_000,
            seed: 0,
            statistic: Statistic::SupNorm,
            epsilon_grid: vec![0.02, 0.05, 0.1, 0.2],
            stationary: true,
            threads: None,
        }
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// One-sided Hoeffding half-width at confidence `delta` over `trials` trials.
pub fn mc_halfwidth(trials: u64, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * trials as f64)).sqrt()
}

struct ExperimentSetup {
    run_spec: ChainSpec,
    rho: StochasticVector,
    correction: f64,
}

fn prepare(spec: &ChainSpec, cfg: &ExperimentConfig) -> Result<ExperimentSetup> {
    let pi = stationary_distribution(spec.transition())?;
    let rho = spec.stationary_observation_law()?;
    let (run_spec, correction) = if cfg.stationary {
        (spec.with_initial(pi)?, 0.0)
    } else {
        let corr = crate::chain::tv_distance(&pi, spec.initial())?;
        (spec.clone(), corr)
    };
    Ok(ExperimentSetup {
        run_spec,
        rho,
        correction,
    })
}

fn statistic_value(
    statistic: Statistic,
    e: &EmpiricalDistribution,
    rho: &StochasticVector,
) -> Result<f64> {
    match statistic {
        Statistic::SupNorm => sup_norm_stat(e, rho),
        Statistic::TotalVariation => tv_stat(e, rho),
        Statistic::CustomLipschitz => Err(Error::InvalidArgument(
            "custom_lipschitz has no built-in statistic".into(),
        )),
    }
}

/// Measure, over independent trajectories, how often the statistic exceeds
/// `threshold + ε` for each ε in the grid, against the theoretical tail.
///
/// Deterministic given `(spec, constants, cfg)` regardless of worker count:
/// each trial draws from its own derived stream and aggregation is a
/// commutative sum.
pub fn deviation_experiment(
    spec: &ChainSpec,
    constants: &crate::mixing::ErgodicityConstants,
    cfg: &ExperimentConfig,
) -> Result<DeviationReport> {
    if cfg.epsilon_grid.is_empty() {
        return Err(Error::InvalidArgument("epsilon grid is empty".into()));
    }
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(Error::InvalidArgument("n and trials must be positive".into()));
    }
    let setup = prepare(spec, cfg)?;
    let threshold = match cfg.statistic {
        Statistic::SupNorm => expectation_sup_bound(constants, cfg.n),
        Statistic::TotalVariation => lambda_n(&setup.rho, constants, cfg.n).lambda,
        Statistic::CustomLipschitz => {
            return Err(Error::InvalidArgument(
                "custom_lipschitz has no built-in statistic".into(),
            ))
        }
    };
    let alphabet = spec.symbol_count();
    let grid = &cfg.epsilon_grid;
    let exceed: Vec<u64> = in_pool(cfg.threads, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng::trial_rng(cfg.seed, trial);
                let t = sample_trajectory_with(&setup.run_spec, cfg.n, &mut rng);
                let e = empirical_distribution(&t, alphabet);
                let stat = statistic_value(cfg.statistic, &e, &setup.rho)
                    .expect("statistic dimensions validated");
                grid.iter()
                    .map(|&eps| u64::from(stat > threshold + eps))
                    .collect::<Vec<u64>>()
            })
            .reduce(
                || vec![0u64; grid.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    });
    let halfwidth = mc_halfwidth(cfg.trials, DELTA_MC);
    let rows = grid
        .iter()
        .zip(&exceed)
        .map(|(&eps, &count)| {
            let tail =
                hmm_concentration_bound(&BoundQuery::new(cfg.n, eps, constants.clone()));
            let bound = (tail.raw + setup.correction).min(1.0);
            let freq = count as f64 / cfg.trials as f64;
            DeviationRow {
                epsilon: eps,
                threshold,
                empirical_frequency: freq,
                mc_halfwidth: halfwidth,
                bound,
                satisfied: freq - halfwidth <= bound,
            }
        })
        .collect();
    Ok(DeviationReport {
        spec_id: cfg.spec_id.clone(),
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        statistic: cfg.statistic,
        stationary: cfg.stationary,
        correction: setup.correction,
        delta_mc: DELTA_MC,
        rows,
    })
}

/// Monte Carlo estimate of the expected statistic with a 3σ half-width,
/// next to its theoretical bound (`E‖ρ−ρ̂‖∞` bound or `Λₙ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub statistic: Statistic,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub estimate: f64,
    pub halfwidth: f64,
    pub bound: f64,
}

pub fn expectation_experiment(
    spec: &ChainSpec,
    constants: &crate::mixing::ErgodicityConstants,
    cfg: &ExperimentConfig,
) -> Result<ExpectationReport> {
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(Error::InvalidArgument("n and trials must be positive".into()));
    }
    let setup = prepare(spec, cfg)?;
    let bound = match cfg.statistic {
        Statistic::SupNorm => expectation_sup_bound(constants, cfg.n),
        Statistic::TotalVariation => lambda_n(&setup.rho, constants, cfg.n).lambda,
        Statistic::CustomLipschitz => {
            return Err(Error::InvalidArgument(
                "custom_lipschitz has no built-in statistic".into(),
            ))
        }
    };
    let alphabet = spec.symbol_count();
    let (sum, sumsq) = in_pool(cfg.threads, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = rng::trial_rng(cfg.seed, trial);
                let t = sample_trajectory_with(&setup.run_spec, cfg.n, &mut rng);
                let e = empirical_distribution(&t, alphabet);
                let stat = statistic_value(cfg.statistic, &e, &setup.rho)
                    .expect("statistic dimensions validated");
                (stat, stat * stat)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    let trials = cfg.trials as f64;
    let mean = sum / trials;
    let var = (sumsq / trials - mean * mean).max(0.0);
    let halfwidth = 3.0 * (var / trials).sqrt();
    Ok(ExpectationReport {
        statistic: cfg.statistic,
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        estimate: mean,
        halfwidth,
        bound,
    })
}

/// Hamming-Lipschitz audit of the unnormalized statistics
/// `g = n·sup_norm` (1-Lipschitz) and `h = 2n·TV` (2-Lipschitz).
///
/// The audit is exact: ρ is scaled to integer numerators over a dyadic
/// denominator and all comparisons are carried out in `i128` arithmetic,
/// so the returned ratios obey the contracts with no floating-point slack.
/// Covers `pairs` random trajectory pairs plus every single-coordinate
/// perturbation of one sampled trajectory.
pub fn lipschitz_audit(
    rho: &StochasticVector,
    n: usize,
    pairs: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if pairs == 0 || n == 0 {
        return Err(Error::InvalidArgument("pairs and n must be positive".into()));
    }
    let k = rho.dim();
    const DENOM: i128 = 1 << 60;
    let scaled: Vec<i128> = rho
        .probs()
        .iter()
        .map(|&p| (p * DENOM as f64).round() as i128)
        .collect();
    // target values n*m_j in scaled units
    let targets: Vec<i128> = scaled.iter().map(|&m| m * n as i128).collect();
    let stats = |counts: &[i128]| -> (i128, i128) {
        let mut g = 0i128;
        let mut h = 0i128;
        for (j, &t) in targets.iter().enumerate() {
            let d = (t - counts[j] * DENOM).abs();
            g = g.max(d);
            h += d;
        }
        (g, h)
    };
    let counts_of = |traj: &[usize]| -> Vec<i128> {
        let mut c = vec![0i128; k];
        for &y in traj {
            c[y] += 1;
        }
        c
    };
    let hamming = |a: &[usize], b: &[usize]| -> i128 {
        a.iter().zip(b).filter(|(x, y)| x != y).count() as i128
    };
    let mut max_g = 0.0f64;
    let mut max_h = 0.0f64;
    let mut consider = |ga: (i128, i128), gb: (i128, i128), d: i128| {
        if d == 0 {
            return;
        }
        let rg = (ga.0 - gb.0).abs() as f64 / (DENOM * d) as f64;
        let rh = (ga.1 - gb.1).abs() as f64 / (DENOM * d) as f64;
        if rg > max_g {
            max_g = rg;
        }
        if rh > max_h {
            max_h = rh;
        }
    };
    let mut rng = rng::base_rng(seed);
    let sample = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..k)).collect()
    };
    for _ in 0..pairs {
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let d = hamming(&x, &y);
        consider(stats(&counts_of(&x)), stats(&counts_of(&y)), d);
    }
    // all single-coordinate perturbations of one sampled trajectory
    let x = sample(&mut rng);
    let base_counts = counts_of(&x);
    let base_stats = stats(&base_counts);
    for pos in 0..n {
        for sym in 0..k {
            if sym == x[pos] {
                continue;
            }
            let mut c = base_counts.clone();
            c[x[pos]] -= 1;
            c[sym] += 1;
            consider(base_stats, stats(&c), 1);
        }
    }
    Ok((max_g, max_h))
}

/// Outcome of one lemma across all instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub name: String,
    pub checks: u64,
    /// Largest observed `lhs − rhs` (negative when the inequality is slack).
    pub max_violation: f64,
    pub tolerance: f64,
    /// Instance seeds on which the tolerance was exceeded.
    pub failing_seeds: Vec<u64>,
}

impl LemmaCheck {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            checks: 0,
            max_violation: f64::NEG_INFINITY,
            tolerance,
            failing_seeds: Vec::new(),
        }
    }

    fn record(&mut self, violation: f64, instance_seed: u64) {
        self.checks += 1;
        if violation > self.max_violation {
            self.max_violation = violation;
        }
        if violation > self.tolerance {
            self.failing_seeds.push(instance_seed);
        }
    }

    pub fn passed(&self) -> bool {
        self.failing_seeds.is_empty()
    }
}

/// Report of the exact lemma suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub seed: u64,
    pub instances: u64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaSuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

const INEQ_TOL: f64 = 1e-10;
const EQ_TOL: f64 = 1e-12;

struct Instance {
    spec: ChainSpec,
    /// Second initial distribution for two-chain comparisons.
    xi_prime: StochasticVector,
    psi: StochasticVector,
    n: usize,
    ergodic: bool,
}

fn random_vector(rng: &mut rand_chacha::ChaCha8Rng, k: usize, floor: f64) -> StochasticVector {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + floor).collect();
    let sum: f64 = raw.iter().sum();
    StochasticVector::new(raw.into_iter().map(|v| v / sum).collect()).expect("valid by construction")
}

fn random_kernel(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> StochasticMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..cols {
        data.extend_from_slice(random_vector(rng, rows, 0.05).probs());
    }
    StochasticMatrix::from_column_major(rows, cols, data).expect("valid by construction")
}

fn random_instance(instance_seed: u64) -> Instance {
    let mut rng = rng::base_rng(instance_seed);
    let k = rng.random_range(2..=4usize);
    let m = rng.random_range(2..=4usize);
    let n = rng.random_range(2..=5usize);
    let a = random_kernel(&mut rng, k, k);
    let b = random_kernel(&mut rng, m, k);
    let xi = random_vector(&mut rng, k, 0.0);
    let xi_prime = random_vector(&mut rng, k, 0.0);
    let psi = random_vector(&mut rng, k, 0.0);
    Instance {
        spec: ChainSpec::new(xi, a, Some(b)).expect("consistent dimensions"),
        xi_prime,
        psi,
        n,
        ergodic: true,
    }
}

fn corner_instances() -> Vec<(u64, Instance)> {
    let mut out = Vec::new();
    // rank-one kernel: mixes in one step, all inequalities with slack zero
    let col = StochasticVector::new(vec![0.5, 0.3, 0.2]).unwrap();
    let a = StochasticMatrix::rank_one(&col, 3);
    let b = StochasticMatrix::from_rows(&[
        vec![0.6, 0.4],
        vec![0.3, 0.7],
        vec![0.5, 0.5],
    ])
    .unwrap();
    out.push((
        u64::MAX,
        Instance {
            spec: ChainSpec::new(StochasticVector::uniform(3), a, Some(b)).unwrap(),
            xi_prime: StochasticVector::point_mass(3, 1),
            psi: StochasticVector::point_mass(3, 0),
            n: 4,
            ergodic: true,
        },
    ));
    // point-mass initial on the two-state reference kernel
    let a = StochasticMatrix::from_column_major(2, 2, vec![0.9, 0.1, 0.2, 0.8]).unwrap();
    out.push((
        u64::MAX - 1,
        Instance {
            spec: ChainSpec::markov(StochasticVector::point_mass(2, 0), a).unwrap(),
            xi_prime: StochasticVector::point_mass(2, 1),
            psi: StochasticVector::new(vec![0.25, 0.75]).unwrap(),
            n: 4,
            ergodic: true,
        },
    ));
    // identity kernel: excluded from ergodicity-dependent checks
    out.push((
        u64::MAX - 2,
        Instance {
            spec: ChainSpec::markov(StochasticVector::uniform(2), StochasticMatrix::identity(2))
                .unwrap(),
            xi_prime: StochasticVector::new(vec![0.3, 0.7]).unwrap(),
            psi: StochasticVector::point_mass(2, 0),
            n: 3,
            ergodic: false,
        },
    ));
    out
}

/// Exhaustive subset supremum `max_{E ⊆ alphabet} |ρ(E) − ρ̂(E)|`;
/// independent route to the TV identity, tractable for `k ≤ 12`.
pub fn subset_sup(e: &EmpiricalDistribution, rho: &StochasticVector) -> Result<f64> {
    if e.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subset_sup: {} vs {}",
            e.dim(),
            rho.dim()
        )));
    }
    let k = e.dim();
    if k > 12 {
        return Err(Error::EnumerationGuard(format!(
            "2^{k} subsets exceeds the exhaustive-subset limit"
        )));
    }
    let mut best = 0.0f64;
    for mask in 0u32..(1 << k) {
        let mut diff = 0.0;
        for y in 0..k {
            if mask & (1 << y) != 0 {
                diff += rho.get(y) - e.prob(y);
            }
        }
        best = best.max(diff.abs());
    }
    Ok(best)
}

fn check_instance(
    instance_seed: u64,
    inst: &Instance,
    checks: &mut [LemmaCheck],
) -> Result<()> {
    let spec = &inst.spec;
    let a = spec.transition();
    let n = inst.n;
    // [0] Markov contraction
    let (lhs, rhs) = verify_contraction(a, spec.initial(), &inst.psi)?;
    checks[0].record(lhs - rhs, instance_seed);

    // [7] TV identity via exhaustive subsets, on a synthetic count vector
    {
        let mut rng = rng::base_rng(instance_seed ^ 0xA5A5_A5A5);
        let m = spec.symbol_count();
        let traj = Trajectory {
            observations: (0..8).map(|_| rng.random_range(0..m)).collect(),
            hidden_states: None,
        };
        let e = empirical_distribution(&traj, m);
        let rho = spec.stationary_observation_law().unwrap_or_else(|_| {
            StochasticVector::uniform(m)
        });
        let direct = tv_stat(&e, &rho)?;
        let brute = subset_sup(&e, &rho)?;
        checks[7].record((direct - brute).abs(), instance_seed);
    }

    // [5] xi-xi' equality holds for any kernel, ergodic or not
    {
        let markov = spec.underlying();
        let law = exact_joint_law(&markov, n)?;
        let law_prime = exact_joint_law(&markov.with_initial(inst.xi_prime.clone())?, n)?;
        let joint_tv = tv_raw(law.probs(), law_prime.probs());
        let init_tv = crate::chain::tv_distance(spec.initial(), &inst.xi_prime)?;
        checks[5].record((joint_tv - init_tv).abs(), instance_seed);
    }

    if !inst.ergodic {
        return Ok(());
    }

    let constants = fit_ergodicity(a, 32.max(n + 1))?;
    let g = constants.g();
    let theta = constants.theta();
    let pi = stationary_distribution(a)?;

    // [1] ergo-contr: kappa(A^s) <= 2 G theta^s
    for s in 1..=6 {
        let kappa = contraction_coefficient(&a.power(s)?);
        checks[1].record(kappa - 2.0 * g * theta.powi(s as i32), instance_seed);
    }

    // [2] eta-tau chain on the observed process
    for i in 1..n {
        for j in i + 1..=n {
            let eta = eta_bar_exact(spec, n, i, j)?;
            let tau = crate::mixing::inverse_mixing_time(a, j - i + 1)?;
            checks[2].record(eta - 2.0 * tau, instance_seed);
            checks[2].record(2.0 * tau - 2.0 * g * theta.powi((j - i) as i32), instance_seed);
            // [3] HMM domination by the underlying Markov chain
            if spec.emission().is_some() {
                let eta_markov = eta_bar_exact(&spec.underlying(), n, i, j)?;
                checks[3].record(eta - eta_markov, instance_seed);
            }
        }
    }

    // [4] Y-Y': joint law TV vs stationary version bounded by TV(pi - xi)
    {
        let law = exact_joint_law(spec, n)?;
        let law_stat = exact_joint_law(&spec.with_initial(pi.clone())?, n)?;
        let joint_tv = tv_raw(law.probs(), law_stat.probs());
        let init_tv = crate::chain::tv_distance(spec.initial(), &pi)?;
        checks[4].record(joint_tv - init_tv, instance_seed);
    }

    // [6] hmm-nonstat: exact empirical-mean drift vs G/((1-theta) n)
    {
        let b = spec.emission();
        let mut mean = vec![0.0f64; spec.symbol_count()];
        let mut law = spec.initial().clone();
        for i in 1..=n {
            if i > 1 {
                law = a.apply(&law)?;
            }
            let obs = match b {
                Some(b) => b.apply(&law)?,
                None => law.clone(),
            };
            for (m, &p) in mean.iter_mut().zip(obs.probs()) {
                *m += p / n as f64;
            }
        }
        let rho = spec.stationary_observation_law()?;
        let drift = tv_raw(&mean, rho.probs());
        let bound = crate::bounds::empirical_mean_drift_bound(&constants, n);
        checks[6].record(drift - bound, instance_seed);
    }
    Ok(())
}

/// Exact verification of the contraction, mixing, domination, and
/// nonstationarity lemmas on randomized tiny instances plus fixed corner
/// cases. Inequalities are checked to `1e-10`, equalities to `1e-12`.
pub fn exact_lemma_suite(instances: u64, seed: u64, limit: u128) -> Result<LemmaSuiteReport> {
    if limit > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard(format!(
            "limit {limit} exceeds the enumeration guard {ENUMERATION_LIMIT}"
        )));
    }
    if instances == 0 {
        return Err(Error::InvalidArgument("at least one instance required".into()));
    }
    let mut checks = vec![
        LemmaCheck::new("markov_contraction", INEQ_TOL),
        LemmaCheck::new("ergo_contr", INEQ_TOL),
        LemmaCheck::new("eta_tau_chain", INEQ_TOL),
        LemmaCheck::new("hmm_domination", INEQ_TOL),
        LemmaCheck::new("y_yprime_nearly_stationary", INEQ_TOL),
        LemmaCheck::new("xi_xiprime_equality", EQ_TOL),
        LemmaCheck::new("hmm_nonstat_drift", INEQ_TOL),
        LemmaCheck::new("tv_subset_identity", EQ_TOL),
    ];
    for (corner_seed, inst) in corner_instances() {
        check_instance(corner_seed, &inst, &mut checks)?;
    }
    for idx in 0..instances {
        let instance_seed = rng::derive_seed(seed, idx);
        let inst = random_instance(instance_seed);
        check_instance(instance_seed, &inst, &mut checks)?;
    }
    Ok(LemmaSuiteReport {
        seed,
        instances,
        checks,
    })
}
