//! Finite-state distributions, column-stochastic kernels, HMM specification,
//! total variation distance, exact law computation, and seeded trajectory
//! sampling.
//!
//! Kernels are column-stochastic: entry `(x', x)` is the probability of
//! moving to `x'` from `x`, so applying a kernel to a distribution is a plain
//! matrix-vector product.

use crate::error::{Error, Result};
use crate::rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Construction tolerance for probability sums.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Enumeration guard for exact joint laws.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// A probability distribution over a finite state space `0..k-1`.
///
/// Entries are validated to be nonnegative and to sum to 1 within `1e-9`,
/// then renormalized so the stored sum is exact to within `1e-15`.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticVector {
    probs: Vec<f64>,
}

impl StochasticVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is {p}, must be a finite nonnegative value"
                )));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, deviation {:.3e} exceeds tolerance {SUM_TOLERANCE:.0e}",
                (sum - 1.0).abs()
            )));
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Ok(Self { probs })
    }

    /// Point mass at state `state`.
    pub fn point_mass(dim: usize, state: usize) -> Self {
        assert!(state < dim);
        let mut probs = vec![0.0; dim];
        probs[state] = 1.0;
        Self { probs }
    }

    /// Uniform distribution on `dim` states.
    pub fn uniform(dim: usize) -> Self {
        Self {
            probs: vec![1.0 / dim as f64; dim],
        }
    }

    /// Internal constructor for vectors produced by kernel application,
    /// where nonnegativity and near-unit sum hold by construction.
    pub(crate) fn from_normalized(mut probs: Vec<f64>) -> Self {
        let sum: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= sum;
        }
        Self { probs }
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

/// Total variation distance, `½ Σ|pᵢ − qᵢ|`.
pub fn tv_distance(p: &StochasticVector, q: &StochasticVector) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch(format!(
            "tv_distance: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(tv_raw(p.probs(), q.probs()))
}

/// Total variation of two same-length nonnegative weight vectors.
pub(crate) fn tv_raw(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// A column-stochastic kernel: entry `(x', x)` is read as `A(x' | x)`.
///
/// `rows` may differ from `cols` for emission matrices (`m` observation
/// symbols over `k` hidden states).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    /// Column-major storage; column `x` occupies `data[x*rows .. (x+1)*rows]`.
    data: Vec<f64>,
}

impl StochasticMatrix {
    /// Build from column-major data, validating each column sums to 1
    /// within `1e-9`. Columns are renormalized after validation.
    pub fn from_column_major(rows: usize, cols: usize, mut data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidKernel(format!(
                "shape {rows}x{cols} does not match {} entries",
                data.len()
            )));
        }
        for c in 0..cols {
            let col = &mut data[c * rows..(c + 1) * rows];
            for (r, &v) in col.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "entry ({r}, {c}) is {v}, must be a finite nonnegative value"
                    )));
                }
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::InvalidKernel(format!(
                    "column {c} sums to {sum}, deviation {:.3e} exceeds tolerance {SUM_TOLERANCE:.0e}",
                    (sum - 1.0).abs()
                )));
            }
            for v in col.iter_mut() {
                *v /= sum;
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from per-source rows: `rows[x]` is the distribution of the next
    /// state (or emitted symbol) given state `x`. This is the external file
    /// convention; it is transposed into column-stochastic form here.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.len();
        if cols == 0 {
            return Err(Error::InvalidKernel("no rows given".into()));
        }
        let width = rows[0].len();
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidKernel(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
        }
        let mut data = vec![0.0; width * cols];
        for (x, row) in rows.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                data[x * width + y] = v;
            }
        }
        Self::from_column_major(width, cols, data).map_err(|e| match e {
            // column c of the internal layout is row c of the input
            Error::InvalidKernel(msg) => Error::InvalidKernel(msg.replace("column", "row")),
            other => other,
        })
    }

    /// Kernel whose every column equals `col` (rank one; mixes in one step).
    pub fn rank_one(col: &StochasticVector, cols: usize) -> Self {
        let rows = col.dim();
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..cols {
            data.extend_from_slice(col.probs());
        }
        Self { rows, cols, data }
    }

    pub fn identity(k: usize) -> Self {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self {
            rows: k,
            cols: k,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry `(x', x) = A(x' | x)`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    /// Column `x`: the distribution of the next state given `x`.
    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    /// Matrix-vector product `A p`. The result is a valid distribution.
    pub fn apply(&self, p: &StochasticVector) -> Result<StochasticVector> {
        if p.dim() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "kernel has {} columns, vector has dimension {}",
                self.cols,
                p.dim()
            )));
        }
        Ok(StochasticVector::from_normalized(self.apply_raw(p.probs())))
    }

    pub(crate) fn apply_raw(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (x, &px) in p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let col = self.column(x);
            for (xp, &a) in col.iter().enumerate() {
                out[xp] += a * px;
            }
        }
        out
    }

    /// Kernel composition `self · other`.
    pub fn compose(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "compose: {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for c in 0..other.cols {
            let out = self.apply_raw(other.column(c));
            data[c * self.rows..(c + 1) * self.rows].copy_from_slice(&out);
        }
        Ok(StochasticMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// `self` raised to the `m`-th power by repeated composition.
    pub fn power(&self, m: usize) -> Result<StochasticMatrix> {
        if !self.is_square() {
            return Err(Error::InvalidKernel("power of a non-square kernel".into()));
        }
        let mut acc = StochasticMatrix::identity(self.rows);
        for _ in 0..m {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }
}

/// Primitivity test via boolean matrix powers: true iff some power
/// `A^m`, `m ≤ (k−1)² + 1`, is entrywise strictly positive (Wielandt bound).
pub fn check_ergodic(a: &StochasticMatrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let k = a.rows();
    let adj: Vec<bool> = a.data.iter().map(|&v| v > 0.0).collect();
    let cap = (k - 1) * (k - 1) + 1;
    let mut pow = adj.clone();
    for _ in 0..cap {
        if pow.iter().all(|&b| b) {
            return true;
        }
        // boolean product pow <- adj * pow, column-major
        let mut next = vec![false; k * k];
        for c in 0..k {
            for x in 0..k {
                if pow[c * k + x] {
                    for xp in 0..k {
                        if adj[x * k + xp] {
                            next[c * k + xp] = true;
                        }
                    }
                }
            }
        }
        if next == pow {
            break;
        }
        pow = next;
    }
    pow.iter().all(|&b| b)
}

/// Stationary distribution of an ergodic kernel: the unique stochastic
/// vector with `Aπ = π`, solved by dense elimination with iterative
/// refinement. The residual `‖Aπ − π‖₁` is at most `1e-12`.
pub fn stationary_distribution(a: &StochasticMatrix) -> Result<StochasticVector> {
    if !a.is_square() {
        return Err(Error::InvalidKernel(
            "stationary distribution of a non-square kernel".into(),
        ));
    }
    if !check_ergodic(a) {
        return Err(Error::NotErgodic(
            "kernel is reducible or periodic; no unique stationary distribution".into(),
        ));
    }
    let k = a.rows();
    // (A - I)π = 0 with the last equation replaced by Σπ = 1.
    let mut m = vec![0.0; k * k]; // row-major
    for c in 0..k {
        for r in 0..k {
            m[r * k + c] = a.entry(r, c) - if r == c { 1.0 } else { 0.0 };
        }
    }
    for c in 0..k {
        m[(k - 1) * k + c] = 1.0;
    }
    let mut b = vec![0.0; k];
    b[k - 1] = 1.0;
    let lu = LuFactors::new(m, k)?;
    let mut x = lu.solve(&b);
    // two rounds of iterative refinement against the original equations
    for _ in 0..2 {
        let ax = a.apply_raw(&x);
        let mut r = vec![0.0; k];
        for i in 0..k - 1 {
            r[i] = -(ax[i] - x[i]);
        }
        r[k - 1] = 1.0 - x.iter().sum::<f64>();
        let d = lu.solve(&r);
        for i in 0..k {
            x[i] += d[i];
        }
    }
    let pi = StochasticVector::new(x.clone()).map_err(|_| {
        Error::NotErgodic("stationary solve produced an invalid distribution".into())
    })?;
    let ax = a.apply_raw(pi.probs());
    let residual: f64 = ax
        .iter()
        .zip(pi.probs())
        .map(|(u, v)| (u - v).abs())
        .sum();
    if residual > 1e-12 {
        return Err(Error::NoConvergence(3));
    }
    Ok(pi)
}

/// Dense LU with partial pivoting, row-major.
struct LuFactors {
    k: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn new(mut m: Vec<f64>, k: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..k).collect();
        for col in 0..k {
            let mut pivot = col;
            let mut best = m[perm[col] * k + col].abs();
            for r in col + 1..k {
                let v = m[perm[r] * k + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Err(Error::NotErgodic("singular stationary system".into()));
            }
            perm.swap(col, pivot);
            let prow = perm[col];
            for r in col + 1..k {
                let row = perm[r];
                let f = m[row * k + col] / m[prow * k + col];
                m[row * k + col] = f;
                for c in col + 1..k {
                    m[row * k + c] -= f * m[prow * k + c];
                }
            }
        }
        Ok(Self { k, lu: m, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut y = vec![0.0; k];
        for i in 0..k {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[self.perm[i] * k + j] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = y[i];
            for j in i + 1..k {
                s -= self.lu[self.perm[i] * k + j] * x[j];
            }
            x[i] = s / self.lu[self.perm[i] * k + i];
        }
        x
    }
}

/// The conditional `s`-th step distribution `A^{s-1} p`, computed by
/// repeated matrix-vector application.
pub fn step_law(a: &StochasticMatrix, p: &StochasticVector, s: usize) -> Result<StochasticVector> {
    if s == 0 {
        return Err(Error::InvalidArgument("step_law requires s >= 1".into()));
    }
    let mut cur = p.clone();
    for _ in 1..s {
        cur = a.apply(&cur)?;
    }
    Ok(cur)
}

/// The observation law `B p` induced by an emission kernel.
pub fn emit_law(b: &StochasticMatrix, p: &StochasticVector) -> Result<StochasticVector> {
    b.apply(p)
}

/// A Markov chain `(p₁, A)` or HMM `(p₁, A, B)`.
///
/// When `emission` is absent the chain is observed directly, i.e. treated
/// as an HMM with `B = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    initial: StochasticVector,
    transition: StochasticMatrix,
    emission: Option<StochasticMatrix>,
}

impl ChainSpec {
    pub fn new(
        initial: StochasticVector,
        transition: StochasticMatrix,
        emission: Option<StochasticMatrix>,
    ) -> Result<Self> {
        if !transition.is_square() {
            return Err(Error::InvalidKernel(format!(
                "transition kernel must be square, got {}x{}",
                transition.rows(),
                transition.cols()
            )));
        }
        let k = transition.rows();
        if initial.dim() != k {
            return Err(Error::DimensionMismatch(format!(
                "initial distribution has dimension {}, transition kernel is {k}x{k}",
                initial.dim()
            )));
        }
        if let Some(b) = &emission {
            if b.cols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "emission kernel has {} columns, expected {k}",
                    b.cols()
                )));
            }
        }
        Ok(Self {
            initial,
            transition,
            emission,
        })
    }

    pub fn markov(initial: StochasticVector, transition: StochasticMatrix) -> Result<Self> {
        Self::new(initial, transition, None)
    }

    pub fn state_count(&self) -> usize {
        self.transition.rows()
    }

    /// Size of the observation alphabet (`m` for HMMs, `k` otherwise).
    pub fn symbol_count(&self) -> usize {
        self.emission
            .as_ref()
            .map(|b| b.rows())
            .unwrap_or_else(|| self.state_count())
    }

    pub fn initial(&self) -> &StochasticVector {
        &self.initial
    }

    pub fn transition(&self) -> &StochasticMatrix {
        &self.transition
    }

    pub fn emission(&self) -> Option<&StochasticMatrix> {
        self.emission.as_ref()
    }

    /// Same chain with a different initial distribution.
    pub fn with_initial(&self, initial: StochasticVector) -> Result<Self> {
        Self::new(initial, self.transition.clone(), self.emission.clone())
    }

    /// The underlying Markov chain (emission dropped).
    pub fn underlying(&self) -> Self {
        Self {
            initial: self.initial.clone(),
            transition: self.transition.clone(),
            emission: None,
        }
    }

    /// Stationary law of the observed process: `ρ = Bπ` (or `π` itself).
    pub fn stationary_observation_law(&self) -> Result<StochasticVector> {
        let pi = stationary_distribution(&self.transition)?;
        match &self.emission {
            Some(b) => emit_law(b, &pi),
            None => Ok(pi),
        }
    }
}

/// A sampled trajectory. `hidden_states` is retained for HMM specs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub observations: Vec<usize>,
    pub hidden_states: Option<Vec<usize>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

fn sample_index(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Draw `X₁ ~ p₁`, `X_{i+1} ~ A(·|X_i)`, `Y_i ~ B(·|X_i)`.
/// Bit-reproducible given `(spec, n, seed)`.
pub fn sample_trajectory(spec: &ChainSpec, n: usize, seed: u64) -> Trajectory {
    assert!(n >= 1, "trajectory length must be at least 1");
    let mut rng = rng::base_rng(seed);
    sample_trajectory_with(spec, n, &mut rng)
}

/// Sampling against a caller-supplied stream; used for per-trial streams.
pub fn sample_trajectory_with(spec: &ChainSpec, n: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let a = spec.transition();
    let mut states = Vec::with_capacity(n);
    let mut x = sample_index(rng, spec.initial().probs());
    states.push(x);
    for _ in 1..n {
        x = sample_index(rng, a.column(x));
        states.push(x);
    }
    match spec.emission() {
        Some(b) => {
            let observations = states.iter().map(|&s| sample_index(rng, b.column(s))).collect();
            Trajectory {
                observations,
                hidden_states: Some(states),
            }
        }
        None => Trajectory {
            observations: states,
            hidden_states: None,
        },
    }
}

/// The exact law of the observed process `(Y₁, …, Yₙ)` over all `mⁿ`
/// trajectories, indexed big-endian (`Y₁` is the most significant digit).
#[derive(Debug, Clone)]
pub struct JointLaw {
    alphabet: usize,
    len: usize,
    probs: Vec<f64>,
}

impl JointLaw {
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, seq: &[usize]) -> usize {
        assert_eq!(seq.len(), self.len);
        seq.iter().fold(0, |acc, &y| acc * self.alphabet + y)
    }

    pub fn prob(&self, seq: &[usize]) -> f64 {
        self.probs[self.index_of(seq)]
    }

    /// Digits of trajectory `idx`, most significant first.
    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut seq = vec![0; self.len];
        for pos in (0..self.len).rev() {
            seq[pos] = idx % self.alphabet;
            idx /= self.alphabet;
        }
        seq
    }

    /// Marginal law of coordinate `pos` (0-based).
    pub fn marginal(&self, pos: usize) -> Vec<f64> {
        assert!(pos < self.len);
        let mut out = vec![0.0; self.alphabet];
        let stride = self.alphabet.pow((self.len - 1 - pos) as u32);
        for (idx, &p) in self.probs.iter().enumerate() {
            out[(idx / stride) % self.alphabet] += p;
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Exact joint law of `(Y₁, …, Yₙ)` by exhaustive enumeration with a
/// forward recursion over hidden states. Guarded at `mⁿ ≤ 10⁷` entries.
pub fn exact_joint_law(spec: &ChainSpec, n: usize) -> Result<JointLaw> {
    if n == 0 {
        return Err(Error::InvalidArgument("exact_joint_law requires n >= 1".into()));
    }
    let m = spec.symbol_count();
    let total = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard(format!(
            "{m}^{n} = {total} trajectories exceeds the {ENUMERATION_LIMIT} limit"
        )));
    }
    let k = spec.state_count();
    let a = spec.transition();
    let identity;
    let b = match spec.emission() {
        Some(b) => b,
        None => {
            identity = StochasticMatrix::identity(k);
            &identity
        }
    };
    let mut probs = vec![0.0; total as usize];
    // alpha[x] = P(Y_1..Y_pos = prefix, X_pos = x)
    let mut stack: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for y in (0..m).rev() {
        let alpha: Vec<f64> = (0..k).map(|x| spec.initial().get(x) * b.entry(y, x)).collect();
        stack.push((1, y, alpha));
    }
    while let Some((pos, idx, alpha)) = stack.pop() {
        if pos == n {
            probs[idx] = alpha.iter().sum();
            continue;
        }
        let beta = a.apply_raw(&alpha);
        for y in (0..m).rev() {
            let alpha_next: Vec<f64> = (0..k).map(|x| beta[x] * b.entry(y, x)).collect();
            stack.push((pos + 1, idx * m + y, alpha_next));
        }
    }
    Ok(JointLaw {
        alphabet: m,
        len: n,
        probs,
    })
}
