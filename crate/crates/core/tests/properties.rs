//! Cross-cutting invariants checked on randomized inputs: metric axioms,
//! conservation of probability, agreement between independent computation
//! routes, and monotonicity of the closed-form bounds.

use mixbound::bounds::{gamma_n, lambda_n, master_bound};
use mixbound::chain::StochasticVector;
use mixbound::empirics::{empirical_distribution, subset_sup, tv_stat};
use mixbound::mixing::{delta_1_norm, ErgodicityConstants};
use mixbound::{
    check_ergodic, contraction_coefficient, delta_2_norm, delta_inf_norm, delta_matrix, emit_law,
    exact_joint_law, fit_ergodicity, sample_trajectory, stationary_distribution, step_law,
    tv_distance, ChainSpec, StochasticMatrix,
};
use proptest::prelude::*;
use rand::Rng;

fn random_vector(rng: &mut rand_chacha::ChaCha8Rng, k: usize, floor: f64) -> StochasticVector {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + floor).collect();
    let sum: f64 = raw.iter().sum();
    StochasticVector::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
}

fn random_kernel(rng: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> StochasticMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..cols {
        data.extend_from_slice(random_vector(rng, rows, 0.05).probs());
    }
    StochasticMatrix::from_column_major(rows, cols, data).unwrap()
}

fn prob_vec(k: usize) -> impl Strategy<Value = StochasticVector> {
    proptest::collection::vec(1e-3..1.0f64, k).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        StochasticVector::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn tv_is_a_metric(p in prob_vec(5), q in prob_vec(5), r in prob_vec(5)) {
        let pq = tv_distance(&p, &q).unwrap();
        let qp = tv_distance(&q, &p).unwrap();
        let pr = tv_distance(&p, &r).unwrap();
        let rq = tv_distance(&r, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((pq - qp).abs() < 1e-15);
        prop_assert!(tv_distance(&p, &p).unwrap() == 0.0);
        // triangle inequality
        prop_assert!(pq <= pr + rq + 1e-12);
    }

    #[test]
    fn kernel_application_conserves_probability(p in prob_vec(4), seed in any::<u64>()) {
        let mut rng = mixbound::rng::base_rng(seed);
        let a = random_kernel(&mut rng, 4, 4);
        let out = a.apply(&p).unwrap();
        let sum: f64 = out.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(out.probs().iter().all(|&v| v >= 0.0));
        // applying a kernel contracts TV by at most the contraction coefficient
        let q = StochasticVector::uniform(4);
        let kappa = contraction_coefficient(&a);
        let before = tv_distance(&p, &q).unwrap();
        let after = tv_distance(&a.apply(&p).unwrap(), &a.apply(&q).unwrap()).unwrap();
        prop_assert!(after <= kappa * before + 1e-12);
    }

    #[test]
    fn tv_stat_matches_exhaustive_subsets(rho in prob_vec(6), obs in proptest::collection::vec(0..6usize, 1..40)) {
        let t = mixbound::Trajectory { observations: obs, hidden_states: None };
        let e = empirical_distribution(&t, 6);
        let direct = tv_stat(&e, &rho).unwrap();
        let brute = subset_sup(&e, &rho).unwrap();
        prop_assert!((direct - brute).abs() < 1e-12);
    }
}

#[test]
fn contraction_is_submultiplicative() {
    for seed in 0..200u64 {
        let mut rng = mixbound::rng::base_rng(seed);
        let k = 2 + (seed % 3) as usize;
        let a = random_kernel(&mut rng, k, k);
        let b = random_kernel(&mut rng, k, k);
        let ka = contraction_coefficient(&a);
        let kb = contraction_coefficient(&b);
        let kab = contraction_coefficient(&a.compose(&b).unwrap());
        assert!(kab <= ka * kb + 1e-12, "seed {seed}: {kab} > {ka}*{kb}");
        assert!((0.0..=1.0).contains(&ka));
    }
}

#[test]
fn stationary_distribution_is_a_fixed_point() {
    for seed in 0..200u64 {
        let mut rng = mixbound::rng::base_rng(seed ^ 0x5151);
        let k = 2 + (seed % 4) as usize;
        let a = random_kernel(&mut rng, k, k);
        assert!(check_ergodic(&a));
        let pi = stationary_distribution(&a).unwrap();
        let api = a.apply(&pi).unwrap();
        assert!(tv_distance(&pi, &api).unwrap() < 1e-12, "seed {seed}");
    }
}

#[test]
fn fitted_constants_dominate_the_tau_table() {
    for seed in 0..100u64 {
        let mut rng = mixbound::rng::base_rng(seed ^ 0xF17);
        let k = 2 + (seed % 3) as usize;
        let a = random_kernel(&mut rng, k, k);
        let c = fit_ergodicity(&a, 40).unwrap();
        assert!(c.g() >= 1.0);
        assert!((0.0..1.0).contains(&c.theta()));
        for (s, &tau) in c.tau_table().iter().enumerate() {
            assert!(
                tau <= c.envelope(s + 1) + 1e-12,
                "seed {seed}: tau_{} = {tau} > envelope {}",
                s + 1,
                c.envelope(s + 1)
            );
        }
    }
}

#[test]
fn joint_law_marginals_match_the_step_law() {
    for seed in 0..50u64 {
        let mut rng = mixbound::rng::base_rng(seed ^ 0x10E);
        let k = 2 + (seed % 3) as usize;
        let m = 2 + (seed % 2) as usize;
        let n = 2 + (seed % 4) as usize;
        let a = random_kernel(&mut rng, k, k);
        let b = random_kernel(&mut rng, m, k);
        let xi = random_vector(&mut rng, k, 0.0);
        let spec = ChainSpec::new(xi.clone(), a.clone(), Some(b.clone())).unwrap();
        let law = exact_joint_law(&spec, n).unwrap();
        assert!((law.total() - 1.0).abs() < 1e-12);
        for pos in 0..n {
            let marginal = law.marginal(pos);
            let expect = emit_law(&b, &step_law(&a, &xi, pos + 1).unwrap()).unwrap();
            for (y, &p) in marginal.iter().enumerate() {
                assert!(
                    (p - expect.get(y)).abs() < 1e-12,
                    "seed {seed} pos {pos} symbol {y}"
                );
            }
        }
    }
}

#[test]
fn sampling_frequencies_match_the_exact_law() {
    // 2-state / 2-symbol HMM, n = 3: compare each sequence frequency over
    // 100k trajectories with its exact probability, to 5 standard errors
    let mut rng = mixbound::rng::base_rng(99);
    let a = random_kernel(&mut rng, 2, 2);
    let b = random_kernel(&mut rng, 2, 2);
    let xi = random_vector(&mut rng, 2, 0.0);
    let spec = ChainSpec::new(xi, a, Some(b)).unwrap();
    let n = 3;
    let law = exact_joint_law(&spec, n).unwrap();
    let reps: u64 = 100_000;
    let mut counts = vec![0u64; law.probs().len()];
    for trial in 0..reps {
        let t = sample_trajectory(&spec, n, mixbound::rng::derive_seed(7, trial));
        counts[law.index_of(&t.observations)] += 1;
    }
    for (idx, &p) in law.probs().iter().enumerate() {
        let freq = counts[idx] as f64 / reps as f64;
        let se = (p * (1.0 - p) / reps as f64).sqrt().max(1e-9);
        assert!(
            (freq - p).abs() <= 5.0 * se,
            "sequence {:?}: freq {freq} vs exact {p}",
            law.decode(idx)
        );
    }
}

#[test]
fn delta_norm_relations() {
    for &(g, theta) in &[(1.0, 0.0), (1.0, 0.7), (1.5, 0.5), (2.0, 0.9)] {
        let c = ErgodicityConstants::from_constants(g, theta).unwrap();
        for &n in &[1usize, 2, 5, 20, 60] {
            let d = delta_matrix(&c, n);
            let inf = delta_inf_norm(&d);
            let one = delta_1_norm(&d);
            let two = delta_2_norm(&d).unwrap();
            // unit diagonal forces every operator norm to be at least 1
            assert!(inf >= 1.0 && one >= 1.0 && two >= 1.0 - 1e-10);
            // Riesz-Thorin interpolation between the 1- and inf-norms
            assert!(two <= (one * inf).sqrt() + 1e-9, "g={g} theta={theta} n={n}");
            // entries capped at 1, so no norm exceeds n
            assert!(inf <= n as f64 + 1e-12);
            // geometric rows: inf norm below the full geometric series
            if theta < 1.0 {
                assert!(inf <= 1.0 + 2.0 * g * theta / (1.0 - theta) + 1e-12);
            }
        }
    }
}

#[test]
fn bounds_are_monotone() {
    let c = ErgodicityConstants::from_constants(1.2, 0.6).unwrap();
    // tail decreasing in epsilon and in n
    let mut prev = f64::INFINITY;
    for &eps in &[0.01, 0.05, 0.1, 0.3] {
        let q = mixbound::bounds::BoundQuery::new(500, eps, c.clone());
        let tail = mixbound::bounds::hmm_concentration_bound(&q).raw;
        assert!(tail < prev);
        prev = tail;
    }
    // gamma_n shrinks with n
    let mut prev_gamma = f64::INFINITY;
    for &n in &[10usize, 100, 1000, 10_000] {
        let g = gamma_n(&c, n);
        assert!(g < prev_gamma);
        prev_gamma = g;
    }
    // master bound shrinks with n (Delta matrix is dense, so keep n modest)
    let mut prev_master = f64::INFINITY;
    for &n in &[10usize, 40, 160] {
        let d = delta_matrix(&c, n);
        let m = master_bound(delta_inf_norm(&d), delta_2_norm(&d).unwrap(), n, 0.05).raw;
        assert!(m < prev_master);
        prev_master = m;
    }
    // lambda_n decreasing in n for a fixed law
    let rho = StochasticVector::new(vec![0.5, 0.3, 0.15, 0.05]).unwrap();
    let mut prev_lambda = f64::INFINITY;
    for &n in &[10usize, 100, 1000] {
        let l = lambda_n(&rho, &c, n).lambda;
        assert!(l < prev_lambda);
        prev_lambda = l;
    }
}
