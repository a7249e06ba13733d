//! `mixbound`: mixing analysis, concentration bounds, and Monte Carlo
//! verification for finite Markov / hidden Markov chain specs.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixbound::bounds::{
    dkw_bound, hmm_concentration_bound, nonstationary_correction, uniform_chernoff_bound,
    BoundQuery,
};
use mixbound::empirics::{
    deviation_experiment, exact_lemma_suite, lipschitz_audit, ExperimentConfig, Statistic,
};
use mixbound::report::{deviation_report_csv, deviation_report_toml, DEVIATION_CSV_HEADER};
use mixbound::spec_file::load_chain_spec;
use mixbound::{
    contraction_coefficient, delta_2_norm, delta_inf_norm, delta_matrix, fit_ergodicity,
    stationary_distribution, Error, StochasticVector,
};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mixbound", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatisticArg {
    Sup,
    Tv,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::Sup => Statistic::SupNorm,
            StatisticArg::Tv => Statistic::TotalVariation,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Chain spec file (TOML)
    #[arg(long)]
    spec: std::path::PathBuf,

    /// Chain length
    #[arg(long, default_value_t = 1000)]
    n: usize,

    /// Fit horizon for the tau table and (G, theta)
    #[arg(long, default_value_t = 64)]
    horizon: usize,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Run from the spec's own initial distribution instead of pi,
    /// adding the additive TV(pi - pi') correction where applicable
    #[arg(long)]
    nonstationary: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Contraction coefficient, tau table, fitted (G, theta), Delta norms
    Mixing(MixingArgs),
    /// Evaluate the concentration / DKW / uniform Chernoff bounds on an eps grid
    Bounds(BoundsArgs),
    /// Monte Carlo deviation experiment against the bounds
    Simulate(SimulateArgs),
    /// Exact lemma suite and Hamming-Lipschitz audit
    Verify(VerifyArgs),
}

#[derive(Args)]
struct MixingArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Per-coordinate deviation scales
    #[arg(long = "eps", value_delimiter = ',', default_values_t = vec![0.02, 0.05, 0.1, 0.2])]
    epsilon_grid: Vec<f64>,

    /// Interpret --eps as absolute deviations t = n*eps and convert
    #[arg(long)]
    absolute: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,

    #[arg(long = "eps", value_delimiter = ',', default_values_t = vec![0.02, 0.05, 0.1, 0.2])]
    epsilon_grid: Vec<f64>,

    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = StatisticArg::Sup)]
    statistic: StatisticArg,

    /// Worker threads for trial partitioning (values are identical for any count)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional chain spec; random instances are generated when absent
    #[arg(long)]
    spec: Option<std::path::PathBuf>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of random instances for the lemma suite
    #[arg(long, default_value_t = 200)]
    instances: u64,

    /// Enumeration size guard
    #[arg(long, default_value_t = 10_000_000)]
    limit: u128,

    /// Random trajectory pairs for the Lipschitz audit
    #[arg(long, default_value_t = 10_000)]
    pairs: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Mixing(args) => cmd_mixing(&args),
        Command::Bounds(args) => cmd_bounds(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_mixing(args: &MixingArgs) -> Result<u8, Error> {
    let common = &args.common;
    let spec = load_chain_spec(&common.spec)?;
    let a = spec.transition();
    let kappa = contraction_coefficient(a);
    let constants = fit_ergodicity(a, common.horizon)?;
    let delta = delta_matrix(&constants, common.n);
    let inf = delta_inf_norm(&delta);
    let two = delta_2_norm(&delta)?;
    match common.format {
        Format::Text => {
            println!("kappa            = {kappa:.6}");
            println!("G                = {:.6}", constants.g());
            println!("theta            = {:.6}", constants.theta());
            if constants.short_horizon_warning {
                println!("warning: tau_{} has not dropped below tau_1/2; increase --horizon for a trustworthy fit", common.horizon);
            }
            println!("delta_inf_norm   = {inf:.6}   (n = {})", common.n);
            println!("delta_2_norm     = {two:.6}   (n = {})", common.n);
            println!("tau table (s, tau_s, G*theta^(s-1)):");
            for (s, &tau) in constants.tau_table().iter().enumerate() {
                println!("  {:3}  {:.9}  {:.9}", s + 1, tau, constants.envelope(s + 1));
            }
        }
        Format::Csv => {
            println!("s,tau");
            for (s, &tau) in constants.tau_table().iter().enumerate() {
                println!("{},{}", s + 1, tau);
            }
        }
        Format::Structured => {
            println!("kappa = {kappa}");
            println!("g = {}", constants.g());
            println!("theta = {}", constants.theta());
            println!("n = {}", common.n);
            println!("delta_inf_norm = {inf}");
            println!("delta_2_norm = {two}");
            println!("short_horizon_warning = {}", constants.short_horizon_warning);
            let taus: Vec<String> = constants
                .tau_table()
                .iter()
                .map(|t| t.to_string())
                .collect();
            println!("tau_table = [{}]", taus.join(", "));
        }
    }
    Ok(0)
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8, Error> {
    let common = &args.common;
    let spec = load_chain_spec(&common.spec)?;
    let constants = fit_ergodicity(spec.transition(), common.horizon)?;
    let rho = spec.stationary_observation_law()?;
    let n = common.n;
    let correction = if common.nonstationary {
        let pi = stationary_distribution(spec.transition())?;
        nonstationary_correction(&pi, spec.initial())?
    } else {
        0.0
    };
    let grid: Vec<f64> = if args.absolute {
        args.epsilon_grid.iter().map(|t| t / n as f64).collect()
    } else {
        args.epsilon_grid.clone()
    };
    if grid.is_empty() {
        return Err(Error::InvalidArgument("epsilon grid is empty".into()));
    }

    struct Row {
        eps: f64,
        t1: f64,
        dkw_thr: f64,
        dkw_tail: f64,
        lambda: mixbound::bounds::LambdaBreakdown,
        chernoff_tail: f64,
    }
    let rows: Vec<Row> = grid
        .iter()
        .map(|&eps| {
            let t1 = hmm_concentration_bound(&BoundQuery::new(n, eps, constants.clone()));
            let (dkw_thr, dkw_tail) = dkw_bound(&constants, n, eps);
            let (lambda, chern) = uniform_chernoff_bound(&rho, &constants, n, eps);
            Row {
                eps,
                t1: (t1.raw + correction).min(1.0),
                dkw_thr,
                dkw_tail: (dkw_tail.raw + correction).min(1.0),
                lambda,
                chernoff_tail: (chern.raw + correction).min(1.0),
            }
        })
        .collect();

    match common.format {
        Format::Text => {
            println!(
                "bounds for n = {n}, G = {:.6}, theta = {:.6}",
                constants.g(),
                constants.theta()
            );
            if common.nonstationary {
                println!("nonstationary correction TV(pi - pi') = {correction:.6}");
            }
            println!(
                "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
                "eps", "conc_tail", "dkw_thresh", "dkw_tail", "lambda_n", "chern_tail"
            );
            for r in &rows {
                println!(
                    "{:>8.4} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                    r.eps, r.t1, r.dkw_thr, r.dkw_tail, r.lambda.lambda, r.chernoff_tail
                );
            }
            let l = &rows[0].lambda;
            println!(
                "lambda breakdown: gamma_n = {:.6}, heavy = {:.6}, light_sqrt = {:.6}, light_mass = {:.6}",
                l.gamma_n, l.heavy_sum, l.light_sqrt_sum, l.light_mass_sum
            );
        }
        Format::Csv => {
            println!(
                "epsilon,concentration_tail,dkw_threshold,dkw_tail,gamma_n,lambda_heavy,lambda_light_sqrt,lambda_light_mass,lambda,chernoff_tail,correction"
            );
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.eps,
                    r.t1,
                    r.dkw_thr,
                    r.dkw_tail,
                    r.lambda.gamma_n,
                    r.lambda.heavy_sum,
                    r.lambda.light_sqrt_sum,
                    r.lambda.light_mass_sum,
                    r.lambda.lambda,
                    r.chernoff_tail,
                    correction
                );
            }
        }
        Format::Structured => {
            println!("n = {n}");
            println!("g = {}", constants.g());
            println!("theta = {}", constants.theta());
            println!("correction = {correction}");
            for r in &rows {
                println!();
                println!("[[rows]]");
                println!("epsilon = {}", r.eps);
                println!("concentration_tail = {}", r.t1);
                println!("dkw_threshold = {}", r.dkw_thr);
                println!("dkw_tail = {}", r.dkw_tail);
                println!("lambda = {}", r.lambda.lambda);
                println!("chernoff_tail = {}", r.chernoff_tail);
            }
        }
    }
    Ok(0)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8, Error> {
    let common = &args.common;
    let spec = load_chain_spec(&common.spec)?;
    let constants = fit_ergodicity(spec.transition(), common.horizon)?;
    let spec_id = common
        .spec
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "chain".into());
    let cfg = ExperimentConfig {
        spec_id,
        n: common.n,
        trials: args.trials,
        seed: args.seed,
        statistic: args.statistic.into(),
        epsilon_grid: args.epsilon_grid.clone(),
        stationary: !common.nonstationary,
        threads: args.threads,
    };
    let report = deviation_experiment(&spec, &constants, &cfg)?;
    match common.format {
        Format::Text => {
            println!(
                "deviation experiment: spec = {}, n = {}, trials = {}, seed = {}, statistic = {}",
                report.spec_id, report.n, report.trials, report.seed, report.statistic
            );
            if !report.stationary {
                println!("nonstationary start; bound includes correction {:.6}", report.correction);
            }
            println!("{}", DEVIATION_CSV_HEADER.replace(',', "  "));
            for r in &report.rows {
                println!(
                    "{:.4}  {:.6}  {:.6}  {:.6}  {:.6}  {}",
                    r.epsilon, r.threshold, r.empirical_frequency, r.mc_halfwidth, r.bound, r.satisfied
                );
            }
        }
        Format::Csv => print!("{}", deviation_report_csv(&report)),
        Format::Structured => print!("{}", deviation_report_toml(&report)?),
    }
    Ok(if report.all_satisfied() { 0 } else { 1 })
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Error> {
    // a supplied spec contributes its stationary observation law to the audit
    let audit_rho: StochasticVector = match &args.spec {
        Some(path) => load_chain_spec(path)?.stationary_observation_law()?,
        None => StochasticVector::new(vec![0.4, 0.25, 0.2, 0.1, 0.05]).expect("static"),
    };
    let suite = exact_lemma_suite(args.instances, args.seed, args.limit)?;
    let mut all_pass = true;
    for check in &suite.checks {
        let status = if check.passed() { "pass" } else { "FAIL" };
        all_pass &= check.passed();
        print!(
            "{status}  {:<28} checks = {:<6} max violation = {:+.3e}",
            check.name, check.checks, check.max_violation
        );
        if check.failing_seeds.is_empty() {
            println!();
        } else {
            println!("  failing seeds: {:?}", check.failing_seeds);
        }
    }
    let (g_ratio, h_ratio) = lipschitz_audit(&audit_rho, 50, args.pairs, args.seed)?;
    let g_ok = g_ratio <= 1.0;
    let h_ok = h_ratio <= 2.0;
    all_pass &= g_ok && h_ok;
    println!(
        "{}  lipschitz_audit_g            max ratio = {g_ratio:.6} (<= 1)",
        if g_ok { "pass" } else { "FAIL" }
    );
    println!(
        "{}  lipschitz_audit_h            max ratio = {h_ratio:.6} (<= 2)",
        if h_ok { "pass" } else { "FAIL" }
    );
    Ok(if all_pass { 0 } else { 1 })
}
