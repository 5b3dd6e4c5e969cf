//! Subcommands: `simulate`, `estimate`, `ci`, `rates`, `mc-study`.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ctspec_core::asymptotics::{confidence_interval, sigma_block};
use ctspec_core::estimator::EstimatorOptions;
use ctspec_core::kernels::kernel_b;
use ctspec_core::mcstudy::{McConfig, Statistic};
use ctspec_core::rates::{optimal_exponents, Exponent, RatePlan};
use ctspec_core::{FrequencyGrid, Kernel, MultichannelSamples, OuMixtureModel};
use rayon::ThreadPool;

use crate::config::{RateSettings, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{self as csvio, IntervalRow};
use crate::parallel::{self, THREADS_ENV};

#[derive(Debug, Parser)]
#[command(
    name = "ctspec",
    version,
    about = "Spectral estimation for sampled continuous-time processes"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (0 = all cores). Results do not depend on this value.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the bivariate OU-mixture process and write a samples CSV.
    Simulate(SimulateArgs),
    /// Estimate spectra and cross-spectra from a samples CSV.
    Estimate(EstimateArgs),
    /// Pointwise confidence intervals from an estimate CSV.
    Ci(CiArgs),
    /// Optimal rate exponents, the rate plan in use and its diagnostics.
    Rates(RatesArgs),
    /// Monte-Carlo normality screening and coverage study.
    McStudy(McStudyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RateArgs {
    /// Spectral decay order p (> 1), e.g. `2` or `3/2`.
    #[arg(long, value_parser = parse_exponent)]
    pub p: Option<Exponent>,
    /// Spectral smoothness order q (> 1).
    #[arg(long, value_parser = parse_exponent)]
    pub q: Option<Exponent>,
    #[arg(long)]
    pub bn_const: Option<f64>,
    #[arg(long, value_parser = parse_exponent, allow_hyphen_values = true)]
    pub bn_exp: Option<Exponent>,
    #[arg(long)]
    pub rho_const: Option<f64>,
    #[arg(long, value_parser = parse_exponent, allow_hyphen_values = true)]
    pub rho_exp: Option<Exponent>,
    /// Use b_n = n^(-1/4)/4 and rho_n = 4 n^(1/6).
    #[arg(long)]
    pub paper_rates: bool,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: ctspec_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    /// Sampling rate; defaults to the rate plan at n.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the default model parameters (ignores config and --beta/--alpha).
    #[arg(long, conflicts_with_all = ["beta", "alpha"])]
    pub model_default: bool,
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub beta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub alpha: Option<Vec<f64>>,
    #[command(flatten)]
    pub rates: RateArgs,
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Samples CSV with header ch1,ch2,...
    #[arg(long)]
    pub input: PathBuf,
    /// Sampling rate of the samples; defaults to the rate plan at n.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Kernel bandwidth; defaults to the rate plan at n.
    #[arg(long)]
    pub bn: Option<f64>,
    /// tukey-hanning, bartlett or rectangular.
    #[arg(long)]
    pub kernel: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Remove each channel's sample mean before estimating.
    #[arg(long)]
    pub subtract_mean: bool,
    #[command(flatten)]
    pub rates: RateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub freq_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub freq_max: Option<f64>,
    #[arg(long)]
    pub freq_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    /// Estimate CSV (lambda,pair,re,im).
    #[arg(long)]
    pub input: PathBuf,
    /// Sample count the estimate was computed from.
    #[arg(long)]
    pub n: usize,
    /// Bandwidth the estimate used; defaults to the rate plan at n.
    #[arg(long)]
    pub bn: Option<f64>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub level: Option<f64>,
    #[command(flatten)]
    pub rates: RateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub rates: RateArgs,
    /// Also evaluate b_n and rho_n at this n.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct McStudyArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// 200 replicates, 61 frequencies, n ≤ 10000 (default).
    #[arg(long, conflicts_with = "full")]
    pub desk: bool,
    /// 500 replicates, 301 frequencies.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<f64>,
    #[arg(long)]
    pub kernel: Option<String>,
    #[command(flatten)]
    pub rates: RateArgs,
}

/// Largest n accepted by the desk profile.
pub const DESK_MAX_N: usize = 10_000;

/// Study size used when neither flags nor config give one.
pub const DEFAULT_STUDY_N: usize = 10_000;

pub fn run(cli: Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let pool = parallel::thread_pool(cli.threads.or(config.threads))?;
    match cli.command {
        Command::Simulate(args) => simulate(&config, args),
        Command::Estimate(args) => estimate(&config, args, &pool),
        Command::Ci(args) => ci(&config, args),
        Command::Rates(args) => rates(&config, args),
        Command::McStudy(args) => mc_study(&config, args, &pool),
    }
}

fn rate_plan(config: &RunConfig, flags: &RateArgs, study_default: bool) -> CliResult<RatePlan> {
    let mut s = RateSettings::from_section(&config.rates)?;
    s.paper_rates |= flags.paper_rates;
    s.p = flags.p.or(s.p);
    s.q = flags.q.or(s.q);
    s.bn_const = flags.bn_const.or(s.bn_const);
    s.bn_exp = flags.bn_exp.or(s.bn_exp);
    s.rho_const = flags.rho_const.or(s.rho_const);
    s.rho_exp = flags.rho_exp.or(s.rho_exp);
    s.plan(study_default)
}

fn kernel(config: &RunConfig, flag: &Option<String>) -> CliResult<Kernel> {
    let name = flag
        .as_deref()
        .or(config.kernel.as_deref())
        .unwrap_or("tukey-hanning");
    Ok(Kernel::by_name(name)?)
}

fn output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| CliError::io(path, e))?,
    ))
}

fn warn_if_clamped(values: &ctspec_core::rates::RateValues) {
    if values.bn_clamped {
        eprintln!("warning: b_n clamped to 1");
    }
    if values.rho_clamped {
        eprintln!("warning: rho_n clamped to 1");
    }
}

fn simulate(config: &RunConfig, args: SimulateArgs) -> CliResult<()> {
    let model = if args.model_default {
        OuMixtureModel::default()
    } else {
        let base = config.model()?;
        let four = |v: Option<Vec<f64>>, fallback: [f64; 4]| -> CliResult<[f64; 4]> {
            match v {
                None => Ok(fallback),
                Some(v) => v.try_into().map_err(|_| {
                    CliError::Format("--beta/--alpha need exactly four values".into())
                }),
            }
        };
        OuMixtureModel::new(four(args.beta, base.beta)?, four(args.alpha, base.alpha)?)?
    };
    let rho = match args.rho {
        Some(r) => r,
        None => {
            let v = rate_plan(config, &args.rates, true)?.evaluate(args.n);
            warn_if_clamped(&v);
            v.rho_n
        }
    };
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let sim = model.simulate(args.n, rho, seed)?;
    csvio::write_samples(output(&args.out)?, &sim.samples)
}

fn frequency_grid(config: &RunConfig, args: &GridArgs) -> CliResult<FrequencyGrid> {
    let min = args.freq_min.or(config.grid.freq_min).unwrap_or(0.0);
    let max = args.freq_max.or(config.grid.freq_max).unwrap_or(3.0 * PI);
    let step = args
        .freq_step
        .or(config.grid.freq_step)
        .unwrap_or(0.01 * PI);
    Ok(FrequencyGrid::range(min, max, step)?)
}

fn estimate(config: &RunConfig, args: EstimateArgs, pool: &ThreadPool) -> CliResult<()> {
    let channels = csvio::read_channels(open(&args.input)?)?;
    let n = channels.first().map_or(0, Vec::len);
    let plan_values = || -> CliResult<_> {
        let v = rate_plan(config, &args.rates, false)?.evaluate(n);
        warn_if_clamped(&v);
        Ok(v)
    };
    let (rho, bn) = match (args.rho, args.bn) {
        (Some(r), Some(b)) => (r, b),
        (r, b) => {
            let v = plan_values()?;
            (r.unwrap_or(v.rho_n), b.unwrap_or(v.b_n))
        }
    };
    let samples = MultichannelSamples::new(channels, rho)?;
    let grid = frequency_grid(config, &args.grid)?;
    let kernel = kernel(config, &args.kernel)?;
    let options = EstimatorOptions {
        subtract_mean: args.subtract_mean,
    };
    let est = parallel::estimate(&samples, &kernel, bn, &grid, options, pool)?;
    csvio::write_estimate(output(&args.out)?, &est)
}

fn ci(config: &RunConfig, args: CiArgs) -> CliResult<()> {
    let table = csvio::read_estimate(open(&args.input)?)?;
    let bn = match args.bn {
        Some(b) => b,
        None => rate_plan(config, &args.rates, false)?.evaluate(args.n).b_n,
    };
    let b = kernel_b(&kernel(config, &args.kernel)?)?;
    let level = args.level.or(config.mc.level).unwrap_or(0.95);
    let mut rows = Vec::new();
    for (&lambda, m) in table.grid.values().iter().zip(&table.matrices) {
        let r = m.channels();
        for a1 in 0..r {
            for a2 in 0..r {
                let sigma = sigma_block(m, (a1, a2, a1, a2), lambda, lambda, b)?;
                let value = m.get(a1, a2)?;
                for (component, est, var) in
                    [("re", value.re, sigma.s11), ("im", value.im, sigma.s22)]
                {
                    // A negative plug-in variance has no interval.
                    let (lo, hi) = if var >= 0.0 {
                        confidence_interval(est, var, args.n, bn, level)?
                    } else {
                        (f64::NAN, f64::NAN)
                    };
                    rows.push(IntervalRow {
                        lambda,
                        pair: (a1, a2),
                        component,
                        lo,
                        hi,
                    });
                }
            }
        }
    }
    csvio::write_intervals(output(&args.out)?, &rows)
}

fn rates(config: &RunConfig, args: RatesArgs) -> CliResult<()> {
    let plan = rate_plan(config, &args.rates, false)?;
    let opt = optimal_exponents(plan.p, plan.q)?;
    let mut out = output(&None)?;
    let mut emit = |line: String| writeln!(out, "{line}").map_err(|e| CliError::io("stdout", e));
    emit(format!("bn_exponent={}", opt.bn_exponent))?;
    emit(format!("rho_exponent={}", opt.rho_exponent))?;
    emit(format!("rate_exponent={}", opt.rate_exponent))?;
    emit(format!(
        "plan: b_n = {} n^({}), rho_n = {} n^({}), p = {}, q = {}",
        plan.bn_constant, plan.bn_exponent, plan.rho_constant, plan.rho_exponent, plan.p, plan.q
    ))?;
    emit(format!("assumption3_holds={}", plan.assumption3_holds()))?;
    emit(format!("assumption4_holds={}", plan.assumption4_holds()))?;
    emit(format!("assumption4a_holds={}", plan.assumption4a_holds()))?;
    if let Some(n) = args.n {
        let v = plan.evaluate(n);
        emit(format!("b_n={}", v.b_n))?;
        emit(format!("rho_n={}", v.rho_n))?;
        if v.clamped() {
            emit("clamped=true".into())?;
        }
    }
    out.flush().map_err(|e| CliError::io("stdout", e))
}

fn mc_study(config: &RunConfig, args: McStudyArgs, pool: &ThreadPool) -> CliResult<()> {
    let full = args.full || (!args.desk && config.mc.profile.as_deref() == Some("full"));
    if let Some(p) = config.mc.profile.as_deref() {
        if p != "full" && p != "desk" {
            return Err(CliError::Format(format!(
                "mc.profile must be desk or full, got `{p}`"
            )));
        }
    }
    let n = args.n.or(config.mc.n).unwrap_or(DEFAULT_STUDY_N);
    if !full && n > DESK_MAX_N {
        return Err(CliError::Format(format!(
            "the desk profile is limited to n <= {DESK_MAX_N}; pass --full for n = {n}"
        )));
    }
    let mut cfg = if full {
        McConfig::full(n)
    } else {
        McConfig::desk(n)
    };
    cfg.replicates = args
        .replicates
        .or(config.mc.replicates)
        .unwrap_or(cfg.replicates);
    cfg.master_seed = args.seed.or(config.seed).unwrap_or(0);
    cfg.level = args.level.or(config.mc.level).unwrap_or(cfg.level);
    cfg.kernel = kernel(config, &args.kernel)?.name().to_string();
    cfg.rate_plan = rate_plan(config, &args.rates, true)?;
    let model = config.model()?;

    let report = parallel::run_study(&cfg, &model, pool)?;

    let dir = args
        .out_dir
        .or_else(|| config.mc.out_dir.clone())
        .unwrap_or_else(|| "mc-out".into());
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let file = |name: &str| -> CliResult<BufWriter<File>> {
        let path = dir.join(name);
        Ok(BufWriter::new(
            File::create(&path).map_err(|e| CliError::io(path, e))?,
        ))
    };
    csvio::write_ks(file("ks.csv")?, &report)?;
    csvio::write_coverage(file("coverage.csv")?, &report, false)?;
    csvio::write_coverage(file("anomaly_band.csv")?, &report, true)?;
    csvio::write_summary(file("summary.csv")?, &report)?;

    println!(
        "n={n} replicates={} frequencies={}",
        cfg.replicates,
        cfg.grid.len()
    );
    for stat in Statistic::ALL {
        let median =
            report.median_coverage(stat, ctspec_core::mcstudy::ANOMALY_BAND_EDGE, f64::INFINITY);
        println!(
            "{:<9} pct_p_above_05={:>5.1}  median_coverage={}",
            stat.label(),
            report.pct_p_above(stat, 0.05),
            median.map_or_else(|| "-".into(), |m| format!("{m:.3}"))
        );
    }
    Ok(())
}
