//! Monte-Carlo validation of the limiting normal law.
//!
//! Each replicate simulates the OU mixture, estimates the 2×2 spectral
//! matrix on a frequency grid and forms the normalized statistics `T1..T4`
//! (true spectra in numerators, the replicate's own plug-in spectra in the
//! denominators). Per frequency and statistic the replicate values are then
//! screened against N(0, 1) with a one-sample Kolmogorov–Smirnov test, and
//! interval coverage is the fraction of valid replicates with `|T| ≤ z`.
//!
//! [`run_study`] is the serial driver. The pieces it is built from,
//! [`replicate_statistics`] and [`summarize`], are public so a parallel
//! driver can map replicates in any order and still reduce in replicate
//! order, giving bit-identical reports.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::asymptotics::{critical_value, normalized_stats};
use crate::error::{invalid, Error, Result};
use crate::estimator::{estimate_cross_spectrum, FrequencyGrid};
use crate::kernels::Kernel;
use crate::numeric::normal_cdf;
use crate::rates::RatePlan;
use crate::simmodel::OuMixtureModel;

/// Frequencies below this edge form the near-zero anomaly band, where the
/// discontinuity of the limiting variance at `λ = 0` depresses coverage.
pub const ANOMALY_BAND_EDGE: f64 = 0.15 * PI;

/// The four normalized statistics of the bivariate study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Phi11,
    Phi22,
    RePhi12,
    ImPhi12,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [
        Statistic::Phi11,
        Statistic::Phi22,
        Statistic::RePhi12,
        Statistic::ImPhi12,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Label used in CSV outputs.
    pub fn label(self) -> &'static str {
        match self {
            Statistic::Phi11 => "phi11",
            Statistic::Phi22 => "phi22",
            Statistic::RePhi12 => "re_phi12",
            Statistic::ImPhi12 => "im_phi12",
        }
    }
}

/// Kolmogorov–Smirnov distance between the sample's empirical distribution
/// and the standard normal.
pub fn ks_statistic(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(invalid("KS statistic of an empty sample"));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(invalid("KS sample must be finite"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let cdf = normal_cdf(x);
        let above = (i + 1) as f64 / r - cdf;
        let below = cdf - i as f64 / r;
        d.max(above).max(below)
    });
    Ok(d)
}

/// Asymptotic p-value `2 Σ_{k≥1} (-1)^{k-1} e^{-2k² R D²}`, clamped to `[0, 1]`.
pub fn ks_pvalue(d: f64, r: usize) -> f64 {
    let t2 = r as f64 * d * d;
    // The Kolmogorov distribution function is below 1e-40 here.
    if !(t2 >= 0.01) {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100_000_u32 {
        let k = f64::from(k);
        let term = libm::exp(-2.0 * k * k * t2);
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Empirical joint cumulant of `k ≤ 6` equally long series: the
/// moment-to-cumulant sum over all set partitions with sample means in
/// place of expectations.
pub fn joint_cumulant(data: &[&[f64]]) -> Result<f64> {
    let k = data.len();
    if k == 0 || k > 6 {
        return Err(invalid("joint cumulant order must be between 1 and 6"));
    }
    let len = data[0].len();
    if len == 0 {
        return Err(invalid("joint cumulant of empty series"));
    }
    if data.iter().any(|d| d.len() != len) {
        return Err(invalid("joint cumulant series must have equal lengths"));
    }
    // Sample mean of Π_{j ∈ mask} Y_j for every non-empty subset.
    let mut subset_means = alloc::vec![0.0; 1 << k];
    for (mask, slot) in subset_means.iter_mut().enumerate().skip(1) {
        let total: f64 = (0..len)
            .map(|t| {
                (0..k)
                    .filter(|j| mask & (1 << j) != 0)
                    .map(|j| data[j][t])
                    .product::<f64>()
            })
            .sum();
        *slot = total / len as f64;
    }
    let mut cumulant = 0.0;
    for_each_partition(k, |blocks| {
        let p = blocks.len();
        let sign = if p % 2 == 1 { 1.0 } else { -1.0 };
        let factorial: f64 = (1..p).map(|i| i as f64).product();
        let product: f64 = blocks.iter().map(|&mask| subset_means[mask]).product();
        cumulant += sign * factorial * product;
    });
    Ok(cumulant)
}

/// Calls `visit` with the block bitmasks of every set partition of
/// `{0, …, k-1}`, enumerated as restricted growth strings.
fn for_each_partition(k: usize, mut visit: impl FnMut(&[usize])) {
    fn recurse(i: usize, k: usize, blocks: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if i == k {
            visit(blocks);
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= 1 << i;
            recurse(i + 1, k, blocks, visit);
            blocks[b] &= !(1 << i);
        }
        blocks.push(1 << i);
        recurse(i + 1, k, blocks, visit);
        blocks.pop();
    }
    recurse(0, k, &mut Vec::with_capacity(k), &mut visit);
}

/// Configuration of a Monte-Carlo study.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n: usize,
    pub replicates: usize,
    pub grid: FrequencyGrid,
    pub rate_plan: RatePlan,
    pub kernel: String,
    pub master_seed: u64,
    pub level: f64,
}

impl McConfig {
    /// Desk-scale profile: 200 replicates, 61 frequencies over `[0, 3π]`.
    pub fn desk(n: usize) -> Self {
        Self::with_profile(n, 200, 61)
    }

    /// Full profile: 500 replicates, 301 frequencies over `[0, 3π]` (step `0.01π`).
    pub fn full(n: usize) -> Self {
        Self::with_profile(n, 500, 301)
    }

    fn with_profile(n: usize, replicates: usize, points: usize) -> Self {
        Self {
            n,
            replicates,
            grid: FrequencyGrid::zero_to_three_pi(points).unwrap_or_default(),
            rate_plan: RatePlan::study_default(),
            kernel: String::from("tukey-hanning"),
            master_seed: 0,
            level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.replicates < 2 {
            return Err(invalid("at least two replicates are required"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid("confidence level must lie in (0, 1)"));
        }
        self.rate_plan.validate()?;
        Kernel::by_name(&self.kernel)?;
        Ok(())
    }
}

/// `T1..T4` of one replicate at every grid frequency.
pub type ReplicateStats = Vec<[Option<f64>; 4]>;

/// Simulates replicate `index` (ChaCha8 stream `index` under the master
/// seed) and returns its normalized statistics on the config grid.
pub fn replicate_statistics(
    cfg: &McConfig,
    model: &OuMixtureModel,
    kernel: &Kernel,
    index: u64,
) -> Result<ReplicateStats> {
    let wrap = |e: Error| Error::Replicate {
        index,
        source: Box::new(e),
    };
    let rates = cfg.rate_plan.evaluate(cfg.n);
    let sim = model
        .simulate_stream(cfg.n, rates.rho_n, cfg.master_seed, index)
        .map_err(wrap)?;
    let est = estimate_cross_spectrum(&sim.samples, kernel, rates.b_n, &cfg.grid).map_err(wrap)?;
    let b = est.meta().b_constant;
    cfg.grid
        .values()
        .iter()
        .zip(est.matrices())
        .map(|(&lambda, plug_in)| {
            let truth = model.true_spectrum(lambda);
            normalized_stats(plug_in, &truth, lambda, cfg.n, rates.b_n, b).map(|t| t.as_array())
        })
        .collect::<Result<_>>()
        .map_err(wrap)
}

/// Screening and coverage of one statistic at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatSummary {
    /// KS distance over the valid replicates; `None` if there are none.
    pub ks_d: Option<f64>,
    pub p_value: Option<f64>,
    /// Fraction of valid replicates with `|T| ≤ z_{(1+level)/2}`.
    pub coverage: Option<f64>,
    pub valid_count: usize,
    pub invalid_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySummary {
    pub lambda: f64,
    pub stats: [StatSummary; 4],
}

impl FrequencySummary {
    pub fn in_anomaly_band(&self) -> bool {
        self.lambda < ANOMALY_BAND_EDGE
    }
}

/// Per-frequency KS screening and coverage, plus aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub replicates: usize,
    pub level: f64,
    pub frequencies: Vec<FrequencySummary>,
}

impl McReport {
    /// Percentage of frequencies whose KS p-value exceeds `alpha`, among
    /// frequencies where the statistic is defined.
    pub fn pct_p_above(&self, stat: Statistic, alpha: f64) -> f64 {
        let ps: Vec<f64> = self
            .frequencies
            .iter()
            .filter_map(|f| f.stats[stat.index()].p_value)
            .collect();
        if ps.is_empty() {
            return 0.0;
        }
        100.0 * ps.iter().filter(|&&p| p > alpha).count() as f64 / ps.len() as f64
    }

    /// Median coverage over frequencies in `[lo, hi]`.
    pub fn median_coverage(&self, stat: Statistic, lo: f64, hi: f64) -> Option<f64> {
        let mut c: Vec<f64> = self
            .frequencies
            .iter()
            .filter(|f| f.lambda >= lo && f.lambda <= hi)
            .filter_map(|f| f.stats[stat.index()].coverage)
            .collect();
        if c.is_empty() {
            return None;
        }
        c.sort_unstable_by(f64::total_cmp);
        let m = c.len() / 2;
        Some(if c.len() % 2 == 1 {
            c[m]
        } else {
            0.5 * (c[m - 1] + c[m])
        })
    }

    pub fn anomaly_band(&self) -> impl Iterator<Item = &FrequencySummary> {
        self.frequencies.iter().filter(|f| f.in_anomaly_band())
    }
}

/// Reduces per-replicate statistics (in replicate order) to a report.
pub fn summarize(
    grid: &FrequencyGrid,
    replicates: &[ReplicateStats],
    level: f64,
) -> Result<McReport> {
    let z = critical_value(level)?;
    if replicates.iter().any(|r| r.len() != grid.len()) {
        return Err(invalid("replicate statistics do not match the grid"));
    }
    let mut frequencies = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(replicates.len());
    for (i, &lambda) in grid.values().iter().enumerate() {
        let mut stats = [StatSummary {
            ks_d: None,
            p_value: None,
            coverage: None,
            valid_count: 0,
            invalid_count: 0,
        }; 4];
        for (s, summary) in stats.iter_mut().enumerate() {
            values.clear();
            values.extend(replicates.iter().filter_map(|r| r[i][s]));
            summary.valid_count = values.len();
            summary.invalid_count = replicates.len() - values.len();
            if !values.is_empty() {
                let d = ks_statistic(&values)?;
                summary.ks_d = Some(d);
                summary.p_value = Some(ks_pvalue(d, values.len()));
                let covered = values.iter().filter(|t| libm::fabs(**t) <= z).count();
                summary.coverage = Some(covered as f64 / values.len() as f64);
            }
        }
        frequencies.push(FrequencySummary { lambda, stats });
    }
    Ok(McReport {
        replicates: replicates.len(),
        level,
        frequencies,
    })
}

/// Runs the study serially, replicate by replicate.
pub fn run_study(cfg: &McConfig, model: &OuMixtureModel) -> Result<McReport> {
    cfg.validate()?;
    let kernel = Kernel::by_name(&cfg.kernel)?;
    let per_replicate = (0..cfg.replicates as u64)
        .map(|i| replicate_statistics(cfg, model, &kernel, i))
        .collect::<Result<Vec<_>>>()?;
    summarize(&cfg.grid, &per_replicate, cfg.level)
}
