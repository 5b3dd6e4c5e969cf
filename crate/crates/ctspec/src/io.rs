//! CSV formats.
//!
//! | file | header |
//! |------|--------|
//! | samples | `ch1,ch2,...` (one column per channel, 17 significant digits) |
//! | estimate | `lambda,pair,re,im` (pair is `a1-a2`, 1-based) |
//! | intervals | `lambda,pair,component,lo,hi` |
//! | `ks.csv` | `lambda,stat,D,pvalue` |
//! | `coverage.csv`, `anomaly_band.csv` | `lambda,stat,coverage,invalid_count` |
//! | `summary.csv` | `stat,pct_p_above_05` |
//!
//! Undefined values are written as empty fields.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use ctspec_core::mcstudy::{McReport, Statistic};
use ctspec_core::{
    Complex64, FrequencyGrid, MultichannelSamples, SpectralEstimate, SpectralMatrix,
};

use crate::error::{CliError, CliResult};

fn sample_text(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_text(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_samples<W: Write>(out: W, samples: &MultichannelSamples) -> CliResult<()> {
    let ctx = "writing samples";
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=samples.channel_count())
        .map(|a| format!("ch{a}"))
        .collect();
    w.write_record(&header).map_err(|e| CliError::csv(ctx, e))?;
    for t in 0..samples.len() {
        let row = samples.channels().iter().map(|c| sample_text(c[t]));
        w.write_record(row).map_err(|e| CliError::csv(ctx, e))?;
    }
    w.flush().map_err(|e| CliError::csv(ctx, e.into()))
}

/// Reads a samples CSV; the header must be `ch1,…,chR` in order.
pub fn read_samples<R: Read>(input: R, rho_n: f64) -> CliResult<MultichannelSamples> {
    Ok(MultichannelSamples::new(read_channels(input)?, rho_n)?)
}

/// Raw channel columns of a samples CSV.
pub fn read_channels<R: Read>(input: R) -> CliResult<Vec<Vec<f64>>> {
    let ctx = "reading samples";
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r.headers().map_err(|e| CliError::csv(ctx, e))?.clone();
    for (i, name) in header.iter().enumerate() {
        if name != format!("ch{}", i + 1) {
            return Err(CliError::Format(format!(
                "samples header column {} is `{name}`, expected `ch{}`",
                i + 1,
                i + 1
            )));
        }
    }
    let mut channels = vec![Vec::new(); header.len()];
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| CliError::csv(ctx, e))?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Format(format!(
                    "samples row {}: `{field}` is not a number",
                    line + 1
                ))
            })?;
            channels[c].push(v);
        }
    }
    Ok(channels)
}

pub fn pair_label(a1: usize, a2: usize) -> String {
    format!("{}-{}", a1 + 1, a2 + 1)
}

fn parse_pair(label: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Format(format!("pair `{label}` is not of the form a1-a2"));
    let (a, b) = label.split_once('-').ok_or_else(bad)?;
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a - 1, b - 1))
}

pub fn write_estimate<W: Write>(out: W, est: &SpectralEstimate) -> CliResult<()> {
    let ctx = "writing estimate";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "pair", "re", "im"])
        .map_err(|e| CliError::csv(ctx, e))?;
    let r = est.channel_count();
    for (&lambda, m) in est.grid().values().iter().zip(est.matrices()) {
        for a1 in 0..r {
            for a2 in 0..r {
                let v = m.get(a1, a2)?;
                w.write_record([
                    lambda.to_string(),
                    pair_label(a1, a2),
                    v.re.to_string(),
                    v.im.to_string(),
                ])
                .map_err(|e| CliError::csv(ctx, e))?;
            }
        }
    }
    w.flush().map_err(|e| CliError::csv(ctx, e.into()))
}

/// Spectral matrices read back from an estimate CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateTable {
    pub grid: FrequencyGrid,
    pub matrices: Vec<SpectralMatrix>,
}

type PairValue = ((usize, usize), Complex64);

pub fn read_estimate<R: Read>(input: R) -> CliResult<EstimateTable> {
    let ctx = "reading estimate";
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = r.headers().map_err(|e| CliError::csv(ctx, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["lambda", "pair", "re", "im"] {
        return Err(CliError::Format(
            "estimate header must be lambda,pair,re,im".into(),
        ));
    }
    let number = |s: &str| -> CliResult<f64> {
        s.parse()
            .map_err(|_| CliError::Format(format!("`{s}` is not a number")))
    };
    // Keyed by the bit pattern of λ to keep exact grid values.
    let mut rows: BTreeMap<u64, Vec<PairValue>> = BTreeMap::new();
    let mut channels = 0;
    for record in r.records() {
        let record = record.map_err(|e| CliError::csv(ctx, e))?;
        let lambda = number(&record[0])?;
        let pair = parse_pair(&record[1])?;
        channels = channels.max(pair.0 + 1).max(pair.1 + 1);
        let value = Complex64::new(number(&record[2])?, number(&record[3])?);
        rows.entry(lambda.to_bits())
            .or_default()
            .push((pair, value));
    }
    let mut grid_values: Vec<f64> = rows.keys().map(|&k| f64::from_bits(k)).collect();
    grid_values.sort_by(f64::total_cmp);
    let mut matrices = Vec::with_capacity(grid_values.len());
    for lambda in &grid_values {
        let entries = &rows[&lambda.to_bits()];
        if entries.len() != channels * channels {
            return Err(CliError::Format(format!(
                "frequency {lambda}: expected {} pairs, found {}",
                channels * channels,
                entries.len()
            )));
        }
        let mut m = SpectralMatrix::zeros(channels);
        for &((a1, a2), v) in entries {
            m.set(a1, a2, v)?;
        }
        matrices.push(m);
    }
    Ok(EstimateTable {
        grid: FrequencyGrid::new(grid_values)?,
        matrices,
    })
}

/// One row of the interval CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRow {
    pub lambda: f64,
    pub pair: (usize, usize),
    pub component: &'static str,
    pub lo: f64,
    pub hi: f64,
}

pub fn write_intervals<W: Write>(out: W, rows: &[IntervalRow]) -> CliResult<()> {
    let ctx = "writing intervals";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "pair", "component", "lo", "hi"])
        .map_err(|e| CliError::csv(ctx, e))?;
    for row in rows {
        w.write_record([
            row.lambda.to_string(),
            pair_label(row.pair.0, row.pair.1),
            row.component.to_string(),
            row.lo.to_string(),
            row.hi.to_string(),
        ])
        .map_err(|e| CliError::csv(ctx, e))?;
    }
    w.flush().map_err(|e| CliError::csv(ctx, e.into()))
}

pub fn write_ks<W: Write>(out: W, report: &McReport) -> CliResult<()> {
    let ctx = "writing ks.csv";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "stat", "D", "pvalue"])
        .map_err(|e| CliError::csv(ctx, e))?;
    for f in &report.frequencies {
        for stat in Statistic::ALL {
            let s = &f.stats[stat.index()];
            w.write_record([
                f.lambda.to_string(),
                stat.label().into(),
                opt_text(s.ks_d),
                opt_text(s.p_value),
            ])
            .map_err(|e| CliError::csv(ctx, e))?;
        }
    }
    w.flush().map_err(|e| CliError::csv(ctx, e.into()))
}

/// Coverage rows; `anomaly_only` restricts to the near-zero band.
pub fn write_coverage<W: Write>(out: W, report: &McReport, anomaly_only: bool) -> CliResult<()> {
    let ctx = "writing coverage";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "stat", "coverage", "invalid_count"])
        .map_err(|e| CliError::csv(ctx, e))?;
    for f in report
        .frequencies
        .iter()
        .filter(|f| !anomaly_only || f.in_anomaly_band())
    {
        for stat in Statistic::ALL {
            let s = &f.stats[stat.index()];
            w.write_record([
                f.lambda.to_string(),
                stat.label().into(),
                opt_text(s.coverage),
                s.invalid_count.to_string(),
            ])
            .map_err(|e| CliError::csv(ctx, e))?;
        }
    }
    w.flush().map_err(|e| CliError::csv(ctx, e.into()))
}

pub fn write_summary<W: Write>(out: W, report: &McReport) -> CliResult<()> {
    let ctx = "writing summary.csv";
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stat", "pct_p_above_05"])
        .map_err(|e| CliError::csv(ctx, e))?;
    for stat in Statistic::ALL {
        w.write_record([
            stat.label().to_string(),
            report.pct_p_above(stat, 0.05).to_string(),
        ])
        .map_err(|e| CliError::csv(ctx, e))?;
    }
    w.flush().map_err(|e| CliError::csv(ctx, e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_header_is_checked() {
        let err = read_samples("ch1,x\n1,2\n".as_bytes(), 1.0).unwrap_err();
        assert!(err.to_string().contains("expected `ch2`"));
        let err = read_samples("ch1\nabc\n".as_bytes(), 1.0).unwrap_err();
        assert!(err.to_string().contains("not a number"));
    }

    #[test]
    fn samples_are_written_with_17_digits() {
        let s = MultichannelSamples::new(vec![vec![0.1, -2.5]], 1.0).unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "ch1\n1.0000000000000001e-1\n-2.5000000000000000e0\n");
        assert_eq!(read_samples(text.as_bytes(), 1.0).unwrap(), s);
    }

    #[test]
    fn pair_labels() {
        assert_eq!(pair_label(0, 1), "1-2");
        assert_eq!(parse_pair("2-1").unwrap(), (1, 0));
        assert!(parse_pair("0-1").is_err());
        assert!(parse_pair("12").is_err());
    }

    #[test]
    fn incomplete_estimate_is_rejected() {
        let text = "lambda,pair,re,im\n0,1-1,1,0\n0,1-2,0,0\n0,2-1,0,0\n";
        assert!(read_estimate(text.as_bytes()).is_err());
    }
}
