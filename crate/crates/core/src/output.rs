//! Result files: per-trial JSONL, run summaries, and CSV plot data.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{RunConfig, SummaryStats, TrialBatch};

/// Writes one JSON object per trial, in trial order.
pub fn write_trials_jsonl<W: Write>(batch: &TrialBatch, mut w: W) -> Result<()> {
    for r in &batch.records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub config: &'a RunConfig,
    pub summaries: Option<&'a SummaryStats>,
    pub trials: usize,
    pub accepted: usize,
    pub guard_rejections: usize,
}

pub fn run_summary(batch: &TrialBatch) -> RunSummary<'_> {
    RunSummary {
        config: &batch.config,
        summaries: batch.summaries.as_ref(),
        trials: batch.config.trials,
        accepted: batch.accepted(),
        guard_rejections: batch.guard_rejections,
    }
}

pub fn write_json<T: Serialize, P: AsRef<Path>>(value: &T, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Scatter,
    Histogram,
}

/// What to plot. Scatter data comes from a pooled spectrum; histograms
/// from the centered statistics of a batch.
pub enum PlotSource<'a> {
    Eigenvalues(&'a [Complex64]),
    Batch {
        batch: &'a TrialBatch,
        bins: usize,
        /// Multiplies every sample, e.g. `1/sqrt(n)`.
        scale: f64,
    },
}

/// Bin layout of a histogram: `bins` equal bins spanning `[min, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(samples: &[f64], bins: usize) -> Result<Self> {
        if samples.is_empty() || bins == 0 {
            return Err(Error::InvalidArgument("histogram needs samples and bins".into()));
        }
        let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
        let mut edges: Vec<f64> = (0..=bins).map(|b| lo + b as f64 * width).collect();
        edges[bins] = if hi > lo { hi } else { lo + 1.0 };
        let mut counts = vec![0usize; bins];
        for &x in samples {
            let b = (((x - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Self { edges, counts })
    }
}

/// Writes `re,im` rows.
pub fn write_scatter_csv<W: Write>(eigenvalues: &[Complex64], w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["re", "im"])?;
    for z in eigenvalues {
        csv.serialize((z.re, z.im))?;
    }
    csv.flush()?;
    Ok(())
}

/// Histogram of the real part of the centered statistic.
///
/// Two `#` comment lines precede the header and carry the Gaussian overlay:
/// mean 0 and the predicted complex variance `sigma2`, of which the real
/// part carries half. The `overlay_density` column evaluates that real-part
/// normal density at each bin center, after scaling.
pub fn write_histogram_csv<W: Write>(batch: &TrialBatch, bins: usize, scale: f64, mut w: W) -> Result<()> {
    if batch.centered.is_empty() {
        return Err(Error::InvalidArgument("batch has no centered statistics".into()));
    }
    let sigma2 = batch
        .summaries
        .as_ref()
        .map_or(0.0, |s| s.predicted_sigma2);
    let samples: Vec<f64> = batch.centered.iter().map(|z| z.re * scale).collect();
    let hist = Histogram::new(&samples, bins)?;
    let var_re = sigma2 / 2.0 * scale * scale;

    writeln!(w, "# centered linear statistic, real part, scale={scale}")?;
    writeln!(w, "# overlay mean=0 sigma2={} real_part_variance={var_re}", sigma2 * scale * scale)?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(["bin_lo", "bin_hi", "count", "density", "overlay_density"])?;
    let total = samples.len() as f64;
    for (b, &count) in hist.counts.iter().enumerate() {
        let (lo, hi) = (hist.edges[b], hist.edges[b + 1]);
        let density = count as f64 / (total * (hi - lo));
        let mid = 0.5 * (lo + hi);
        let overlay = if var_re > 0.0 {
            (-mid * mid / (2.0 * var_re)).exp() / (2.0 * std::f64::consts::PI * var_re).sqrt()
        } else {
            0.0
        };
        csv.serialize((lo, hi, count, density, overlay))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn emit_plot_data<P: AsRef<Path>>(source: PlotSource<'_>, kind: PlotKind, path: P) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    match (source, kind) {
        (PlotSource::Eigenvalues(ev), PlotKind::Scatter) => {
            if ev.is_empty() {
                return Err(Error::InvalidArgument("no eigenvalues to plot".into()));
            }
            write_scatter_csv(ev, w)
        }
        (PlotSource::Batch { batch, bins, scale }, PlotKind::Histogram) => write_histogram_csv(batch, bins, scale, w),
        _ => Err(Error::InvalidArgument("plot kind does not match its data source".into())),
    }
}
