use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{les, predicted_sigma2, resolvent_trace, summarize, RunConfig, SummaryStats};
use crate::eigen::{eigenvalues_centrosymmetric, spectral_radius, DEFAULT_EIGEN_TOL};
use crate::error::{Error, Result};
use crate::linalg::Spectrum;
use crate::parallel::map_indexed;
use crate::rng::SeedStream;
use crate::sampling::sample_centrosymmetric;

/// Spectrum of one sampled matrix.
#[derive(Debug, Clone)]
pub struct TrialSpectrum {
    pub trial_index: u64,
    pub spectrum: Spectrum,
    pub spectral_radius: f64,
}

/// One JSONL line of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub accepted: bool,
    pub spectral_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub les: Option<[f64; 2]>,
    /// Keyed by the contour point written as `"re,im"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolvent: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, Clone)]
pub struct TrialBatch {
    pub config: RunConfig,
    pub records: Vec<TrialRecord>,
    /// `L(P)` of every accepted trial, in trial order.
    pub les_values: Vec<Complex64>,
    /// `Tr R_z` per accepted trial, one entry per contour point.
    pub resolvent_values: Vec<Vec<Complex64>>,
    pub guard_rejections: usize,
    pub summaries: Option<SummaryStats>,
    /// `les_values` minus their empirical mean.
    pub centered: Vec<Complex64>,
}

impl TrialBatch {
    pub fn accepted(&self) -> usize {
        self.config.trials - self.guard_rejections
    }
}

pub(crate) fn contour_key(z: Complex64) -> String {
    format!("{},{}", z.re, z.im)
}

/// Samples `config.trials` matrices (trial `t` on substream `t`) and
/// computes their spectra through the block reduction.
pub fn simulate_trials(config: &RunConfig, threads: Option<usize>) -> Result<Vec<TrialSpectrum>> {
    let results = map_indexed(config.trials as u64, threads, |t| -> Result<TrialSpectrum> {
        let stream = SeedStream::new(config.master_seed, t);
        let m = sample_centrosymmetric(config.n, &config.dist, stream)?;
        let spectrum = eigenvalues_centrosymmetric(&m, DEFAULT_EIGEN_TOL).map_err(|e| match e {
            Error::Eigen(source) => Error::Trial { trial: t, source },
            other => other,
        })?;
        let spectral_radius = spectral_radius(&spectrum)?;
        Ok(TrialSpectrum {
            trial_index: t,
            spectrum,
            spectral_radius,
        })
    })?;
    results.into_iter().collect()
}

/// Evaluates the configured statistics on precomputed spectra.
///
/// Trials whose spectral radius exceeds `config.rho` are recorded but
/// excluded from every statistic.
pub fn batch_from_spectra(config: &RunConfig, spectra: &[TrialSpectrum]) -> Result<TrialBatch> {
    let contour = config.contour_points.clone().unwrap_or_default();
    let mut records = Vec::with_capacity(spectra.len());
    let mut les_values = Vec::new();
    let mut resolvent_values = Vec::new();
    let mut guard_rejections = 0;

    for ts in spectra {
        let accepted = ts.spectral_radius <= config.rho;
        let les_value = config.poly.as_ref().map(|p| les(&ts.spectrum, p));
        let resolvents = contour
            .iter()
            .map(|&z| resolvent_trace(&ts.spectrum, z))
            .collect::<Result<Vec<_>>>()?;
        records.push(TrialRecord {
            trial_index: ts.trial_index,
            seed: config.master_seed,
            accepted,
            spectral_radius: ts.spectral_radius,
            les: les_value.map(|z| [z.re, z.im]),
            resolvent: (!contour.is_empty()).then(|| {
                contour
                    .iter()
                    .zip(&resolvents)
                    .map(|(&z, r)| (contour_key(z), [r.re, r.im]))
                    .collect()
            }),
        });
        if !accepted {
            guard_rejections += 1;
            continue;
        }
        if let Some(v) = les_value {
            les_values.push(v);
        }
        if !contour.is_empty() {
            resolvent_values.push(resolvents);
        }
    }

    if guard_rejections == spectra.len() {
        return Err(Error::AllTrialsRejected {
            trials: spectra.len(),
            rho: config.rho,
        });
    }

    let (summaries, centered) = match &config.poly {
        Some(p) if les_values.len() >= 2 => {
            let (s, c) = summarize(&les_values, predicted_sigma2(p));
            (Some(s), c)
        }
        _ => (None, Vec::new()),
    };

    Ok(TrialBatch {
        config: config.clone(),
        records,
        les_values,
        resolvent_values,
        guard_rejections,
        summaries,
        centered,
    })
}

/// Centered linear eigenvalue statistics over `config.trials` samples.
pub fn run_clt_experiment(config: &RunConfig, threads: Option<usize>) -> Result<TrialBatch> {
    config.validate()?;
    if config.poly.is_none() {
        return Err(Error::InvalidArgument("CLT experiment needs a test polynomial".into()));
    }
    let spectra = simulate_trials(config, threads)?;
    batch_from_spectra(config, &spectra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::TestPolynomial;

    fn cfg(n: usize, trials: usize) -> RunConfig {
        RunConfig::new(n, trials, 3).with_poly(TestPolynomial::from_real(&[1.0]).unwrap())
    }

    #[test]
    fn requires_polynomial() {
        let c = RunConfig::new(8, 4, 1);
        assert!(run_clt_experiment(&c, Some(1)).is_err());
    }

    #[test]
    fn accounting_invariant() {
        let mut c = cfg(16, 30);
        c.rho = 1.0; // Tight enough to reject some trials.
        let b = run_clt_experiment(&c, Some(2)).unwrap();
        assert_eq!(b.les_values.len() + b.guard_rejections, c.trials);
        assert_eq!(b.records.len(), c.trials);
        assert!(b.guard_rejections > 0);
        assert!(b.records.iter().filter(|r| !r.accepted).all(|r| r.spectral_radius > 1.0));
    }

    #[test]
    fn all_rejected_is_an_error() {
        let mut c = cfg(8, 5);
        c.rho = 1e-6;
        assert!(matches!(
            run_clt_experiment(&c, Some(1)),
            Err(Error::AllTrialsRejected { .. })
        ));
    }

    #[test]
    fn guard_rarely_fires_at_default_rho() {
        let c = cfg(128, 40);
        let b = run_clt_experiment(&c, None).unwrap();
        assert!(b.guard_rejections as f64 / c.trials as f64 <= 0.01);
    }

    #[test]
    fn trace_statistic_is_the_trace() {
        let c = cfg(10, 5);
        let spectra = simulate_trials(&c, Some(1)).unwrap();
        for ts in &spectra {
            let m = sample_centrosymmetric(10, &c.dist, SeedStream::new(3, ts.trial_index)).unwrap();
            let l = les(&ts.spectrum, c.poly.as_ref().unwrap());
            assert!((l - m.matrix().trace().unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn centered_mean_is_zero() {
        let b = run_clt_experiment(&cfg(12, 25), None).unwrap();
        let m: Complex64 = b.centered.iter().sum::<Complex64>() / b.centered.len() as f64;
        assert!(m.norm() < 1e-12);
        assert_eq!(b.summaries.unwrap().predicted_sigma2, 2.0);
    }
}
