use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{batch_from_spectra, simulate_trials, RunConfig};
use crate::error::{Error, Result};

/// Contour points must sit at least this factor beyond the largest observed
/// spectral radius.
pub const CONTOUR_MARGIN: f64 = 1.2;

/// Limiting covariance `2 (1 - z conj(η))^{-2}` of `Tr R_z` and
/// `conj(Tr R_η)`.
pub fn predicted_kernel(z: Complex64, eta: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    2.0 * (one - z * eta.conj()).powi(-2)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelEntry {
    pub z: [f64; 2],
    pub eta: [f64; 2],
    pub empirical: [f64; 2],
    pub predicted: [f64; 2],
    /// `|empirical - predicted| / |predicted|`.
    pub relative_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub trials: usize,
    pub guard_rejections: usize,
    pub max_spectral_radius: f64,
    pub entries: Vec<KernelEntry>,
}

impl CovarianceReport {
    pub fn entry(&self, z: Complex64, eta: Complex64) -> Option<&KernelEntry> {
        self.entries
            .iter()
            .find(|e| e.z == [z.re, z.im] && e.eta == [eta.re, eta.im])
    }
}

/// Empirical `Cov(Tr R_z, conj Tr R_η)` over all ordered pairs of contour
/// points, centering each trace by its mean across accepted trials.
pub fn run_covariance_kernel_experiment(config: &RunConfig, threads: Option<usize>) -> Result<CovarianceReport> {
    config.validate()?;
    let points = match &config.contour_points {
        Some(p) if !p.is_empty() => p.clone(),
        _ => return Err(Error::InvalidArgument("covariance experiment needs contour points".into())),
    };
    let spectra = simulate_trials(config, threads)?;
    let batch = batch_from_spectra(config, &spectra)?;
    let max_spectral_radius = spectra
        .iter()
        .filter(|t| t.spectral_radius <= config.rho)
        .map(|t| t.spectral_radius)
        .fold(0.0, f64::max);
    if let Some(z) = points.iter().find(|z| z.norm() < CONTOUR_MARGIN * max_spectral_radius) {
        return Err(Error::InvalidArgument(format!(
            "contour point {z} is within {CONTOUR_MARGIN}x of the observed spectral radius {max_spectral_radius}"
        )));
    }

    let t = batch.resolvent_values.len();
    if t < 2 {
        return Err(Error::InvalidArgument("need at least two accepted trials".into()));
    }
    let tf = t as f64;
    let means: Vec<Complex64> = (0..points.len())
        .map(|p| batch.resolvent_values.iter().map(|r| r[p]).sum::<Complex64>() / tf)
        .collect();

    let mut entries = Vec::with_capacity(points.len() * points.len());
    for (a, &z) in points.iter().enumerate() {
        for (b, &eta) in points.iter().enumerate() {
            let cov = batch
                .resolvent_values
                .iter()
                .map(|r| (r[a] - means[a]) * (r[b] - means[b]).conj())
                .sum::<Complex64>()
                / (tf - 1.0);
            let predicted = predicted_kernel(z, eta);
            entries.push(KernelEntry {
                z: [z.re, z.im],
                eta: [eta.re, eta.im],
                empirical: [cov.re, cov.im],
                predicted: [predicted.re, predicted.im],
                relative_error: (cov - predicted).norm() / predicted.norm(),
            });
        }
    }

    Ok(CovarianceReport {
        trials: config.trials,
        guard_rejections: batch.guard_rejections,
        max_spectral_radius,
        entries,
    })
}
