use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{ks_statistic, simulate_trials, RunConfig};
use crate::error::{Error, Result};

pub const CIRCULAR_LAW_MIN_N: usize = 200;
pub const ANGULAR_SECTORS: usize = 16;
/// Eigenvalues beyond this modulus count as escaping the unit disc.
pub const OUTSIDE_RADIUS: f64 = 1.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircularLawReport {
    pub n: usize,
    pub samples: usize,
    /// Eigenvalues of every sample, pooled in trial order.
    #[serde(with = "complex_list")]
    pub eigenvalues: Vec<Complex64>,
    /// KS distance of the moduli to `F(r) = min(r^2, 1)`.
    pub radial_ks: f64,
    pub angular_chi_square: f64,
    pub angular_p_value: f64,
    pub fraction_outside: f64,
}

/// Distance between the empirical CDF of `|λ|` and the uniform-disc radial
/// law `F(r) = min(r^2, 1)`.
pub fn radial_ks_distance(eigenvalues: &[Complex64]) -> f64 {
    let r: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
    ks_statistic(&r, |x| (x * x).min(1.0))
}

/// Pearson chi-square of eigenvalue arguments over equal sectors, with its
/// p-value on `sectors - 1` degrees of freedom.
pub fn angular_chi_square(eigenvalues: &[Complex64], sectors: usize) -> (f64, f64) {
    let mut counts = vec![0usize; sectors];
    for z in eigenvalues {
        let t = (z.arg() + PI) / (2.0 * PI);
        let bin = ((t * sectors as f64) as usize).min(sectors - 1);
        counts[bin] += 1;
    }
    let expected = eigenvalues.len() as f64 / sectors as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist = ChiSquared::new((sectors - 1) as f64).expect("positive dof");
    (chi2, dist.sf(chi2))
}

/// Empirical spectral distribution of `config.trials` sampled matrices
/// compared against the uniform law on the unit disc.
pub fn run_circular_law_experiment(config: &RunConfig, threads: Option<usize>) -> Result<CircularLawReport> {
    config.validate_with_min_trials(1)?;
    if config.n < CIRCULAR_LAW_MIN_N {
        return Err(Error::InvalidArgument(format!(
            "circular-law experiment needs n >= {CIRCULAR_LAW_MIN_N}, got {}",
            config.n
        )));
    }
    let spectra = simulate_trials(config, threads)?;
    let eigenvalues: Vec<Complex64> = spectra
        .into_iter()
        .flat_map(|t| t.spectrum.into_eigenvalues())
        .collect();
    let (angular_chi_square, angular_p_value) = angular_chi_square(&eigenvalues, ANGULAR_SECTORS);
    let outside = eigenvalues.iter().filter(|z| z.norm() > OUTSIDE_RADIUS).count();
    Ok(CircularLawReport {
        n: config.n,
        samples: config.trials,
        radial_ks: radial_ks_distance(&eigenvalues),
        angular_chi_square,
        angular_p_value,
        fraction_outside: outside as f64 / eigenvalues.len() as f64,
        eigenvalues,
    })
}

mod complex_list {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| [z.re, z.im]))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand::Rng;

    /// Uniform points in the unit disc by rejection from the square.
    fn uniform_disc(count: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = SeedStream::new(seed, 0).rng();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if z.norm() <= 1.0 {
                out.push(z);
            }
        }
        out
    }

    #[test]
    fn synthetic_disc_passes_radial_ks() {
        // The 1% critical value at 2000 points is about 1.63 / sqrt(2000).
        let fails = (0..100)
            .filter(|&s| radial_ks_distance(&uniform_disc(2000, s)) > 0.04)
            .count();
        assert!(fails <= 1, "{fails} of 100 synthetic discs exceeded 0.04");
    }

    #[test]
    fn radial_ks_detects_a_ring() {
        let ring: Vec<Complex64> = (0..500).map(|k| Complex64::from_polar(0.9, k as f64)).collect();
        assert!(radial_ks_distance(&ring) > 0.5);
    }

    #[test]
    fn angular_test_uniform_and_skewed() {
        let (_, p) = angular_chi_square(&uniform_disc(4000, 1), ANGULAR_SECTORS);
        assert!(p > 0.01);
        let half: Vec<Complex64> = uniform_disc(4000, 2).into_iter().map(|z| Complex64::new(z.re.abs(), z.im)).collect();
        let (_, p) = angular_chi_square(&half, ANGULAR_SECTORS);
        assert!(p < 1e-10);
    }

    #[test]
    fn rejects_small_n() {
        assert!(run_circular_law_experiment(&RunConfig::new(64, 1, 1), Some(1)).is_err());
    }
}
