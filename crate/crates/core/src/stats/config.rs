use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TestPolynomial;
use crate::error::{Error, Result};
use crate::sampling::EntryDistribution;

/// Spectral-radius threshold above which a trial is discarded.
pub const DEFAULT_RHO: f64 = 2.2;
/// Contour margin beyond `rho`. Exposed for configuration only; the
/// harnesses never derive contour points from it.
pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_CONTOUR_RADIUS: f64 = 2.5;
/// Contour points must keep at least this modulus.
pub const MIN_CONTOUR_MODULUS: f64 = 1.2;

/// Configuration shared by the Monte Carlo harnesses. Thread count is not
/// part of it: results never depend on scheduling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub dist: EntryDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<TestPolynomial>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "contour_serde"
    )]
    pub contour_points: Option<Vec<Complex64>>,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_rho() -> f64 {
    DEFAULT_RHO
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl RunConfig {
    pub fn new(n: usize, trials: usize, master_seed: u64) -> Self {
        Self {
            n,
            trials,
            master_seed,
            dist: EntryDistribution::default(),
            poly: None,
            contour_points: None,
            rho: DEFAULT_RHO,
            tau: DEFAULT_TAU,
        }
    }

    pub fn with_poly(mut self, poly: TestPolynomial) -> Self {
        self.poly = Some(poly);
        self
    }

    pub fn with_contour(mut self, points: Vec<Complex64>) -> Self {
        self.contour_points = Some(points);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with_min_trials(2)
    }

    pub(crate) fn validate_with_min_trials(&self, min_trials: usize) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if self.trials < min_trials {
            return Err(Error::InvalidArgument(format!(
                "need at least {min_trials} trials, got {}",
                self.trials
            )));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {}", self.tau)));
        }
        if let Some(points) = &self.contour_points {
            if let Some(z) = points.iter().find(|z| !(z.norm() > MIN_CONTOUR_MODULUS)) {
                return Err(Error::InvalidArgument(format!(
                    "contour point {z} must satisfy |z| > {MIN_CONTOUR_MODULUS}"
                )));
            }
        }
        Ok(())
    }
}

mod contour_serde {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Complex64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(points) => s.collect_seq(points.iter().map(|z| [z.re, z.im])),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Complex64>>, D::Error> {
        let raw: Option<Vec<[f64; 2]>> = Option::deserialize(d)?;
        Ok(raw.map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(RunConfig::new(8, 10, 1).validate().is_ok());
        assert!(RunConfig::new(8, 1, 1).validate().is_err());
        assert!(RunConfig::new(0, 10, 1).validate().is_err());
        let near = RunConfig::new(8, 10, 1).with_contour(vec![Complex64::new(1.1, 0.0)]);
        assert!(near.validate().is_err());
        let ok = RunConfig::new(8, 10, 1).with_contour(vec![Complex64::new(0.0, 2.5)]);
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let cfg = RunConfig::new(64, 12, u64::MAX)
            .with_poly(TestPolynomial::from_real(&[0.1, 0.0, 2.0 / 3.0]).unwrap())
            .with_contour(vec![Complex64::new(2.5, 0.1), Complex64::new(-1.0 / 3.0, 2.5)]);
        let s = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn defaults_fill_in() {
        let cfg: RunConfig = serde_json::from_str(r#"{"n": 4, "trials": 3, "master_seed": 9}"#).unwrap();
        assert_eq!(cfg.rho, DEFAULT_RHO);
        assert_eq!(cfg.tau, DEFAULT_TAU);
        assert!(cfg.poly.is_none());
    }
}
