//! Monte Carlo harnesses and the statistics they report.

mod circular;
mod clt;
mod config;
mod covariance;
mod summary;

pub use circular::{angular_chi_square, radial_ks_distance, run_circular_law_experiment, CircularLawReport, CIRCULAR_LAW_MIN_N};
pub use clt::{
    batch_from_spectra, run_clt_experiment, simulate_trials, TrialBatch, TrialRecord, TrialSpectrum,
};
pub use config::{RunConfig, DEFAULT_CONTOUR_RADIUS, DEFAULT_RHO, DEFAULT_TAU, MIN_CONTOUR_MODULUS};
pub use covariance::{predicted_kernel, run_covariance_kernel_experiment, CovarianceReport, KernelEntry};
pub use summary::{kolmogorov_p_value, ks_statistic, summarize, SummaryStats};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_powers, ComplexMatrix, Spectrum};

/// `P(x) = a_1 x + ... + a_d x^d`. There is no constant term: it shifts
/// every linear statistic by the same amount and vanishes after centering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct TestPolynomial {
    coeffs: Vec<Complex64>,
}

impl TestPolynomial {
    /// `coeffs[k - 1]` is the coefficient of `x^k`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.last() {
            None => Err(Error::InvalidArgument("polynomial needs degree >= 1".into())),
            Some(z) if *z == Complex64::new(0.0, 0.0) => Err(Error::InvalidArgument(
                "leading coefficient must be nonzero".into(),
            )),
            _ if coeffs.iter().any(|z| !z.is_finite()) => {
                Err(Error::InvalidArgument("non-finite coefficient".into()))
            }
            _ => Ok(Self { coeffs }),
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Parses `"a_1,a_2,...,a_d"`; each item is a real number.
    pub fn parse(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_real(&coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| (acc + a) * x)
    }

    pub fn scale(&self, c: Complex64) -> Result<Self> {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }
}

impl TryFrom<Vec<[f64; 2]>> for TestPolynomial {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<TestPolynomial> for Vec<[f64; 2]> {
    fn from(p: TestPolynomial) -> Self {
        p.coeffs.iter().map(|z| [z.re, z.im]).collect()
    }
}

/// Linear eigenvalue statistic `Σ_i P(λ_i)`.
pub fn les(spec: &Spectrum, poly: &TestPolynomial) -> Complex64 {
    spec.eigenvalues().iter().map(|&z| poly.eval(z)).sum()
}

/// Limiting variance `Σ_k 2k |a_k|^2` of the centered statistic.
pub fn predicted_sigma2(poly: &TestPolynomial) -> f64 {
    poly.coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| 2.0 * (i + 1) as f64 * a.norm_sqr())
        .sum()
}

/// Smallest allowed distance between `z` and the spectrum.
pub const RESOLVENT_MIN_GAP: f64 = 1e-9;

/// `Tr (zI - M)^{-1} = Σ_i 1 / (z - λ_i)`.
pub fn resolvent_trace(spec: &Spectrum, z: Complex64) -> Result<Complex64> {
    let gap = spec
        .eigenvalues()
        .iter()
        .map(|l| (z - l).norm())
        .fold(f64::INFINITY, f64::min);
    if gap <= RESOLVENT_MIN_GAP {
        return Err(Error::NearEigenvalue { z, distance: gap });
    }
    Ok(spec.eigenvalues().iter().map(|l| (z - l).inv()).sum())
}

/// `|Tr R_z - n/z - Σ_{k=1}^{terms} z^{-k-1} Tr M^k|`: the tail of the
/// Neumann series, with the traces formed by matrix powers rather than
/// from the eigenvalues.
pub fn resolvent_series_residual(
    m: &ComplexMatrix,
    spec: &Spectrum,
    z: Complex64,
    terms: u32,
) -> Result<f64> {
    let n = m.n_rows() as f64;
    let traces = trace_powers(m, terms)?;
    let zinv = z.inv();
    let mut series = n * zinv;
    let mut zpow = zinv;
    for tr in traces {
        zpow *= zinv;
        series += tr * zpow;
    }
    Ok((resolvent_trace(spec, z)? - series).norm())
}
