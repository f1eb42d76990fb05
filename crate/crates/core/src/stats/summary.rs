use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Summary of the centered linear statistics `L° = L - mean(L)` over the
/// accepted trials.
///
/// `variance` is the complex variance `Σ|L°|² / (T - 1)`, the quantity the
/// limiting `Σ 2k|a_k|²` describes. For a circularly symmetric limit the
/// real part carries half of it; shape statistics and the KS test use the
/// real part against `N(0, predicted_sigma2 / 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub samples: usize,
    pub mean: [f64; 2],
    pub variance: f64,
    pub variance_re: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub predicted_sigma2: f64,
}

/// Centers `values` by their empirical mean and summarizes them.
/// Returns the summary and the centered values.
pub fn summarize(values: &[Complex64], predicted_sigma2: f64) -> (SummaryStats, Vec<Complex64>) {
    let t = values.len();
    assert!(t >= 2, "summaries need at least two samples");
    let tf = t as f64;
    let mean = values.iter().sum::<Complex64>() / tf;
    let centered: Vec<Complex64> = values.iter().map(|v| v - mean).collect();

    let variance = centered.iter().map(|z| z.norm_sqr()).sum::<f64>() / (tf - 1.0);
    let re: Vec<f64> = centered.iter().map(|z| z.re).collect();
    let variance_re = re.iter().map(|x| x * x).sum::<f64>() / (tf - 1.0);

    // Moment ratios use the biased central moments.
    let m2 = re.iter().map(|x| x * x).sum::<f64>() / tf;
    let m3 = re.iter().map(|x| x.powi(3)).sum::<f64>() / tf;
    let m4 = re.iter().map(|x| x.powi(4)).sum::<f64>() / tf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    let (ks_statistic, ks_p_value) = if predicted_sigma2 > 0.0 {
        let normal = Normal::new(0.0, (predicted_sigma2 / 2.0).sqrt()).expect("positive sd");
        let d = ks_statistic(&re, |x| normal.cdf(x));
        (d, kolmogorov_p_value(d, t))
    } else {
        (1.0, 0.0)
    };

    let stats = SummaryStats {
        samples: t,
        mean: [mean.re, mean.im],
        variance,
        variance_re,
        skewness,
        excess_kurtosis,
        ks_statistic,
        ks_p_value,
        predicted_sigma2,
    };
    (stats, centered)
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n - F|`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a KS distance `d` from `n` samples, with the
/// Stephens small-sample correction.
pub fn kolmogorov_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
