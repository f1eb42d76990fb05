//! Random centrosymmetric matrices.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::SeedStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// Re and Im independent N(0, 1/2).
    StandardComplexGaussian,
}

/// Law of the raw entries `x_ij` before the `1/sqrt(n)` scaling.
///
/// Every law must have `E[x] = 0`, `E[x^2] = 0` and `E[|x|^2] = 1`;
/// [`moment_self_test`] checks this empirically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntryDistribution {
    pub kind: EntryKind,
    pub descriptor: String,
}

impl EntryDistribution {
    pub fn standard_complex_gaussian() -> Self {
        Self {
            kind: EntryKind::StandardComplexGaussian,
            descriptor: "standard circular complex Gaussian".into(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.kind {
            EntryKind::StandardComplexGaussian => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }
}

impl Default for EntryDistribution {
    fn default() -> Self {
        Self::standard_complex_gaussian()
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor)
    }
}

/// A sampled centrosymmetric matrix together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CentrosymmetricMatrix {
    matrix: ComplexMatrix,
    stream: SeedStream,
    dist: EntryDistribution,
}

impl CentrosymmetricMatrix {
    /// Wraps an existing matrix after checking exact center symmetry.
    pub fn new(matrix: ComplexMatrix, stream: SeedStream, dist: EntryDistribution) -> Result<Self> {
        matrix.require_square()?;
        let deviation = mirror_deviation(&matrix);
        if deviation != 0.0 {
            return Err(Error::NotCentrosymmetric { deviation });
        }
        Ok(Self {
            matrix,
            stream,
            dist,
        })
    }

    /// Wraps a deterministic (non-random) matrix such as `I`.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix, SeedStream::new(0, 0), EntryDistribution::default())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn stream(&self) -> SeedStream {
        self.stream
    }

    pub fn dist(&self) -> &EntryDistribution {
        &self.dist
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn to_dump(&self) -> MatrixDump {
        MatrixDump {
            n: self.n(),
            seed: self.stream.master_seed,
            stream: self.stream.stream_index,
            dist: self.dist.clone(),
            entries: self.matrix.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// JSON dump `{n, seed, stream, dist, entries: [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDump {
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub dist: EntryDistribution,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDump {
    pub fn into_matrix(self) -> Result<CentrosymmetricMatrix> {
        let data = self
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        let m = ComplexMatrix::from_vec(self.n, self.n, data)?;
        CentrosymmetricMatrix::new(m, SeedStream::new(self.seed, self.stream), self.dist)
    }
}

/// Positions `(i, j)` (0-based) that carry an independent draw: those not
/// lexicographically after their mirror `(n-1-i, n-1-j)`, in row-major order.
pub fn free_positions(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n)
        .flat_map(move |i| (0..n).map(move |j| (i, j)))
        .filter(move |&(i, j)| (i, j) <= (n - 1 - i, n - 1 - j))
}

/// Draws `ceil(n^2 / 2)` raw entries, mirrors each to `(n-1-i, n-1-j)`
/// and scales by `1/sqrt(n)`.
pub fn sample_centrosymmetric(
    n: usize,
    dist: &EntryDistribution,
    stream: SeedStream,
) -> Result<CentrosymmetricMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be >= 1".into()));
    }
    let mut rng = stream.rng();
    let scale = 1.0 / (n as f64).sqrt();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, j) in free_positions(n) {
        let x = dist.draw(&mut rng) * scale;
        m[(i, j)] = x;
        m[(n - 1 - i, n - 1 - j)] = x;
    }
    Ok(CentrosymmetricMatrix {
        matrix: m,
        stream,
        dist: dist.clone(),
    })
}

fn mirror_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.n_rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(n - 1 - i, n - 1 - j)]).norm());
        }
    }
    worst
}

pub fn is_centrosymmetric(m: &ComplexMatrix, tol: f64) -> Result<bool> {
    m.require_square()?;
    Ok(mirror_deviation(m) <= tol)
}

/// Empirical moments of the entry law with their standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub draws: usize,
    pub mean: [f64; 2],
    pub mean_se: f64,
    pub second_moment: [f64; 2],
    pub second_moment_se: f64,
    pub abs_second_moment: f64,
    pub abs_second_moment_se: f64,
    /// Human-readable description of every moment that strayed beyond 5 SE.
    pub violations: Vec<String>,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const MIN_SELF_TEST_DRAWS: usize = 10_000;
const SELF_TEST_SIGMAS: f64 = 5.0;

pub fn moment_self_test(
    dist: &EntryDistribution,
    draws: usize,
    stream: SeedStream,
) -> Result<MomentReport> {
    if draws < MIN_SELF_TEST_DRAWS {
        return Err(Error::InvalidArgument(format!(
            "moment self-test needs at least {MIN_SELF_TEST_DRAWS} draws, got {draws}"
        )));
    }
    let mut rng = stream.rng();
    let xs: Vec<Complex64> = (0..draws).map(|_| dist.draw(&mut rng)).collect();
    let t = draws as f64;

    let complex_mean_and_se = |vals: &mut dyn Iterator<Item = Complex64>| {
        let v: Vec<Complex64> = vals.collect();
        let mean: Complex64 = v.iter().sum::<Complex64>() / t;
        let var = v.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (t - 1.0);
        (mean, (var / t).sqrt())
    };
    let (mean, mean_se) = complex_mean_and_se(&mut xs.iter().copied());
    let (second, second_se) = complex_mean_and_se(&mut xs.iter().map(|z| z * z));
    let abs2: Vec<f64> = xs.iter().map(|z| z.norm_sqr()).collect();
    let abs2_mean = abs2.iter().sum::<f64>() / t;
    let abs2_var = abs2.iter().map(|a| (a - abs2_mean).powi(2)).sum::<f64>() / (t - 1.0);
    let abs2_se = (abs2_var / t).sqrt();

    let mut violations = Vec::new();
    if mean.norm() > SELF_TEST_SIGMAS * mean_se {
        violations.push(format!("|E[x]| = {:.3e} exceeds 5 SE ({:.3e})", mean.norm(), mean_se));
    }
    if second.norm() > SELF_TEST_SIGMAS * second_se {
        violations.push(format!("|E[x^2]| = {:.3e} exceeds 5 SE ({:.3e})", second.norm(), second_se));
    }
    if (abs2_mean - 1.0).abs() > SELF_TEST_SIGMAS * abs2_se {
        violations.push(format!("E[|x|^2] = {abs2_mean:.5} differs from 1 by more than 5 SE ({abs2_se:.3e})"));
    }

    Ok(MomentReport {
        draws,
        mean: [mean.re, mean.im],
        mean_se,
        second_moment: [second.re, second.im],
        second_moment_se: second_se,
        abs_second_moment: abs2_mean,
        abs_second_moment_se: abs2_se,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{counter_identity, matmul};

    fn gauss() -> EntryDistribution {
        EntryDistribution::standard_complex_gaussian()
    }

    #[test]
    fn one_by_one_is_a_single_unscaled_draw() {
        let s = SeedStream::new(5, 0);
        let m = sample_centrosymmetric(1, &gauss(), s).unwrap();
        let mut rng = s.rng();
        assert_eq!(m.matrix()[(0, 0)], gauss().draw(&mut rng));
    }

    #[test]
    fn two_by_two_mirrors_bitwise() {
        let m = sample_centrosymmetric(2, &gauss(), SeedStream::new(9, 4)).unwrap();
        let a = m.matrix();
        assert_eq!(a[(0, 0)], a[(1, 1)]);
        assert_eq!(a[(0, 1)], a[(1, 0)]);
        assert_ne!(a[(0, 0)], a[(0, 1)]);
    }

    #[test]
    fn free_position_count_and_center() {
        for n in 1..=12 {
            assert_eq!(free_positions(n).count(), (n * n).div_ceil(2));
        }
        // The center of a 5x5 matrix maps onto itself.
        let fixed: Vec<_> = (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .filter(|&(i, j)| (i, j) == (4 - i, 4 - j))
            .collect();
        assert_eq!(fixed, vec![(2, 2)]);
        assert!(free_positions(5).any(|p| p == (2, 2)));
    }

    #[test]
    fn sampled_matrices_satisfy_jmj_exactly() {
        for n in 1..=9 {
            let m = sample_centrosymmetric(n, &gauss(), SeedStream::new(1, n as u64)).unwrap();
            assert!(is_centrosymmetric(m.matrix(), 0.0).unwrap());
            let j = counter_identity(n).unwrap();
            let jmj = matmul(&matmul(&j, m.matrix()).unwrap(), &j).unwrap();
            assert_eq!(&jmj, m.matrix());
        }
    }

    #[test]
    fn is_centrosymmetric_examples() {
        assert!(is_centrosymmetric(&ComplexMatrix::identity(6), 0.0).unwrap());
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        assert!(!is_centrosymmetric(&m, 0.0).unwrap());
        assert!(is_centrosymmetric(&ComplexMatrix::zeros(2, 3), 0.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = SeedStream::new(77, 12);
        let a = sample_centrosymmetric(7, &gauss(), s).unwrap();
        let b = sample_centrosymmetric(7, &gauss(), s).unwrap();
        assert_eq!(a, b);
        let c = sample_centrosymmetric(7, &gauss(), s.substream(13)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dump_round_trip() {
        let m = sample_centrosymmetric(4, &gauss(), SeedStream::new(3, 1)).unwrap();
        let json = serde_json::to_string(&m.to_dump()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["n"], 4);
        assert_eq!(v["entries"].as_array().unwrap().len(), 16);
        assert_eq!(v["dist"]["kind"], "standard_complex_gaussian");
        let back: MatrixDump = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_matrix().unwrap(), m);
    }

    #[test]
    fn self_test_rejects_small_draw_counts() {
        assert!(moment_self_test(&gauss(), 100, SeedStream::new(0, 0)).is_err());
    }

    #[test]
    fn self_test_million_draws() {
        let r = moment_self_test(&gauss(), 1_000_000, SeedStream::new(2024, 0)).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(Complex64::new(r.mean[0], r.mean[1]).norm() <= 5e-3);
        assert!(Complex64::new(r.second_moment[0], r.second_moment[1]).norm() <= 5e-3);
        assert!((0.995..=1.005).contains(&r.abs_second_moment));
    }

    #[test]
    fn entry_variance_is_one_over_n() {
        // Fixed entry (1, 2) of an 8x8 matrix across 10^4 trials.
        let n = 8;
        let trials = 10_000;
        let vals: Vec<Complex64> = (0..trials)
            .map(|t| sample_centrosymmetric(n, &gauss(), SeedStream::new(11, t)).unwrap().matrix()[(1, 2)])
            .collect();
        let t = trials as f64;
        let mean: Complex64 = vals.iter().sum::<Complex64>() / t;
        let sq: Vec<f64> = vals.iter().map(|z| (z - mean).norm_sqr()).collect();
        let var = sq.iter().sum::<f64>() / (t - 1.0);
        let se = (sq.iter().map(|s| (s - var).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt();
        assert!((var - 1.0 / n as f64).abs() <= 5.0 * se, "var {var}, se {se}");
    }
}
