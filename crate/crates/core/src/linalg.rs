//! Dense complex matrices and the handful of structural operations the rest
//! of the crate is built on.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting bad lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn from_complex_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<Complex64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = self.transpose();
        t.data.iter_mut().for_each(|z| *z = z.conj());
        t
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&z| z * c).collect())
    }

    /// Extracts the `rows x cols` block whose top-left corner is `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut out = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            out.extend_from_slice(&self.row(i)[c0..c0 + cols]);
        }
        Self::from_raw(rows, cols, out)
    }

    /// Block-diagonal matrix `diag(a, b)`.
    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let n = a.rows + b.rows;
        let m = a.cols + b.cols;
        let mut out = Self::zeros(n, m);
        for i in 0..a.rows {
            out.data[i * m..i * m + a.cols].copy_from_slice(a.row(i));
        }
        for i in 0..b.rows {
            let r = a.rows + i;
            out.data[r * m + a.cols..(r + 1) * m].copy_from_slice(b.row(i));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} minus {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Result<Complex64> {
        self.require_square()?;
        Ok((0..self.rows).map(|i| self[(i, i)]).sum())
    }

    pub(crate) fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn mul_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    fn conj_transpose_mul_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Multiset of eigenvalues of one square matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRecord", into = "SpectrumRecord")]
pub struct Spectrum {
    eigenvalues: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<Complex64>) -> Self {
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn source_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn into_eigenvalues(self) -> Vec<Complex64> {
        self.eigenvalues
    }

    /// Multiset union.
    pub fn union(mut self, other: Spectrum) -> Spectrum {
        self.eigenvalues.extend(other.eigenvalues);
        self
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn power_sum(&self, k: u32) -> Complex64 {
        self.eigenvalues.iter().map(|z| z.powu(k)).sum()
    }
}

/// JSON dump of a spectrum: `{"eigenvalues": [[re, im], ...], "source_dim": n}`.
#[derive(Serialize, Deserialize)]
struct SpectrumRecord {
    eigenvalues: Vec<[f64; 2]>,
    source_dim: usize,
}

impl From<Spectrum> for SpectrumRecord {
    fn from(s: Spectrum) -> Self {
        Self {
            source_dim: s.source_dim(),
            eigenvalues: s.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<SpectrumRecord> for Spectrum {
    type Error = String;

    fn try_from(r: SpectrumRecord) -> std::result::Result<Self, String> {
        if r.eigenvalues.len() != r.source_dim {
            return Err(format!(
                "{} eigenvalues for source_dim {}",
                r.eigenvalues.len(),
                r.source_dim
            ));
        }
        Ok(Spectrum::new(
            r.eigenvalues.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
        ))
    }
}

/// The exchange matrix: ones on the anti-diagonal.
pub fn counter_identity(s: usize) -> Result<ComplexMatrix> {
    if s == 0 {
        return Err(Error::InvalidArgument("counter-identity size must be >= 1".into()));
    }
    let mut j = ComplexMatrix::zeros(s, s);
    for i in 0..s {
        j[(i, s - 1 - i)] = Complex64::new(1.0, 0.0);
    }
    Ok(j)
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (n, m) = (a.rows, b.cols);
    let mut out = vec![Complex64::new(0.0, 0.0); n * m];
    for i in 0..n {
        let dst = &mut out[i * m..(i + 1) * m];
        for (k, &aik) in a.row(i).iter().enumerate() {
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (d, bkj) in dst.iter_mut().zip(b.row(k)) {
                *d += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix::from_raw(n, m, out))
}

/// `Tr(M^k)` by repeated multiplication. The last product is never formed:
/// only its diagonal is accumulated.
pub fn trace_power(m: &ComplexMatrix, k: u32) -> Result<Complex64> {
    m.require_square()?;
    if k == 0 {
        return Err(Error::InvalidArgument("trace_power needs k >= 1".into()));
    }
    if k == 1 {
        return m.trace();
    }
    let mut p = m.clone();
    for _ in 2..k {
        p = matmul(&p, m)?;
    }
    let n = m.rows;
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            tr += p[(i, j)] * m[(j, i)];
        }
    }
    Ok(tr)
}

/// `[Tr M, Tr M^2, ..., Tr M^kmax]`, forming each power by one more
/// multiplication.
pub fn trace_powers(m: &ComplexMatrix, kmax: u32) -> Result<Vec<Complex64>> {
    m.require_square()?;
    let mut out = Vec::with_capacity(kmax as usize);
    if kmax == 0 {
        return Ok(out);
    }
    out.push(m.trace()?);
    let mut p = m.clone();
    for _ in 2..=kmax {
        p = matmul(&p, m)?;
        out.push(p.trace()?);
    }
    Ok(out)
}

pub const DEFAULT_NORM_TOL: f64 = 1e-6;

/// Largest singular value by power iteration on `M* M`.
///
/// Stops once successive estimates agree to relative accuracy `tol`; gives
/// up after `10 n` iterations.
pub fn operator_norm_estimate(m: &ComplexMatrix, tol: f64) -> Result<f64> {
    m.require_square()?;
    let n = m.rows;
    // Non-symmetric start vector so it is not orthogonal to structured
    // singular vectors (e.g. those of J).
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 + 1.0) / (n as f64 + 1.0), 0.0))
        .collect();
    normalize(&mut v);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut sigma = 0.0;
    let cap = (10 * n).max(10);
    for _ in 0..cap {
        m.mul_vec(&v, &mut w);
        let est = norm2(&w);
        if est == 0.0 {
            // v is in the null space; the matrix may still be nonzero.
            if m.max_abs() == 0.0 {
                return Ok(0.0);
            }
        }
        m.conj_transpose_mul_vec(&w, &mut u);
        let unorm = norm2(&u);
        sigma = est;
        // Stop on the eigen-residual of M*M rather than on the change between
        // iterates, which stalls when the top singular values cluster.
        let rayleigh = est * est;
        let residual = u
            .iter()
            .zip(&v)
            .map(|(ui, vi)| (ui - vi * rayleigh).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= tol * rayleigh || unorm == 0.0 {
            return Ok(sigma);
        }
        v.iter_mut().zip(&u).for_each(|(vi, ui)| *vi = ui / unorm);
    }
    Err(Error::NormNotConverged {
        iterations: cap,
        last_estimate: sigma,
    })
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let s = norm2(v);
    v.iter_mut().for_each(|z| *z /= s);
}
