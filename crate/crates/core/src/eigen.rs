//! Eigenvalues of dense complex matrices.
//!
//! The dense path is the textbook pipeline: diagonal balancing, Householder
//! reduction to upper Hessenberg form, then single-shift complex QR sweeps
//! (Wilkinson shift, Givens bulge chase) with deflation on negligible
//! subdiagonals. Only eigenvalues are produced, so every rotation is applied
//! to the active window alone.
//!
//! The centrosymmetric path reduces `M` to `diag(T1, T2)` first and solves
//! the two half-size blocks, about a quarter of the dense cost.

use num_complex::Complex64;

use crate::error::{EigenError, Error, Result};
use crate::linalg::{ComplexMatrix, Spectrum};
use crate::reduction::block_reduce;
use crate::sampling::CentrosymmetricMatrix;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;

/// Sweeps allowed per matrix dimension before giving up.
const MAX_SWEEPS_PER_DIM: usize = 30;
/// Every this many sweeps without deflation, use an ad hoc shift.
const EXCEPTIONAL_SHIFT_PERIOD: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// All eigenvalues of a square matrix.
///
/// `tol` is the contract tolerance: the result is rejected if
/// `|Σλ - Tr M| > tol·n·‖M‖` or `|Σλ² - Tr M²| > tol·n·‖M‖²`.
pub fn eigenvalues_dense(m: &ComplexMatrix, tol: f64) -> Result<Spectrum> {
    m.require_square()?;
    if let Some(pos) = m.entries().iter().position(|z| !z.is_finite()) {
        return Err(Error::NonFinite {
            row: pos / m.n_cols(),
            col: pos % m.n_cols(),
        });
    }
    let n = m.n_rows();
    let mut h = m.entries().to_vec();
    balance(&mut h, n);
    hessenberg(&mut h, n);
    let eigenvalues = hessenberg_qr(&mut h, n)?;
    let spec = Spectrum::new(eigenvalues);
    check_trace_identities(m, &spec, tol)?;
    Ok(spec)
}

/// Eigenvalues of a centrosymmetric matrix via its block reduction.
pub fn eigenvalues_centrosymmetric(m: &CentrosymmetricMatrix, tol: f64) -> Result<Spectrum> {
    if m.n() == 1 {
        return Ok(Spectrum::new(vec![m.matrix()[(0, 0)]]));
    }
    let r = block_reduce(m)?;
    let (s1, s2) = rayon::join(|| eigenvalues_dense(&r.t1, tol), || eigenvalues_dense(&r.t2, tol));
    Ok(s1?.union(s2?))
}

pub fn spectral_radius(spec: &Spectrum) -> Result<f64> {
    spec.eigenvalues()
        .iter()
        .map(|z| z.norm())
        .reduce(f64::max)
        .ok_or(Error::EmptySpectrum)
}

/// Absolute residuals `(|Σλ - Tr M|, |Σλ² - Tr M²|)`.
pub fn trace_identity_residuals(m: &ComplexMatrix, spec: &Spectrum) -> Result<(f64, f64)> {
    m.require_square()?;
    let n = m.n_rows();
    let tr = m.trace()?;
    let mut tr2 = ZERO;
    for i in 0..n {
        for j in 0..n {
            tr2 += m[(i, j)] * m[(j, i)];
        }
    }
    Ok(((spec.sum() - tr).norm(), (spec.power_sum(2) - tr2).norm()))
}

fn check_trace_identities(m: &ComplexMatrix, spec: &Spectrum, tol: f64) -> Result<()> {
    let n = m.n_rows() as f64;
    let norm = m.frobenius_norm();
    let (r1, r2) = trace_identity_residuals(m, spec)?;
    // Allow a floor of a few ulps per entry for tiny matrices and tol.
    let floor = 64.0 * f64::EPSILON * n;
    if r1 > tol * n * norm + floor * norm || r2 > tol * n * norm * norm + floor * norm * norm {
        return Err(Error::InvalidArgument(format!(
            "eigenvalues violate trace identities (residuals {r1:e}, {r2:e}; tol {tol:e})"
        )));
    }
    Ok(())
}

/// Largest distance in a greedy nearest-neighbour matching of two multisets,
/// after sorting both by `(re, im)`. `None` if the sizes differ.
pub fn match_spectra(a: &Spectrum, b: &Spectrum) -> Option<f64> {
    if a.source_dim() != b.source_dim() {
        return None;
    }
    let sort = |s: &Spectrum| {
        let mut v = s.eigenvalues().to_vec();
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    };
    let xs = sort(a);
    let ys = sort(b);
    let mut used = vec![false; ys.len()];
    let mut worst = 0.0f64;
    for x in &xs {
        let (best, dist) = ys
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, y)| (i, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))?;
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

/// Diagonal similarity scaling by powers of two so that row and column
/// off-diagonal norms are comparable.
fn balance(a: &mut [Complex64], n: usize) {
    const RADIX: f64 = 2.0;
    const RADIX_SQ: f64 = RADIX * RADIX;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j * n + i].l1_norm();
                    r += a[i * n + j].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX_SQ;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX_SQ;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                let inv = 1.0 / f;
                a[i * n..(i + 1) * n].iter_mut().for_each(|z| *z *= inv);
                for j in 0..n {
                    a[j * n + i] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut [Complex64], n: usize) {
    if n < 3 {
        return;
    }
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let alpha = a[(k + 1) * n + k];
        let tail: f64 = (k + 2..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let norm = (alpha.norm_sqr() + tail).sqrt();
        let phase = if alpha == ZERO {
            Complex64::new(1.0, 0.0)
        } else {
            alpha / alpha.norm()
        };
        let v = &mut v[..len];
        v[0] = alpha + phase * norm;
        for i in 1..len {
            v[i] = a[(k + 1 + i) * n + k];
        }
        let beta = 2.0 / (v[0].norm_sqr() + tail);

        // Left: rows k+1.., columns k+1.. (column k is set explicitly below).
        let w = &mut w[..n];
        w[k + 1..].iter_mut().for_each(|x| *x = ZERO);
        for (i, vi) in v.iter().enumerate() {
            let vc = vi.conj();
            let row = &a[(k + 1 + i) * n..(k + 2 + i) * n];
            for j in k + 1..n {
                w[j] += vc * row[j];
            }
        }
        for (i, vi) in v.iter().enumerate() {
            let f = vi * beta;
            let row = &mut a[(k + 1 + i) * n..(k + 2 + i) * n];
            for j in k + 1..n {
                row[j] -= f * w[j];
            }
        }
        a[(k + 1) * n + k] = -phase * norm;
        for i in k + 2..n {
            a[i * n + k] = ZERO;
        }

        // Right: all rows, columns k+1..
        for r in 0..n {
            let row = &mut a[r * n + k + 1..(r + 1) * n];
            let s: Complex64 = row.iter().zip(v.iter()).map(|(x, vi)| x * vi).sum();
            if s == ZERO {
                continue;
            }
            let f = s * beta;
            for (x, vi) in row.iter_mut().zip(v.iter()) {
                *x -= f * vi.conj();
            }
        }
    }
}

/// Rotation `[c s; -conj(s) c]` mapping `(f, g)` to `(r, 0)`.
#[inline]
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO, f);
    }
    let gn = g.norm();
    if f == ZERO {
        return (0.0, g.conj() / gn, Complex64::new(gn, 0.0));
    }
    let fn_ = f.norm();
    let nrm = fn_.hypot(gn);
    let phase = f / fn_;
    (fn_ / nrm, phase * g.conj() / nrm, phase * nrm)
}

#[inline]
fn rotate_rows(h: &mut [Complex64], n: usize, k: usize, cols: std::ops::RangeInclusive<usize>, c: f64, s: Complex64) {
    let (top, bottom) = h.split_at_mut((k + 1) * n);
    let rk = &mut top[k * n..];
    let rk1 = &mut bottom[..n];
    let sc = s.conj();
    for j in cols {
        let a = rk[j];
        let b = rk1[j];
        rk[j] = a * c + s * b;
        rk1[j] = b * c - sc * a;
    }
}

#[inline]
fn rotate_cols(h: &mut [Complex64], n: usize, k: usize, rows: std::ops::RangeInclusive<usize>, c: f64, s: Complex64) {
    let sc = s.conj();
    for r in rows {
        let a = h[r * n + k];
        let b = h[r * n + k + 1];
        h[r * n + k] = a * c + sc * b;
        h[r * n + k + 1] = b * c - s * a;
    }
}

fn two_by_two_eigenvalues(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mid = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    // Pick the root of larger modulus first, recover the other from the
    // determinant to avoid cancellation.
    let big = if (mid + disc).norm() >= (mid - disc).norm() {
        mid + disc
    } else {
        mid - disc
    };
    if big == ZERO {
        return (ZERO, ZERO);
    }
    let det = a * d - b * c;
    (big, det / big)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let (x, y) = two_by_two_eigenvalues(a, b, c, d);
    if (x - d).norm() <= (y - d).norm() {
        x
    } else {
        y
    }
}

/// Eigenvalues of an upper Hessenberg matrix, destroying it.
fn hessenberg_qr(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>, EigenError> {
    let eps = f64::EPSILON;
    let safe_min = f64::MIN_POSITIVE;
    let max_iterations = MAX_SWEEPS_PER_DIM * n.max(1);
    let mut found: Vec<Complex64> = Vec::with_capacity(n);
    let mut iterations = 0usize;
    // Active window is rows/cols lo..=hi; `remaining` counts undeflated rows.
    let mut remaining = n;

    while remaining > 0 {
        let hi = remaining - 1;
        let mut since_deflation = 0usize;
        loop {
            let mut lo = 0;
            for k in (1..=hi).rev() {
                let sub = h[k * n + k - 1].norm();
                let diag = h[(k - 1) * n + k - 1].norm() + h[k * n + k].norm();
                if sub <= eps * diag || sub <= safe_min {
                    h[k * n + k - 1] = ZERO;
                    lo = k;
                    break;
                }
            }

            if lo == hi {
                found.push(h[hi * n + hi]);
                remaining -= 1;
                break;
            }
            if lo + 1 == hi {
                let (x, y) = two_by_two_eigenvalues(
                    h[lo * n + lo],
                    h[lo * n + hi],
                    h[hi * n + lo],
                    h[hi * n + hi],
                );
                found.push(x);
                found.push(y);
                remaining -= 2;
                break;
            }
            if iterations >= max_iterations {
                return Err(EigenError {
                    iterations,
                    found,
                    active: (lo, hi),
                });
            }
            iterations += 1;
            since_deflation += 1;

            let shift = if since_deflation % EXCEPTIONAL_SHIFT_PERIOD == 0 {
                h[hi * n + hi] + 0.75 * h[hi * n + hi - 1].re.abs()
            } else {
                wilkinson_shift(
                    h[(hi - 1) * n + hi - 1],
                    h[(hi - 1) * n + hi],
                    h[hi * n + hi - 1],
                    h[hi * n + hi],
                )
            };

            // Introduce the bulge.
            let (c, s, _) = givens(h[lo * n + lo] - shift, h[(lo + 1) * n + lo]);
            rotate_rows(h, n, lo, lo..=hi, c, s);
            rotate_cols(h, n, lo, lo..=(lo + 2).min(hi), c, s);

            // Chase it down the subdiagonal.
            for k in lo + 1..hi {
                let (c, s, r) = givens(h[k * n + k - 1], h[(k + 1) * n + k - 1]);
                h[k * n + k - 1] = r;
                h[(k + 1) * n + k - 1] = ZERO;
                rotate_rows(h, n, k, k..=hi, c, s);
                rotate_cols(h, n, k, lo..=(k + 2).min(hi), c, s);
            }
        }
    }
    Ok(found)
}
