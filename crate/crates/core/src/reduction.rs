//! Orthogonal block reduction of centrosymmetric matrices.
//!
//! For `n = 2s` write `M = [[A, B], [C, D]]`; for `n = 2s + 1` write
//! `M = [[A, x, B], [y, q, yJ], [C, Jx, D]]` with `s x s` blocks. Then
//! `Q^T M Q = diag(T1, T2)` with
//!
//! ```text
//! T1 = A + JC                    (n even)
//! T1 = [[A + JC, √2 x], [√2 y, q]]  (n odd)
//! T2 = A - JC
//! ```
//!
//! The blocks are read straight off the quadrants in `O(n^2)`; `Q` is only
//! materialized for verification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matmul, ComplexMatrix};
use crate::sampling::CentrosymmetricMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct BlockReduction {
    pub t1: ComplexMatrix,
    pub t2: ComplexMatrix,
    pub q: ComplexMatrix,
    pub parity: Parity,
}

impl BlockReduction {
    pub fn n(&self) -> usize {
        self.t1.n_rows() + self.t2.n_rows()
    }
}

/// The real orthogonal matrix `Q` with `Q^T M Q = diag(T1, T2)`.
///
/// Even `n = 2s`: `Q = [[I, -I], [J, J]] / √2`.
/// Odd `n = 2s + 1`: `Q = [[I, 0, -I], [0, √2, 0], [J, 0, J]] / √2`.
pub fn build_orthogonal_q(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "orthogonal reduction needs n >= 2, got {n}"
        )));
    }
    let s = n / 2;
    let odd = n % 2 == 1;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    // Column offset of the second half.
    let off = s + usize::from(odd);
    let mut q = ComplexMatrix::zeros(n, n);
    for i in 0..s {
        q[(i, i)] = h;
        q[(i, off + i)] = -h;
        // Bottom rows: J in both halves.
        q[(off + i, s - 1 - i)] = h;
        q[(off + i, off + s - 1 - i)] = h;
    }
    if odd {
        q[(s, s)] = Complex64::new(1.0, 0.0);
    }
    Ok(q)
}

/// Splits `M` into `T1` and `T2` directly from its quadrants.
pub fn block_reduce(m: &CentrosymmetricMatrix) -> Result<BlockReduction> {
    let a = m.matrix();
    let n = a.n_rows();
    let q = build_orthogonal_q(n)?;
    let s = n / 2;
    let parity = if n % 2 == 0 { Parity::Even } else { Parity::Odd };
    let t1_dim = n - s;

    // (JC)[i][j] is M[n-1-i][j] for both parities.
    let mut t1 = ComplexMatrix::zeros(t1_dim, t1_dim);
    let mut t2 = ComplexMatrix::zeros(s, s);
    for i in 0..s {
        for j in 0..s {
            let upper = a[(i, j)];
            let lower = a[(n - 1 - i, j)];
            t1[(i, j)] = upper + lower;
            t2[(i, j)] = upper - lower;
        }
    }
    if parity == Parity::Odd {
        let r2 = std::f64::consts::SQRT_2;
        for i in 0..s {
            t1[(i, s)] = a[(i, s)] * r2;
            t1[(s, i)] = a[(s, i)] * r2;
        }
        t1[(s, s)] = a[(s, s)];
    }
    Ok(BlockReduction { t1, t2, q, parity })
}

/// `max |Q^T Q - I|` elementwise.
pub fn orthogonality_residual(q: &ComplexMatrix) -> Result<f64> {
    let qtq = matmul(&q.transpose(), q)?;
    Ok(qtq.sub(&ComplexMatrix::identity(q.n_rows()))?.max_abs())
}

/// Largest elementwise deviation of `Q^T M Q` from `diag(T1, T2)`, or of
/// `Q^T Q` from `I`, whichever is worse.
pub fn verify_reduction(m: &CentrosymmetricMatrix, r: &BlockReduction) -> Result<f64> {
    let n = m.n();
    if r.q.n_rows() != n || r.q.n_cols() != n || r.n() != n || !r.t1.is_square() || !r.t2.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "reduction blocks {}+{} and Q {}x{} do not fit a {n}x{n} matrix",
            r.t1.n_rows(),
            r.t2.n_rows(),
            r.q.n_rows(),
            r.q.n_cols()
        )));
    }
    let qt = r.q.transpose();
    let similar = matmul(&matmul(&qt, m.matrix())?, &r.q)?;
    let target = ComplexMatrix::block_diag(&r.t1, &r.t2);
    let residual = similar.sub(&target)?.max_abs();
    Ok(residual.max(orthogonality_residual(&r.q)?))
}
