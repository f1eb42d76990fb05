//! Spectral statistics of random centrosymmetric matrices.
//!
//! A centrosymmetric matrix satisfies `m[i][j] = m[n-1-i][n-1-j]`. An
//! orthogonal similarity splits it into two half-size blocks, which this
//! crate uses both as a cheaper eigenvalue path and as the object of its
//! Monte Carlo experiments: circular-law checks, central limit behaviour of
//! linear eigenvalue statistics, resolvent-trace covariances, and exact
//! Gaussian trace moments.

pub mod eigen;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod output;
pub mod parallel;
pub mod reduction;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use error::{EigenError, Error, Result};
pub use linalg::{ComplexMatrix, ComplexScalar, Spectrum};
pub use rng::SeedStream;
pub use sampling::{CentrosymmetricMatrix, EntryDistribution};
