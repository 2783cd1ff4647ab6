//! Haar-distributed random unitary and orthogonal matrices in factored form,
//! with an O(n²) eigenvalue solver.
//!
//! A Haar matrix is sampled directly as a product of `n - 1` core rotations
//! and a unitary diagonal, `H = G₁⋯G_{n-1}·D`, which is unitary upper
//! Hessenberg. Its eigenvalues come from a core-chasing QR iteration that
//! never forms the dense matrix.
//!
//! ```
//! use haar_eigs::{eigenvalues, sample_descending, Field, RngStream, SampleSpec, SolverOptions};
//!
//! let spec = SampleSpec::new(10, Field::Complex);
//! let mut rng = RngStream::new(7);
//! let h = sample_descending::<f64>(&spec, &mut rng).unwrap();
//! let eig = eigenvalues(h, &SolverOptions::default()).unwrap();
//! assert_eq!(eig.len(), 10);
//! ```

pub mod bench;
pub mod core_rotation;
pub mod error;
pub mod factored_form;
pub mod haar_dense;
pub mod rand_dist;
pub mod scalar;
pub mod stats;
pub mod unitary_qr;
pub mod validation;

#[cfg(test)]
mod testutil;

pub use core_rotation::{CoreRotation, DiagonalPair, IndexedRotation};
pub use error::{Error, Result};
pub use factored_form::{
    refactor_to_rotations, sample_descending, sample_householder_form, DescendingFactorization, Field,
    HouseholderFactorization, SampleSpec,
};
pub use haar_dense::{sample_haar_dense, trace_power_sums, umult, DenseMatrix};
pub use rand_dist::RngStream;
pub use scalar::{unit_phase, Real};
pub use stats::{EigenSample, Histogram};
pub use unitary_qr::{eigenvalues, SolverOptions};

/// Double-precision core rotation.
pub type Rotation = CoreRotation<f64>;
/// Double-precision descending factorization.
pub type Factorization = DescendingFactorization<f64>;
/// Double-precision dense matrix.
pub type Matrix = DenseMatrix<f64>;
/// Single-precision core rotation.
pub type Rotation32 = CoreRotation<f32>;
/// Single-precision descending factorization.
pub type Factorization32 = DescendingFactorization<f32>;
