//! Spectral graph featurization: Laplacian, symmetric eigendecomposition,
//! heat kernel signature (HKS) and its per-time-step histogram.

mod eigen;
mod hks;
mod matrix;

pub use eigen::{eig_sym, SpectralDecomposition, JACOBI_MAX_SWEEPS, JACOBI_OFF_DIAGONAL_TOL};
pub use hks::{
    featurize, featurize_all, heat_kernel_signature, heat_kernel_signature_at, hks_histogram,
    HksConfig, HksHistogram, HksMatrix,
};
pub use matrix::{laplacian, DenseSymMatrix};
