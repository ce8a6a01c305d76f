//! Self-contained dense complex linear algebra: the matrix carrier type,
//! Hermitian eigendecomposition, SVD, QR, PSD projection and square root, the
//! canonical shuffle, and seeded random samplers. No external numeric
//! backends; reproducibility across platforms takes priority over speed.

pub mod eig;
pub mod matrix;
pub mod rng;
pub mod svd;

pub use eig::{herm_eig, lambda_min, psd_project, psd_sqrt, EigDecomposition};
pub use matrix::{canonical_shuffle, vec_inner, vec_norm, Complex64, ComplexMatrix};
pub use rng::{
    ginibre, random_contraction, random_hermitian, random_psd, random_unit_vector,
    random_unitary, RngState,
};
pub use svd::{clip_operator_norm, operator_norm, qr, svd, Svd};
