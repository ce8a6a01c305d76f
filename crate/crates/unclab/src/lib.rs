//! Numerical laboratory for the operator system `V_n` spanned by the entries
//! of the universal `n x n` unitary and their adjoints.
//!
//! `V_n` is realized concretely as the quotient `M_2n / J_2n` (block-diagonal
//! trace-zero kernel), and every element of `V_n (x) M_p` is stored in a
//! canonical coefficient form. On top of that the crate provides:
//!
//! * [`cones`] — maximal-tensor-cone membership by positive matrix completion
//!   (Dykstra alternating projections) and minimal-cone refutation by
//!   contraction witnesses, with independently checkable certificates;
//! * [`dilation`] — unitary dilation of contractions, evaluation of the
//!   induced unital completely positive maps, and finite-dimensional
//!   compress-then-dilate representations;
//! * [`correlations`] — sampling of the tensor-model unitary correlation set
//!   `UC_q` and a level-1 moment-matrix outer approximation of `UC_qc`;
//! * [`linalg`] — the self-contained dense complex kernels everything runs on,
//!   including the seeded, bit-reproducible random streams.
//!
//! All public operations are pure functions on immutable values and safe to
//! call concurrently; random streams are single-owner and split via
//! [`linalg::RngState::derive`].

pub mod cones;
pub mod correlations;
pub mod dilation;
pub mod error;
pub mod linalg;
pub mod opsys;

pub use error::{Error, Result};
pub use linalg::{Complex64, ComplexMatrix, RngState};
