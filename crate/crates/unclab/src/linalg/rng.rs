//! Counter-based deterministic RNG and the random matrix samplers.
//!
//! The generator is a SplitMix64-style bit mixer over `seed + counter * GAMMA`.
//! It is specified here in full so any other implementation can reproduce the
//! streams bit for bit:
//!
//! * `next_u64`: increment the counter, then output
//!   `mix(seed + counter * 0x9E3779B97F4A7C15)` where `mix` is the xor-shift
//!   multiply chain below (all arithmetic mod 2^64).
//! * `next_f64`: top 53 bits of `next_u64`, scaled to `[0, 1)`.
//! * `next_gaussian`: Box-Muller cosine branch from two consecutive uniforms,
//!   `sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`. Two `u64` draws per normal.
//! * `next_complex_gaussian`: `(g1 + i g2) / sqrt(2)`, so `E|z|^2 = 1`.
//! * `derive(task)`: a fresh generator seeded with
//!   `mix(seed ^ mix(task + GAMMA))`; used to split work across tasks without
//!   sharing a stream.
//!
//! Matrices are filled row-major, real part drawn before imaginary part.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::{Complex64, ComplexMatrix};
use crate::linalg::svd::svd;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic counter-based random stream. Identical `(seed, call
/// sequence)` reproduces identical output bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    seed: u64,
    counter: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for task `task`. Pure in `self`.
    pub fn derive(&self, task: u64) -> Self {
        Self::new(mix(self.seed ^ mix(task.wrapping_add(GAMMA))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix(self.seed.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Standard complex normal, `E|z|^2 = 1`.
    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        let re = self.next_gaussian();
        let im = self.next_gaussian();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Square matrix of iid standard complex normals.
pub fn ginibre(d: usize, rng: &mut RngState) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| rng.next_complex_gaussian())
}

/// Random Hermitian matrix `(G + G*)/2` from a Ginibre draw.
pub fn random_hermitian(d: usize, rng: &mut RngState) -> ComplexMatrix {
    ginibre(d, rng).hermitize()
}

/// Random PSD matrix `G* G / d`.
pub fn random_psd(d: usize, rng: &mut RngState) -> ComplexMatrix {
    let g = ginibre(d, rng);
    g.adjoint().matmul(&g).scale_re(1.0 / d as f64).hermitize()
}

/// Haar-distributed unitary: QR of a Ginibre sample with the phases of the
/// R diagonal pushed into Q.
pub fn random_unitary(d: usize, rng: &mut RngState) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::InvalidInput("random_unitary requires d >= 1".into()));
    }
    let g = ginibre(d, rng);
    let (mut q, r) = crate::linalg::svd::qr(&g);
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            rjj / rjj.norm()
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// Random unit vector with iid complex normal direction.
pub fn random_unit_vector(dim: usize, rng: &mut RngState) -> Result<Vec<Complex64>> {
    if dim == 0 {
        return Err(Error::InvalidInput("random_unit_vector requires dim >= 1".into()));
    }
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| rng.next_complex_gaussian()).collect();
        let norm = crate::linalg::matrix::vec_norm(&v);
        if norm > 1e-150 {
            return Ok(v.into_iter().map(|z| z / norm).collect());
        }
    }
}

/// Random contraction in `M_n(M_r)`, i.e. an `nr x nr` matrix with operator
/// norm at most 1.
///
/// Recipe: Ginibre scaled by `1/(2 sqrt(nr))` (largest singular value lands
/// near 1), singular values clipped to 1, and with probability 1/2 the result
/// is rescaled so the norm is exactly 1, probing the boundary of the ball.
pub fn random_contraction(n: usize, r: usize, rng: &mut RngState) -> Result<ComplexMatrix> {
    if n == 0 || r == 0 {
        return Err(Error::InvalidInput("random_contraction requires n, r >= 1".into()));
    }
    let d = n * r;
    let g = ginibre(d, rng).scale_re(1.0 / (2.0 * (d as f64).sqrt()));
    let dec = svd(&g)?;
    let mut s: Vec<f64> = dec.singular_values.iter().map(|&x| x.min(1.0)).collect();
    let force_boundary = rng.next_f64() < 0.5;
    let smax = s.first().copied().unwrap_or(0.0);
    if force_boundary && smax > 0.0 {
        for x in s.iter_mut() {
            *x /= smax;
        }
    }
    Ok(dec.recompose_with(&s))
}
