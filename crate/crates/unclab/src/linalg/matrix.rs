//! Dense complex matrices, row-major, `f64` components.
//!
//! Everything downstream (cone solvers, dilations, moment matrices) runs on
//! this one carrier type. Sizes stay at desk scale (a few hundred at most),
//! so all kernels are straightforward O(n^3) loops with no blocking.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix. Entries are stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "entry count {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix entry by entry from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Square diagonal matrix from real entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// 1x1 matrix holding a single scalar.
    pub fn scalar(z: Complex64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![z],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "matrix add: shape mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "matrix sub: shape mismatch"
        );
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, t: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * t).collect(),
        }
    }

    pub fn scale_re(&self, t: f64) -> Self {
        self.scale(Complex64::new(t, 0.0))
    }

    pub fn neg(&self) -> Self {
        self.scale_re(-1.0)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matrix multiply: inner dimensions differ"
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of `A - A*`.
    pub fn hermitian_deviation(&self) -> f64 {
        assert!(self.is_square(), "hermitian deviation of a non-square matrix");
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_deviation() <= tol
    }

    /// `(A + A*) / 2`.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square(), "hermitize a non-square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Copy of the `nr x nc` submatrix starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of range");
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(
            r0 + b.rows <= self.rows && c0 + b.cols <= self.cols,
            "set_block out of range"
        );
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Kronecker product; the left factor indexes the outer blocks.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// True when every entry agrees with `other` bit for bit.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols, "index out of range");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols, "index out of range");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Reindexes a square matrix of size `outer * inner` from outer-blocks-of-inner
/// layout to inner-blocks-of-outer layout.
///
/// Row/column index `a * inner + b` (block `a`, position `b`) moves to
/// `b * outer + a`. Applying the shuffle twice with the arguments swapped
/// returns the original matrix, and the Frobenius norm is preserved exactly
/// since this is a permutation of entries.
pub fn canonical_shuffle(x: &ComplexMatrix, outer: usize, inner: usize) -> Result<ComplexMatrix> {
    let n = outer * inner;
    if !x.is_square() || x.rows() != n {
        return Err(Error::Dimension(format!(
            "canonical shuffle expects a {n}x{n} matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let perm = |v: usize| -> usize {
        let a = v / inner;
        let b = v % inner;
        b * outer + a
    };
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(perm(r), perm(c))] = x[(r, c)];
        }
    }
    Ok(out)
}

pub fn vec_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len(), "inner product: length mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// Wire format shared by every artifact:
// {"rows": R, "cols": C, "data": [[re, im], ...]} row-major.

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let wire = Wire {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let data: Vec<Complex64> = wire
            .data
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let m = ComplexMatrix::new(wire.rows, wire.cols, data)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        if !m.all_finite() {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_identity() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, 0.5));
        let id = ComplexMatrix::identity(3);
        assert_eq!(a.matmul(&id), a);
        assert_eq!(id.matmul(&a), a);
    }

    #[test]
    fn adjoint_of_product() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c(i as f64 + 1.0, j as f64 - 1.0));
        let b = ComplexMatrix::from_fn(3, 2, |i, j| c(j as f64, i as f64 * 0.5));
        let lhs = a.matmul(&b).adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint());
        assert!(lhs.sub(&rhs).frobenius_norm() < 1e-14);
    }

    #[test]
    fn shuffle_trivial_and_involution() {
        // outer = inner = 1 leaves the matrix unchanged
        let x = ComplexMatrix::scalar(c(2.0, -1.0));
        assert_eq!(canonical_shuffle(&x, 1, 1).unwrap(), x);

        // E12 (x) E21 in M2(M2) moves to E21 (x) E12 layout
        let e12 = ComplexMatrix::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { ONE } else { ZERO });
        let e21 = e12.transpose();
        let x = e12.kron(&e21);
        let y = canonical_shuffle(&x, 2, 2).unwrap();
        assert!(y.sub(&e21.kron(&e12)).frobenius_norm() == 0.0);

        // double shuffle with swapped arguments is the identity
        let x = ComplexMatrix::from_fn(6, 6, |i, j| c((i + 2 * j) as f64, (i * j) as f64));
        let once = canonical_shuffle(&x, 2, 3).unwrap();
        let twice = canonical_shuffle(&once, 3, 2).unwrap();
        assert!(twice.bit_eq(&x));
        assert_eq!(once.frobenius_norm(), x.frobenius_norm());
    }

    #[test]
    fn shuffle_rejects_bad_size() {
        let x = ComplexMatrix::zeros(5, 5);
        assert!(canonical_shuffle(&x, 2, 3).is_err());
    }

    #[test]
    fn kron_block_structure() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i + 1) as f64, j as f64));
        let b = ComplexMatrix::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 6);
        assert_eq!(k.block(0, 3, 3, 3).sub(&b.scale(a[(0, 1)])).frobenius_norm(), 0.0);
    }

    #[test]
    fn json_round_trip_exact() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| c(1.0 / (i + 1) as f64, -(j as f64) / 3.0));
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.starts_with("{\"rows\":2,\"cols\":3,\"data\":[["));
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert!(back.bit_eq(&m));
    }

    #[test]
    fn json_rejects_nan_and_bad_shape() {
        assert!(serde_json::from_str::<ComplexMatrix>(
            "{\"rows\":1,\"cols\":1,\"data\":[[null,0.0]]}"
        )
        .is_err());
        assert!(serde_json::from_str::<ComplexMatrix>(
            "{\"rows\":2,\"cols\":2,\"data\":[[1.0,0.0]]}"
        )
        .is_err());
    }
}
