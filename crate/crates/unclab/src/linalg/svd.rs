//! Singular value decomposition via Hermitian eigendecompositions of the Gram
//! matrix, plus Householder QR.
//!
//! `svd` diagonalizes `A*A` (or `AA*` for wide inputs), takes singular values
//! as square roots, and reconciles left vectors as `u_i = A v_i / s_i`, which
//! keeps the reconstruction residual at eigensolver accuracy independent of
//! how small individual singular values are. A final two-pass Gram-Schmidt
//! restores orthonormality of the reconciled columns. Adequate at desk scale.

use crate::error::{Error, Result};
use crate::linalg::eig::herm_eig;
use crate::linalg::matrix::{vec_inner, vec_norm, Complex64, ComplexMatrix, ZERO};

/// Thin SVD: `A = U diag(s) V*` with `s` descending and `U`, `V` having
/// orthonormal columns (`k = min(rows, cols)` of them).
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// `U diag(s') V*` with replacement singular values `s'`.
    pub fn recompose_with(&self, s: &[f64]) -> ComplexMatrix {
        assert_eq!(s.len(), self.singular_values.len(), "singular value count");
        let us = ComplexMatrix::from_fn(self.u.rows(), self.u.cols(), |i, j| self.u[(i, j)] * s[j]);
        us.matmul(&self.v.adjoint())
    }

    pub fn recompose(&self) -> ComplexMatrix {
        self.recompose_with(&self.singular_values)
    }

    pub fn reconstruction_residual(&self, a: &ComplexMatrix) -> f64 {
        self.recompose().sub(a).frobenius_norm()
    }
}

pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.all_finite() {
        return Err(Error::InvalidInput("matrix has NaN or Inf entries".into()));
    }
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        })
    }
}

fn svd_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let gram = a.adjoint().matmul(a); // n x n Hermitian PSD
    let eig = herm_eig(&gram)?;

    // descending singular order
    let mut order: Vec<usize> = (0..n).collect();
    order.reverse();
    let mut s: Vec<f64> = order
        .iter()
        .map(|&k| eig.eigenvalues[k].max(0.0).sqrt())
        .collect();
    let v = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

    // The Gram route cannot resolve singular values below sqrt(eps) * s_max:
    // their eigenvalues sit under the rounding floor eps * s_max^2 and the
    // associated directions are noise. Flush them to exact zero and fill the
    // columns by completion instead of amplifying the noise through A v / s.
    let cutoff = s.first().copied().unwrap_or(0.0) * 1e-7;
    for x in s.iter_mut() {
        if *x <= cutoff {
            *x = 0.0;
        }
    }
    let mut u_cols: Vec<Option<Vec<Complex64>>> = vec![None; n];
    for j in 0..n {
        if s[j] > 0.0 {
            let vj: Vec<Complex64> = (0..n).map(|i| v[(i, j)]).collect();
            let uj: Vec<Complex64> = a.matvec(&vj).into_iter().map(|z| z / s[j]).collect();
            u_cols[j] = Some(uj);
        }
    }
    let mut u = complete_orthonormal(m, u_cols);
    orthonormalize_columns(&mut u);
    Ok(Svd {
        u,
        singular_values: s,
        v,
    })
}

/// Fills in missing columns with standard basis vectors orthogonalized
/// against the present ones. For each slot the basis vector with the
/// largest residual after projection is taken, which cannot run dry while
/// fewer than `m` columns are built. Deterministic.
fn complete_orthonormal(m: usize, cols: Vec<Option<Vec<Complex64>>>) -> ComplexMatrix {
    let n = cols.len();
    let mut built: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut missing: Vec<usize> = Vec::new();
    let mut out: Vec<Vec<Complex64>> = vec![Vec::new(); n];
    for (j, col) in cols.into_iter().enumerate() {
        match col {
            Some(c) => {
                built.push(c.clone());
                out[j] = c;
            }
            None => missing.push(j),
        }
    }
    for j in missing {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for seed in 0..m {
            let mut cand = vec![ZERO; m];
            cand[seed] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &built {
                    let coeff = vec_inner(b, &cand);
                    for (x, y) in cand.iter_mut().zip(b) {
                        *x -= coeff * y;
                    }
                }
            }
            let norm = vec_norm(&cand);
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("at least one basis candidate");
        assert!(norm > 1e-8, "orthonormal completion degenerated");
        let unit: Vec<Complex64> = cand.into_iter().map(|z| z / norm).collect();
        built.push(unit.clone());
        out[j] = unit;
    }
    ComplexMatrix::from_fn(m, n, |i, j| out[j][i])
}

/// Two passes of modified Gram-Schmidt over the columns, in order.
fn orthonormalize_columns(u: &mut ComplexMatrix) {
    let (m, n) = (u.rows(), u.cols());
    for _pass in 0..2 {
        for j in 0..n {
            let mut col: Vec<Complex64> = (0..m).map(|i| u[(i, j)]).collect();
            for k in 0..j {
                let prev: Vec<Complex64> = (0..m).map(|i| u[(i, k)]).collect();
                let coeff = vec_inner(&prev, &col);
                for (x, y) in col.iter_mut().zip(&prev) {
                    *x -= coeff * y;
                }
            }
            let norm = vec_norm(&col);
            if norm > 1e-300 {
                for x in col.iter_mut() {
                    *x /= norm;
                }
            }
            for i in 0..m {
                u[(i, j)] = col[i];
            }
        }
    }
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.all_finite() {
        return Err(Error::InvalidInput("matrix has NaN or Inf entries".into()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = if a.rows() >= a.cols() {
        a.adjoint().matmul(a)
    } else {
        a.matmul(&a.adjoint())
    };
    Ok(herm_eig(&gram)?.lambda_max().max(0.0).sqrt())
}

/// Projects onto the operator-norm ball of radius `bound` by clipping
/// singular values.
pub fn clip_operator_norm(a: &ComplexMatrix, bound: f64) -> Result<ComplexMatrix> {
    let dec = svd(a)?;
    if dec.singular_values.first().copied().unwrap_or(0.0) <= bound {
        return Ok(a.clone());
    }
    let s: Vec<f64> = dec.singular_values.iter().map(|&x| x.min(bound)).collect();
    Ok(dec.recompose_with(&s))
}

/// Householder QR of a square or tall matrix: `A = Q R` with `Q` having
/// orthonormal columns (`m x n`) and `R` upper triangular (`n x n`).
pub fn qr(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let (m, n) = (a.rows(), a.cols());
    assert!(m >= n, "qr expects a square or tall matrix");
    let mut r = a.clone();
    // Householder vectors, applied to an identity afterwards to form Q.
    let mut vs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
        let norm = vec_norm(&v);
        if norm == 0.0 {
            vs.push(Vec::new());
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vnorm = vec_norm(&v);
        if vnorm < 1e-300 {
            vs.push(Vec::new());
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // R <- (I - 2 v v*) R on rows k..m
        for j in k..n {
            let mut coeff = ZERO;
            for i in k..m {
                coeff += v[i - k].conj() * r[(i, j)];
            }
            coeff *= 2.0;
            for i in k..m {
                let delta = coeff * v[i - k];
                r[(i, j)] -= delta;
            }
        }
        vs.push(v);
    }
    // Q = H_0 H_1 ... H_{n-1} applied to the thin identity.
    let mut q = ComplexMatrix::from_fn(m, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });
    for k in (0..n).rev() {
        let v = &vs[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let mut coeff = ZERO;
            for i in k..m {
                coeff += v[i - k].conj() * q[(i, j)];
            }
            coeff *= 2.0;
            for i in k..m {
                let delta = coeff * v[i - k];
                q[(i, j)] -= delta;
            }
        }
    }
    // zero the strictly-lower part of R and return the n x n top block
    let r_top = ComplexMatrix::from_fn(n, n, |i, j| if i <= j { r[(i, j)] } else { ZERO });
    (q, r_top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rng::{ginibre, RngState};

    #[test]
    fn identity_singular_values() {
        let dec = svd(&ComplexMatrix::identity(3)).unwrap();
        assert!(dec.singular_values.iter().all(|&s| (s - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn diagonal_singular_values_descending() {
        let a = ComplexMatrix::from_real_diag(&[2.0, 0.0]);
        let dec = svd(&a).unwrap();
        assert!((dec.singular_values[0] - 2.0).abs() <= 1e-12);
        assert!(dec.singular_values[1].abs() <= 1e-12);
    }

    #[test]
    fn rectangular_reconstruction() {
        let mut rng = RngState::new(12);
        for &(m, n) in &[(4usize, 3usize), (3, 4), (5, 5), (6, 2)] {
            let a = ComplexMatrix::from_fn(m, n, |_, _| rng.next_complex_gaussian());
            let dec = svd(&a).unwrap();
            let scale = a.frobenius_norm().max(1.0);
            assert!(
                dec.reconstruction_residual(&a) <= 1e-9 * scale,
                "residual too large at {m}x{n}"
            );
            let k = m.min(n);
            let ugram = dec.u.adjoint().matmul(&dec.u);
            let vgram = dec.v.adjoint().matmul(&dec.v);
            assert!(ugram.sub(&ComplexMatrix::identity(k)).frobenius_norm() <= 1e-10);
            assert!(vgram.sub(&ComplexMatrix::identity(k)).frobenius_norm() <= 1e-10);
            for w in dec.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(dec.singular_values.iter().all(|&s| s >= 0.0));
        }
    }

    #[test]
    fn rank_deficient_reconstruction() {
        // rank-1 matrix: completion path must still give orthonormal U, V
        let mut rng = RngState::new(13);
        let u: Vec<Complex64> = (0..4).map(|_| rng.next_complex_gaussian()).collect();
        let v: Vec<Complex64> = (0..4).map(|_| rng.next_complex_gaussian()).collect();
        let a = ComplexMatrix::from_fn(4, 4, |i, j| u[i] * v[j].conj());
        let dec = svd(&a).unwrap();
        assert!(dec.reconstruction_residual(&a) <= 1e-9 * a.frobenius_norm().max(1.0));
        let gram = dec.u.adjoint().matmul(&dec.u);
        assert!(gram.sub(&ComplexMatrix::identity(4)).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn operator_norm_matches_definition() {
        let a = ComplexMatrix::from_real_diag(&[3.0, -5.0]);
        assert!((operator_norm(&a).unwrap() - 5.0).abs() <= 1e-12);
    }

    #[test]
    fn clip_bounds_norm() {
        let mut rng = RngState::new(14);
        let a = ginibre(5, &mut rng);
        let c = clip_operator_norm(&a, 1.0).unwrap();
        assert!(operator_norm(&c).unwrap() <= 1.0 + 1e-12);
        // already inside the ball: returned unchanged
        let small = a.scale_re(1e-3 / operator_norm(&a).unwrap());
        let kept = clip_operator_norm(&small, 1.0).unwrap();
        assert!(kept.bit_eq(&small));
    }

    #[test]
    fn qr_factorization() {
        let mut rng = RngState::new(15);
        for &(m, n) in &[(4usize, 4usize), (6, 3)] {
            let a = ComplexMatrix::from_fn(m, n, |_, _| rng.next_complex_gaussian());
            let (q, r) = qr(&a);
            assert!(q.matmul(&r).sub(&a).frobenius_norm() <= 1e-12 * a.frobenius_norm().max(1.0));
            let gram = q.adjoint().matmul(&q);
            assert!(gram.sub(&ComplexMatrix::identity(n)).frobenius_norm() <= 1e-12);
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(r[(i, j)], ZERO);
                }
            }
        }
    }
}
