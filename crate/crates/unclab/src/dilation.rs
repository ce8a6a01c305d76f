//! Unitary dilation of contractions, evaluation of the induced universal ucp
//! maps on `V_n` elements, and compress-then-dilate finite-dimensional
//! representations.
//!
//! The dilation is the classic one-step construction
//! `V = [[T, sqrt(I - T T*)], [sqrt(I - T* T), -T*]]`; the intertwining
//! `T sqrt(I - T*T) = sqrt(I - TT*) T` makes `V` unitary. Every contraction
//! `T = (T_ij)` therefore induces a unital completely positive map on `V_n`
//! sending `u_ij` to `T_ij`, and evaluating that map on coefficients is
//! [`universal_ucp_eval`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::svd::operator_norm;
use crate::linalg::psd_sqrt;
use crate::opsys::VnElement;

/// Contraction inputs may exceed norm 1 by this much before being rejected;
/// the PSD square roots clip the tiny negative eigenvalues this produces.
pub const CONTRACTION_TOL: f64 = 1e-6;

/// Unitarity tolerance carried by [`Representation`].
pub const REPRESENTATION_TOL: f64 = 1e-9;

/// A finite-dimensional representation of the universal unitary: an `n x n`
/// grid of `d x d` blocks whose assembled `nd x nd` matrix is unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    n: usize,
    d: usize,
    blocks: Vec<Vec<ComplexMatrix>>,
}

/// One letter of a word in the generators: `U_ij` or, when `star` is set,
/// `U*_ij`. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordLetter {
    pub i: usize,
    pub j: usize,
    pub star: bool,
}

impl Representation {
    pub fn new(n: usize, d: usize, blocks: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput("Representation requires n, d >= 1".into()));
        }
        if blocks.len() != n || blocks.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("expected an {n} x {n} grid of blocks")));
        }
        for row in &blocks {
            for b in row {
                if b.rows() != d || b.cols() != d {
                    return Err(Error::Dimension(format!(
                        "blocks must be {d}x{d}, got {}x{}",
                        b.rows(),
                        b.cols()
                    )));
                }
            }
        }
        let rep = Self { n, d, blocks };
        let residual = rep.unitarity_residual();
        if residual.is_nan() || residual > REPRESENTATION_TOL {
            return Err(Error::NotUnitary(residual));
        }
        Ok(rep)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Generator image `U_ij`, 1-based.
    pub fn block(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[i - 1][j - 1]
    }

    /// The assembled `nd x nd` matrix `(U_ij)`.
    pub fn assemble(&self) -> ComplexMatrix {
        let (n, d) = (self.n, self.d);
        let mut out = ComplexMatrix::zeros(n * d, n * d);
        for i in 0..n {
            for j in 0..n {
                out.set_block(i * d, j * d, &self.blocks[i][j]);
            }
        }
        out
    }

    /// `||U*U - I||_F` of the assembled matrix.
    pub fn unitarity_residual(&self) -> f64 {
        let u = self.assemble();
        u.adjoint()
            .matmul(&u)
            .sub(&ComplexMatrix::identity(u.rows()))
            .frobenius_norm()
    }

    /// Evaluates a word in the generator images as an operator product.
    /// Words longer than 8 letters are rejected to bound cost.
    pub fn eval_word(&self, word: &[WordLetter]) -> Result<ComplexMatrix> {
        if word.len() > 8 {
            return Err(Error::InvalidInput(format!(
                "word length {} exceeds the supported maximum of 8",
                word.len()
            )));
        }
        let mut out = ComplexMatrix::identity(self.d);
        for letter in word {
            if !(1..=self.n).contains(&letter.i) || !(1..=self.n).contains(&letter.j) {
                return Err(Error::IndexMismatch(format!(
                    "letter ({}, {}) outside the {0} x {0} generator grid",
                    letter.i, letter.j
                )));
            }
            let factor = if letter.star {
                self.block(letter.i, letter.j).adjoint()
            } else {
                self.block(letter.i, letter.j).clone()
            };
            out = out.matmul(&factor);
        }
        Ok(out)
    }
}

fn check_contraction(t: &ComplexMatrix) -> Result<()> {
    if !t.all_finite() {
        return Err(Error::InvalidInput("matrix has NaN or Inf entries".into()));
    }
    let norm = operator_norm(t)?;
    if norm > 1.0 + CONTRACTION_TOL {
        return Err(Error::NotContraction(norm));
    }
    Ok(())
}

/// One-step unitary dilation of a contraction:
/// `V = [[T, sqrt(I - TT*)], [sqrt(I - T*T), -T*]]`, twice the size of `T`.
/// The upper-left corner holds the entries of `T` verbatim.
pub fn unitary_dilation(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !t.is_square() {
        return Err(Error::Dimension(format!(
            "dilation expects a square matrix, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    check_contraction(t)?;
    let k = t.rows();
    let id = ComplexMatrix::identity(k);
    let defect_left = psd_sqrt(&id.sub(&t.matmul(&t.adjoint())).hermitize())?;
    let defect_right = psd_sqrt(&id.sub(&t.adjoint().matmul(t)).hermitize())?;
    let mut v = ComplexMatrix::zeros(2 * k, 2 * k);
    v.set_block(0, 0, t);
    v.set_block(0, k, &defect_left);
    v.set_block(k, 0, &defect_right);
    v.set_block(k, k, &t.adjoint().neg());
    Ok(v)
}

/// Evaluates the universal ucp map induced by the contraction `T` (an
/// `nr x nr` matrix read as `n x n` blocks of size `r`) on the element `x`,
/// producing the `rp x rp` matrix
///
/// ```text
/// F(T, x) = I_r (x) A11 + sum_{Lambda+} (1/2n) T_{i, j-n} (x) A_ij
///                       + sum_{Lambda-} (1/2n) T*_{j, i-n} (x) A_ij .
/// ```
///
/// Kron ordering: the `r`-factor indexes outer blocks, so a vector index
/// decomposes as `row = r_index * p + p_index`. Hermitian `x` gives a
/// Hermitian result, unital in the sense that `x = 1 (x) I_p` maps to
/// `I_{rp}` for every `T`.
pub fn universal_ucp_eval(t: &ComplexMatrix, x: &VnElement) -> Result<ComplexMatrix> {
    let n = x.n();
    if !t.is_square() || !t.rows().is_multiple_of(n) || t.rows() == 0 {
        return Err(Error::Dimension(format!(
            "contraction must be square of size divisible by n={n}, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    check_contraction(t)?;
    let r = t.rows() / n;
    let inv = 1.0 / (2.0 * n as f64);
    let mut out = ComplexMatrix::identity(r).kron(x.a11());
    for (&(i, j), block) in x.stored_blocks() {
        let t_block = if j > n {
            // (i, j) in Lambda+: generator u_{i, j-n} maps to T_{i, j-n}
            t.block((i - 1) * r, (j - n - 1) * r, r, r)
        } else {
            // (i, j) in Lambda-: generator u*_{j, i-n} maps to (T_{j, i-n})*
            t.block((j - 1) * r, (i - n - 1) * r, r, r).adjoint()
        };
        out = out.add(&t_block.kron(block).scale_re(inv));
    }
    Ok(out)
}

/// Compress-then-dilate: cuts each generator image down to its leading
/// `m x m` corner (`V_ij = P_m U_ij P_m`), which assembles to a contraction,
/// and dilates the result back to a representation with `d = 2m`:
///
/// ```text
/// X_ij = [[V_ij, sqrt(I - V V*)_ij], [sqrt(I - V* V)_ij, -(V_ji)*]] .
/// ```
///
/// At `m = d` the `(1,1)` corners reproduce the input generators verbatim.
/// The projections are fixed to the leading coordinates for determinism.
pub fn rfd_compression(rep: &Representation, m: usize) -> Result<Representation> {
    if m == 0 || m > rep.d() {
        return Err(Error::InvalidInput(format!(
            "compression rank must satisfy 1 <= m <= {}, got {m}",
            rep.d()
        )));
    }
    let n = rep.n();
    let compressed: Vec<Vec<ComplexMatrix>> = (1..=n)
        .map(|i| (1..=n).map(|j| rep.block(i, j).block(0, 0, m, m)).collect())
        .collect();
    let mut v = ComplexMatrix::zeros(n * m, n * m);
    for (i, row) in compressed.iter().enumerate() {
        for (j, block) in row.iter().enumerate() {
            v.set_block(i * m, j * m, block);
        }
    }
    let id = ComplexMatrix::identity(n * m);
    let defect_left = psd_sqrt(&id.sub(&v.matmul(&v.adjoint())).hermitize())?;
    let defect_right = psd_sqrt(&id.sub(&v.adjoint().matmul(&v)).hermitize())?;

    let block_of = |big: &ComplexMatrix, i: usize, j: usize| big.block(i * m, j * m, m, m);
    let blocks: Vec<Vec<ComplexMatrix>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut x = ComplexMatrix::zeros(2 * m, 2 * m);
                    x.set_block(0, 0, &compressed[i][j]);
                    x.set_block(0, m, &block_of(&defect_left, i, j));
                    x.set_block(m, 0, &block_of(&defect_right, i, j));
                    x.set_block(m, m, &compressed[j][i].adjoint().neg());
                    x
                })
                .collect()
        })
        .collect();
    Representation::new(n, 2 * m, blocks)
}

/// Block-diagonal representation from a list of unitaries: `U_ii = W_i`,
/// zero off the diagonal.
pub fn retract_diag(w: &[ComplexMatrix]) -> Result<Representation> {
    if w.is_empty() {
        return Err(Error::InvalidInput("retract_diag requires at least one unitary".into()));
    }
    let d = w[0].rows();
    for wi in w {
        if wi.rows() != d || wi.cols() != d {
            return Err(Error::Dimension("all unitaries must share one size".into()));
        }
        let residual = wi
            .adjoint()
            .matmul(wi)
            .sub(&ComplexMatrix::identity(d))
            .frobenius_norm();
        if residual > REPRESENTATION_TOL {
            return Err(Error::NotUnitary(residual));
        }
    }
    let n = w.len();
    let blocks: Vec<Vec<ComplexMatrix>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        w[i].clone()
                    } else {
                        ComplexMatrix::zeros(d, d)
                    }
                })
                .collect()
        })
        .collect();
    Representation::new(n, d, blocks)
}

// --- wire format -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RepresentationWire {
    n: usize,
    d: usize,
    blocks: Vec<Vec<ComplexMatrix>>,
}

impl Serialize for Representation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RepresentationWire {
            n: self.n,
            d: self.d,
            blocks: self.blocks.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Representation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = RepresentationWire::deserialize(deserializer)?;
        Representation::new(wire.n, wire.d, wire.blocks).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{Complex64, ONE};
    use crate::linalg::{random_contraction, random_unitary, RngState};

    fn unitarity(v: &ComplexMatrix) -> f64 {
        v.adjoint()
            .matmul(v)
            .sub(&ComplexMatrix::identity(v.rows()))
            .frobenius_norm()
    }

    #[test]
    fn dilation_closed_forms() {
        // T = [0] -> [[0, 1], [1, 0]]
        let v = unitary_dilation(&ComplexMatrix::zeros(1, 1)).unwrap();
        let mut expect = ComplexMatrix::zeros(2, 2);
        expect[(0, 1)] = ONE;
        expect[(1, 0)] = ONE;
        assert!(v.sub(&expect).frobenius_norm() <= 1e-12);

        // T = I_k -> [[I, 0], [0, -I]]
        let v = unitary_dilation(&ComplexMatrix::identity(3)).unwrap();
        for i in 0..3 {
            assert_eq!(v[(i, i)], ONE);
            assert!((v[(3 + i, 3 + i)] + ONE).norm() <= 1e-12);
        }
        assert!(v.block(0, 3, 3, 3).frobenius_norm() <= 1e-7);
        assert!(v.block(3, 0, 3, 3).frobenius_norm() <= 1e-7);

        // T = [1/2] -> [[1/2, sqrt(3)/2], [sqrt(3)/2, -1/2]]
        let v = unitary_dilation(&ComplexMatrix::scalar(Complex64::new(0.5, 0.0))).unwrap();
        let root3_half = (3.0f64).sqrt() / 2.0;
        assert!((v[(0, 0)].re - 0.5).abs() <= 1e-12);
        assert!((v[(0, 1)].re - root3_half).abs() <= 1e-12);
        assert!((v[(1, 0)].re - root3_half).abs() <= 1e-12);
        assert!((v[(1, 1)].re + 0.5).abs() <= 1e-12);
    }

    #[test]
    fn dilation_contract_on_random_contractions() {
        let mut rng = RngState::new(31);
        for trial in 0..50 {
            let k = 1 + trial % 8;
            let t = random_contraction(k, 1, &mut rng).unwrap();
            let v = unitary_dilation(&t).unwrap();
            assert!(unitarity(&v) <= 1e-9, "unitarity failed at k={k}");
            // corner recovery is exact, entry for entry
            assert!(v.block(0, 0, k, k).bit_eq(&t));
        }
        let too_big = ComplexMatrix::identity(2).scale_re(1.1);
        assert!(matches!(unitary_dilation(&too_big), Err(Error::NotContraction(_))));
    }

    #[test]
    fn ucp_eval_unital_and_zero_map() {
        let mut rng = RngState::new(32);
        let n = 2;
        let x = VnElement::unit(n, 2).unwrap();
        for r in 1..=2 {
            let t = random_contraction(n, r, &mut rng).unwrap();
            let f = universal_ucp_eval(&t, &x).unwrap();
            assert!(f.sub(&ComplexMatrix::identity(2 * r)).frobenius_norm() <= 1e-12);
        }
        // T = 0 recovers I_r (x) A11
        let y = crate::opsys::VnElement::random_hermitian(n, 2, &mut rng).unwrap();
        let f = universal_ucp_eval(&ComplexMatrix::zeros(2 * n, 2 * n), &y).unwrap();
        assert!(f.sub(&ComplexMatrix::identity(2).kron(y.a11())).frobenius_norm() <= 1e-12);
        assert!(f.hermitian_deviation() <= 1e-12);
    }

    #[test]
    fn ucp_eval_hand_value() {
        // n=2, p=1, A11 = 1, coefficient -2.5 on the (1,3)/(3,1) pair,
        // C with C_11 = 1: F = 1 + (1/4)(-2.5)(2) = -0.25
        let n = 2;
        let mut x = VnElement::new(n, 1, ComplexMatrix::scalar(ONE)).unwrap();
        x.set_generator_pair(1, 3, ComplexMatrix::scalar(Complex64::new(-2.5, 0.0))).unwrap();
        let mut c = ComplexMatrix::zeros(2, 2);
        c[(0, 0)] = ONE;
        let f = universal_ucp_eval(&c, &x).unwrap();
        assert_eq!(f.rows(), 1);
        assert!((f[(0, 0)].re + 0.25).abs() <= 1e-12);
        assert!(f[(0, 0)].im.abs() <= 1e-15);
    }

    #[test]
    fn retract_diag_examples() {
        let one = ComplexMatrix::scalar(ONE);
        let rep = retract_diag(&[one.clone(), one.clone()]).unwrap();
        assert!(rep.assemble().sub(&ComplexMatrix::identity(2)).frobenius_norm() == 0.0);

        let neg = ComplexMatrix::scalar(-ONE);
        let rep = retract_diag(&[one, neg]).unwrap();
        assert!(rep
            .assemble()
            .sub(&ComplexMatrix::from_real_diag(&[1.0, -1.0]))
            .frobenius_norm()
            == 0.0);

        let mut rng = RngState::new(33);
        let w1 = random_unitary(3, &mut rng).unwrap();
        let w2 = random_unitary(3, &mut rng).unwrap();
        let rep = retract_diag(&[w1, w2]).unwrap();
        assert!(rep.unitarity_residual() <= 1e-9);

        let bad = ComplexMatrix::identity(2).scale_re(2.0);
        assert!(matches!(retract_diag(&[bad]), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn rfd_compression_corner_recovery_and_unitarity() {
        let mut rng = RngState::new(34);
        let w1 = random_unitary(4, &mut rng).unwrap();
        let w2 = random_unitary(4, &mut rng).unwrap();
        let rep = retract_diag(&[w1, w2]).unwrap();

        // m = d: exact corner recovery
        let full = rfd_compression(&rep, 4).unwrap();
        for i in 1..=2 {
            for j in 1..=2 {
                let corner = full.block(i, j).block(0, 0, 4, 4);
                assert!(corner.bit_eq(rep.block(i, j)), "corner ({i},{j}) drifted");
            }
        }

        // m < d: still a representation (constructor enforces unitarity)
        for m in 1..=3 {
            let comp = rfd_compression(&rep, m).unwrap();
            assert_eq!(comp.d(), 2 * m);
            assert!(comp.unitarity_residual() <= 1e-9);
        }

        assert!(rfd_compression(&rep, 0).is_err());
        assert!(rfd_compression(&rep, 5).is_err());
    }

    #[test]
    fn word_norms_converge_at_full_rank() {
        let mut rng = RngState::new(35);
        let w1 = random_unitary(4, &mut rng).unwrap();
        let w2 = random_unitary(4, &mut rng).unwrap();
        let rep = retract_diag(&[w1, w2]).unwrap();
        let word = [
            WordLetter { i: 1, j: 1, star: false },
            WordLetter { i: 2, j: 2, star: true },
            WordLetter { i: 1, j: 1, star: false },
        ];
        let target = operator_norm(&rep.eval_word(&word).unwrap()).unwrap();
        for m in 1..=4 {
            let comp = rfd_compression(&rep, m).unwrap();
            let norm = operator_norm(&comp.eval_word(&word).unwrap()).unwrap();
            assert!(norm <= 1.0 + 1e-9, "word norm {norm} exceeds 1 at m={m}");
            if m == 4 {
                assert!((norm - target).abs() <= 1e-9, "m = d norm mismatch");
            }
        }
        // word longer than 8 letters is rejected
        let long = vec![WordLetter { i: 1, j: 1, star: false }; 9];
        assert!(rep.eval_word(&long).is_err());
    }

    #[test]
    fn representation_json_round_trip() {
        let mut rng = RngState::new(36);
        let w = random_unitary(2, &mut rng).unwrap();
        let rep = retract_diag(&[w.clone(), w]).unwrap();
        let s = serde_json::to_string(&rep).unwrap();
        let back: Representation = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
        // a non-unitary grid is rejected on parse
        let bad = r#"{"n":1,"d":1,"blocks":[[{"rows":1,"cols":1,"data":[[2.0,0.0]]}]]}"#;
        assert!(serde_json::from_str::<Representation>(bad).is_err());
    }

    #[test]
    fn eval_word_identity_on_empty() {
        let rep = retract_diag(&[ComplexMatrix::scalar(ONE)]).unwrap();
        let out = rep.eval_word(&[]).unwrap();
        assert!(out.bit_eq(&ComplexMatrix::identity(1)));
    }
}
