//! The operator system `V_n` in coefficients: index sets, the quotient map
//! `phi: M_2n -> V_n` and its kernel `J_2n`, elements of `V_n (x) M_p`, the
//! state characterization dual to `S0_{M_n}`, and coefficient-level retract
//! maps onto the free-group operator system `S_n`.
//!
//! # Conventions
//!
//! Indices into the `2n x 2n` block grid are 1-based, matching the usual
//! notation. The index sets are
//!
//! * `Lambda_n^+ = {(i, j) : 1 <= i <= n, n+1 <= j <= 2n}` (upper-right corner),
//! * `Lambda_n^- = {(i, j) : n+1 <= i <= 2n, 1 <= j <= n}` (lower-left corner),
//!
//! and `Lambda_n` is their union. A [`VnElement`] with block size `p` stores
//! the coefficients of the canonical form
//!
//! ```text
//! x = 1 (x) A11 + sum_{(i,j) in Lambda+} (1/2n) u_{i,j-n} (x) A_ij
//!                + sum_{(i,j) in Lambda-} (1/2n) u*_{j,i-n} (x) A_ij
//! ```
//!
//! so the `1/2n` scaling is baked into the element semantics: the stored
//! block `A_ij` is exactly the lift entry `R_ij` of a positive completion.
//! Hermitian-expecting operations reject (never repair) inputs violating the
//! Hermitian form at tolerance `1e-10`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::eig::herm_eig;
use crate::linalg::matrix::{Complex64, ComplexMatrix, ONE};
use crate::linalg::rng::RngState;
use crate::linalg::svd::operator_norm;

/// Hermitian-form rejection tolerance for coefficient maps.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// The index sets `Lambda_n^+`, `Lambda_n^-` for the `2n x 2n` block grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaIndex {
    n: usize,
    plus: Vec<(usize, usize)>,
    minus: Vec<(usize, usize)>,
}

impl LambdaIndex {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("LambdaIndex requires n >= 2, got {n}")));
        }
        let mut plus = Vec::with_capacity(n * n);
        let mut minus = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in n + 1..=2 * n {
                plus.push((i, j));
            }
        }
        for i in n + 1..=2 * n {
            for j in 1..=n {
                minus.push((i, j));
            }
        }
        Ok(Self { n, plus, minus })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn plus(&self) -> &[(usize, usize)] {
        &self.plus
    }

    pub fn minus(&self) -> &[(usize, usize)] {
        &self.minus
    }

    /// All of `Lambda_n`, plus entries first.
    pub fn all(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.plus.iter().chain(self.minus.iter()).copied()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let n = self.n;
        let in_range = |k: usize| (1..=2 * n).contains(&k);
        in_range(i) && in_range(j) && ((i <= n && j > n) || (i > n && j <= n))
    }
}

/// Element of `V_n (x) M_p` in canonical coefficient form. Blocks absent from
/// the map are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VnElement {
    n: usize,
    p: usize,
    a11: ComplexMatrix,
    blocks: BTreeMap<(usize, usize), ComplexMatrix>,
}

impl VnElement {
    /// Element `1 (x) a11` with no generator coefficients.
    pub fn new(n: usize, p: usize, a11: ComplexMatrix) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("VnElement requires n >= 2, got {n}")));
        }
        if p == 0 {
            return Err(Error::InvalidInput("VnElement requires p >= 1".into()));
        }
        if a11.rows() != p || a11.cols() != p {
            return Err(Error::Dimension(format!(
                "A11 must be {p}x{p}, got {}x{}",
                a11.rows(),
                a11.cols()
            )));
        }
        Ok(Self {
            n,
            p,
            a11,
            blocks: BTreeMap::new(),
        })
    }

    /// The order unit `1 (x) I_p`.
    pub fn unit(n: usize, p: usize) -> Result<Self> {
        Self::new(n, p, ComplexMatrix::identity(p))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn a11(&self) -> &ComplexMatrix {
        &self.a11
    }

    pub fn lambda(&self) -> Result<LambdaIndex> {
        LambdaIndex::new(self.n)
    }

    /// Stored (nonzero) coefficient blocks in deterministic key order.
    pub fn stored_blocks(&self) -> impl Iterator<Item = (&(usize, usize), &ComplexMatrix)> {
        self.blocks.iter()
    }

    /// Coefficient block at `(i, j) in Lambda_n`; zero if unset.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        self.blocks
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.p, self.p))
    }

    pub fn set_block(&mut self, i: usize, j: usize, m: ComplexMatrix) -> Result<()> {
        let lambda = LambdaIndex::new(self.n)?;
        if !lambda.contains(i, j) {
            return Err(Error::IndexMismatch(format!(
                "({i}, {j}) is not in Lambda_{}",
                self.n
            )));
        }
        if m.rows() != self.p || m.cols() != self.p {
            return Err(Error::Dimension(format!(
                "block must be {0}x{0}, got {1}x{2}",
                self.p,
                m.rows(),
                m.cols()
            )));
        }
        self.blocks.insert((i, j), m);
        Ok(())
    }

    /// Sets `A_ij = m` and the Hermitian partner `A_ji = m*` in one call.
    pub fn set_generator_pair(&mut self, i: usize, j: usize, m: ComplexMatrix) -> Result<()> {
        let adj = m.adjoint();
        self.set_block(i, j, m)?;
        self.set_block(j, i, adj)
    }

    /// Verifies the Hermitian form: `A11 = A11*` and `A_ji = A_ij*` for all
    /// stored pairs, at the given tolerance.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.a11.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: tol,
            });
        }
        let keys: Vec<(usize, usize)> = self.blocks.keys().copied().collect();
        for (i, j) in keys {
            let dev = self.block(i, j).sub(&self.block(j, i).adjoint()).frobenius_norm();
            if dev > tol {
                return Err(Error::NotHermitian {
                    deviation: dev,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }

    pub fn scale(&self, t: f64) -> Self {
        Self {
            n: self.n,
            p: self.p,
            a11: self.a11.scale_re(t),
            blocks: self
                .blocks
                .iter()
                .map(|(k, v)| (*k, v.scale_re(t)))
                .collect(),
        }
    }

    /// A rough magnitude used by solvers for hybrid absolute/relative
    /// tolerances: `max(1, ||A11||_F, max_ij ||A_ij||_F)`.
    pub fn scale_hint(&self) -> f64 {
        let mut s = self.a11.frobenius_norm().max(1.0);
        for b in self.blocks.values() {
            s = s.max(b.frobenius_norm());
        }
        s
    }

    /// The canonical lift `B` with `B_ii = A11`, `B_ij = A_ij` on `Lambda_n`,
    /// zero elsewhere; `phi_apply` maps it back to this element.
    pub fn canonical_lift(&self) -> QuotientRep {
        let (n, p) = (self.n, self.p);
        let mut b = ComplexMatrix::zeros(2 * n * p, 2 * n * p);
        for i in 1..=2 * n {
            b.set_block((i - 1) * p, (i - 1) * p, &self.a11);
        }
        for (&(i, j), m) in &self.blocks {
            b.set_block((i - 1) * p, (j - 1) * p, m);
        }
        QuotientRep { n, p, b }
    }

    /// Random Hermitian element with standard-normal-scaled coefficients.
    pub fn random_hermitian(n: usize, p: usize, rng: &mut RngState) -> Result<Self> {
        let a11 = crate::linalg::rng::random_hermitian(p, rng);
        let mut x = Self::new(n, p, a11)?;
        let lambda = LambdaIndex::new(n)?;
        for &(i, j) in lambda.plus() {
            let g = ComplexMatrix::from_fn(p, p, |_, _| rng.next_complex_gaussian());
            x.set_generator_pair(i, j, g)?;
        }
        Ok(x)
    }
}

/// A lift in `M_2n (x) M_p`: an arbitrary `2np x 2np` matrix viewed as `2n x
/// 2n` blocks of size `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientRep {
    n: usize,
    p: usize,
    b: ComplexMatrix,
}

impl QuotientRep {
    pub fn new(n: usize, p: usize, b: ComplexMatrix) -> Result<Self> {
        if n < 2 || p == 0 {
            return Err(Error::InvalidInput("QuotientRep requires n >= 2, p >= 1".into()));
        }
        let d = 2 * n * p;
        if b.rows() != d || b.cols() != d {
            return Err(Error::Dimension(format!(
                "lift must be {d}x{d}, got {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        Ok(Self { n, p, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.b
    }

    /// Block at 1-based grid position `(i, j)`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        self.b.block((i - 1) * self.p, (j - 1) * self.p, self.p, self.p)
    }
}

/// The quotient map `phi: M_2n (x) M_p -> V_n (x) M_p` in coefficients:
/// the unit coefficient is the diagonal-block average `(1/2n) sum_i B_ii`,
/// the `Lambda_n` blocks pass through unchanged, and everything else is
/// annihilated.
pub fn phi_apply(b: &QuotientRep) -> VnElement {
    let (n, p) = (b.n, b.p);
    let diag: Vec<ComplexMatrix> = (1..=2 * n).map(|i| b.block(i, i)).collect();
    let a11 = block_average(&diag);
    let mut x = VnElement::new(n, p, a11).expect("QuotientRep dimensions already validated");
    let lambda = LambdaIndex::new(n).expect("n >= 2 by construction");
    for (i, j) in lambda.all() {
        let blk = b.block(i, j);
        if blk.frobenius_norm() > 0.0 {
            x.set_block(i, j, blk).expect("indices from LambdaIndex");
        }
    }
    x
}

/// Average of equally-sized blocks. Identical blocks short-circuit to the
/// first one so canonical-lift round trips stay bit-exact; the general path
/// uses pairwise summation.
fn block_average(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    if blocks.iter().all(|b| b.bit_eq(&blocks[0])) {
        return blocks[0].clone();
    }
    pairwise_sum(blocks).scale_re(1.0 / blocks.len() as f64)
}

fn pairwise_sum(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    match blocks.len() {
        1 => blocks[0].clone(),
        2 => blocks[0].add(&blocks[1]),
        k => pairwise_sum(&blocks[..k / 2]).add(&pairwise_sum(&blocks[k / 2..])),
    }
}

/// Membership test for the kernel of `phi`: the corner blocks vanish and the
/// diagonal blocks sum to zero, both at tolerance `tol` (entrywise modulus).
/// For `p = 1` the sum condition is exactly "the traces of the two diagonal
/// `n x n` blocks cancel".
pub fn j2n_member(b: &QuotientRep, tol: f64) -> bool {
    let (n, p) = (b.n, b.p);
    let lambda = LambdaIndex::new(n).expect("n >= 2 by construction");
    for (i, j) in lambda.all() {
        if b.block(i, j).max_abs_entry() > tol {
            return false;
        }
    }
    let mut sum = ComplexMatrix::zeros(p, p);
    for i in 1..=2 * n {
        sum = sum.add(&b.block(i, i));
    }
    sum.max_abs_entry() <= tol
}

/// The block matrix `[[I/2n, U/2n], [U*/2n, I/2n]]` obtained by evaluating
/// `(phi(E_ij))_ij` in a concrete representation that sends the universal
/// unitary to `rep` (an `nd x nd` unitary viewed as `n x n` blocks of size
/// `d`). Defaults to `U = I_n` with `d = 1`. The result is Hermitian PSD with
/// smallest eigenvalue 0; that is the complete positivity of `phi` made
/// checkable.
pub fn choi_of_phi(n: usize, rep: Option<&ComplexMatrix>) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("choi_of_phi requires n >= 2, got {n}")));
    }
    let identity = ComplexMatrix::identity(n);
    let u = rep.unwrap_or(&identity);
    if !u.is_square() || !u.rows().is_multiple_of(n) || u.rows() == 0 {
        return Err(Error::Dimension(format!(
            "representation unitary must be square of size divisible by {n}, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let nd = u.rows();
    let residual = u
        .adjoint()
        .matmul(u)
        .sub(&ComplexMatrix::identity(nd))
        .frobenius_norm();
    if residual > 1e-8 {
        return Err(Error::NotUnitary(residual));
    }
    let inv = 1.0 / (2.0 * n as f64);
    let mut out = ComplexMatrix::zeros(2 * nd, 2 * nd);
    out.set_block(0, 0, &ComplexMatrix::identity(nd).scale_re(inv));
    out.set_block(0, nd, &u.scale_re(inv));
    out.set_block(nd, 0, &u.adjoint().scale_re(inv));
    out.set_block(nd, nd, &ComplexMatrix::identity(nd).scale_re(inv));
    Ok(out)
}

/// State characterization of `V_n`: the functional with `s(1) = lambda` and
/// `s(u_ij) = S_ij` is a state exactly when `lambda = 1` (to `1e-10`) and
/// `||S|| <= 1 + 1e-10`. Equivalently, `[[I, S], [S*, I]]` is PSD.
///
/// The unit normalization `lambda = 1` is a convention: the dual order unit
/// is only determined up to the choice of a faithful state, and this library
/// fixes the one dual to the canonical trace picture.
pub fn vn_state_check(lambda: Complex64, s: &ComplexMatrix) -> Result<bool> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "state matrix must be square, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if (lambda - ONE).norm() > 1e-10 {
        return Ok(false);
    }
    Ok(operator_norm(s)? <= 1.0 + 1e-10)
}

/// Evaluates the functional `s(1) = lambda`, `s(u_ij) = S_ij`,
/// `s(u*_ij) = conj(S_ij)` entrywise on `x`, producing the `p x p` matrix
/// `lambda * A11 + sum_{Lambda+} (1/2n) S_{i,j-n} A_ij
///             + sum_{Lambda-} (1/2n) conj(S_{j,i-n}) A_ij`.
///
/// No contraction requirement on `S`: this is plain linear-functional
/// evaluation, usable on non-states as well.
pub fn functional_eval(
    lambda: Complex64,
    s: &ComplexMatrix,
    x: &VnElement,
) -> Result<ComplexMatrix> {
    let n = x.n();
    if s.rows() != n || s.cols() != n {
        return Err(Error::Dimension(format!(
            "functional matrix must be {n}x{n}, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let inv = 1.0 / (2.0 * n as f64);
    let mut out = x.a11().scale(lambda);
    for (&(i, j), block) in x.stored_blocks() {
        let coeff = if j > n {
            s[(i - 1, j - n - 1)] // (i, j) in Lambda+, generator u_{i, j-n}
        } else {
            s[(j - 1, i - n - 1)].conj() // (i, j) in Lambda-, generator u*_{j, i-n}
        };
        out = out.add(&block.scale(coeff * inv));
    }
    Ok(out)
}

/// A maximal-cone element on which a candidate functional takes a negative
/// value, refuting statehood constructively.
#[derive(Debug, Clone)]
pub struct StateWitness {
    /// The witness element of `V_n` (block size `p = 1`).
    pub element: VnElement,
    /// Its positive completion, a rank-one PSD lift (so membership in the
    /// maximal cone holds by construction).
    pub lift: QuotientRep,
    /// The functional's value on the element: `(1 - ||S||) / 2n`, negative
    /// exactly when `S` is not a contraction.
    pub value: f64,
}

/// Searches for a maximal-cone element mapped to a negative number by the
/// functional `s(1) = 1`, `s(u_ij) = S_ij`.
///
/// The pairing of the functional with a completion `R` is linear,
/// `s(phi(R)) = tr(W^T R) / 2n` with `W = [[I, S], [S*, I]]`, so the minimum
/// over trace-one PSD completions is the bottom eigenvalue of `W` and the
/// minimizer is the rank-one lift built from the conjugated bottom
/// eigenvector. Closed form; no iteration.
pub fn state_negativity_witness(s: &ComplexMatrix) -> Result<StateWitness> {
    if !s.is_square() || s.rows() < 2 {
        return Err(Error::Dimension(format!(
            "state matrix must be square with n >= 2, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    let w = S0Element::from_functional(ONE, s.clone()).as_matrix();
    let eig = herm_eig(&w)?;
    let bottom = eig.eigenvector(0);
    let v: Vec<Complex64> = bottom.iter().map(|z| z.conj()).collect();
    let r = ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| v[i] * v[j].conj());
    let lift = QuotientRep::new(n, 1, r)?;
    let element = phi_apply(&lift);
    let value = eig.lambda_min() / (2.0 * n as f64);
    Ok(StateWitness {
        element,
        lift,
        value,
    })
}

/// Element of the operator system `S0_X` for `X = M_n`: the block matrix
/// `[[lambda I, X], [Y*, lambda I]]`. `V_n`'s dual is completely order
/// isomorphic to this system, which is why states of `V_n` are exactly the
/// contractions.
#[derive(Debug, Clone, PartialEq)]
pub struct S0Element {
    pub n: usize,
    pub lambda: Complex64,
    pub x: ComplexMatrix,
    pub y: ComplexMatrix,
}

impl S0Element {
    pub fn new(lambda: Complex64, x: ComplexMatrix, y: ComplexMatrix) -> Result<Self> {
        if !x.is_square() || x.rows() != y.rows() || !y.is_square() {
            return Err(Error::Dimension("S0 blocks must be square of equal size".into()));
        }
        Ok(Self {
            n: x.rows(),
            lambda,
            x,
            y,
        })
    }

    /// Image of the functional `s(1) = lambda`, `s(u_ij) = S_ij` under the
    /// dual identification (a Hermitian element when `lambda` is real).
    pub fn from_functional(lambda: Complex64, s: ComplexMatrix) -> Self {
        let n = s.rows();
        Self {
            n,
            lambda,
            y: s.clone(),
            x: s,
        }
    }

    /// The assembled `2n x 2n` matrix `[[lambda I, X], [Y*, lambda I]]`.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let n = self.n;
        let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
        let scaled = ComplexMatrix::identity(n).scale(self.lambda);
        out.set_block(0, 0, &scaled);
        out.set_block(n, n, &scaled);
        out.set_block(0, n, &self.x);
        out.set_block(n, 0, &self.y.adjoint());
        out
    }

    pub fn is_positive(&self, tol: f64) -> Result<bool> {
        let m = self.as_matrix();
        if m.hermitian_deviation() > HERMITIAN_TOL * m.frobenius_norm().max(1.0) {
            return Ok(false);
        }
        Ok(herm_eig(&m)?.lambda_min() >= -tol)
    }
}

/// Element of the operator system `S_n` spanned by `1, w_1..w_n, w*_1..w*_n`
/// (free unitary generators), with `M_p` coefficients:
/// `y = 1 (x) A0 + sum_i w_i (x) W_i + sum_i w*_i (x) Wstar_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnElement {
    n: usize,
    p: usize,
    a0: ComplexMatrix,
    w: Vec<ComplexMatrix>,
    wstar: Vec<ComplexMatrix>,
}

impl SnElement {
    pub fn new(
        n: usize,
        p: usize,
        a0: ComplexMatrix,
        w: Vec<ComplexMatrix>,
        wstar: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        if w.len() != n || wstar.len() != n {
            return Err(Error::Dimension(format!(
                "expected {n} generator coefficients, got {} and {}",
                w.len(),
                wstar.len()
            )));
        }
        for m in std::iter::once(&a0).chain(&w).chain(&wstar) {
            if m.rows() != p || m.cols() != p {
                return Err(Error::Dimension(format!(
                    "all coefficients must be {p}x{p}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self { n, p, a0, w, wstar })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn a0(&self) -> &ComplexMatrix {
        &self.a0
    }

    /// Coefficient of `w_i`, 1-based.
    pub fn w(&self, i: usize) -> &ComplexMatrix {
        &self.w[i - 1]
    }

    /// Coefficient of `w*_i`, 1-based.
    pub fn wstar(&self, i: usize) -> &ComplexMatrix {
        &self.wstar[i - 1]
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.a0.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian {
                deviation: dev,
                tolerance: tol,
            });
        }
        for i in 1..=self.n {
            let dev = self.wstar(i).sub(&self.w(i).adjoint()).frobenius_norm();
            if dev > tol {
                return Err(Error::NotHermitian {
                    deviation: dev,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }
}

/// The retract `pi: V_n -> S_n` at coefficient level: `pi(u_ii) = w_i` and
/// `pi(u_ij) = 0` off the diagonal, so only the `(i, n+i)` / `(n+i, i)`
/// blocks survive, transported with the `1/2n` scaling.
pub fn retract_pi(x: &VnElement) -> SnElement {
    let (n, p) = (x.n(), x.p());
    let two_n = (2 * n) as f64;
    let mut w = Vec::with_capacity(n);
    let mut wstar = Vec::with_capacity(n);
    for i in 1..=n {
        w.push(x.block(i, n + i).scale_re(1.0 / two_n));
        wstar.push(x.block(n + i, i).scale_re(1.0 / two_n));
    }
    SnElement::new(n, p, x.a11().clone(), w, wstar).expect("dimensions preserved")
}

/// The retract section `psi: S_n -> V_n` at coefficient level:
/// `psi(w_i) = u_ii`, so `W_i` lands on the `(i, n+i)` block scaled by `2n`
/// (undoing the canonical-form scaling). `retract_pi(retract_psi(y)) = y`.
pub fn retract_psi(y: &SnElement) -> VnElement {
    let (n, p) = (y.n(), y.p());
    let two_n = (2 * n) as f64;
    let mut x = VnElement::new(n, p, y.a0().clone()).expect("dimensions preserved");
    for i in 1..=n {
        x.set_block(i, n + i, y.w(i).scale_re(two_n)).expect("diagonal pair index");
        x.set_block(n + i, i, y.wstar(i).scale_re(two_n)).expect("diagonal pair index");
    }
    x
}

// --- wire formats ---------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct BlockWire {
    i: usize,
    j: usize,
    block: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct VnElementWire {
    n: usize,
    p: usize,
    #[serde(rename = "A11")]
    a11: ComplexMatrix,
    #[serde(rename = "A")]
    a: Vec<BlockWire>,
}

impl Serialize for VnElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = VnElementWire {
            n: self.n,
            p: self.p,
            a11: self.a11.clone(),
            a: self
                .blocks
                .iter()
                .map(|(&(i, j), block)| BlockWire {
                    i,
                    j,
                    block: block.clone(),
                })
                .collect(),
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VnElement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = VnElementWire::deserialize(deserializer)?;
        let mut x = VnElement::new(wire.n, wire.p, wire.a11).map_err(D::Error::custom)?;
        for bw in wire.a {
            if x.blocks.contains_key(&(bw.i, bw.j)) {
                return Err(D::Error::custom(format!("duplicate block ({}, {})", bw.i, bw.j)));
            }
            x.set_block(bw.i, bw.j, bw.block).map_err(D::Error::custom)?;
        }
        Ok(x)
    }
}
