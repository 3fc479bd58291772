//! POVM validation, frame-matrix decomposition and dual-frame construction.
//!
//! The frame matrix `R` stacks the vectorized effects as columns. Writing its
//! SVD as `R = U (Sigma | 0) W^dag`, the first `D` left singular vectors form
//! the working orthonormal basis of the measurement span `V_D`, the inverse
//! singular values give the canonical (minimum-norm) dual frame, and the last
//! `n - D` right singular vectors give an orthonormal basis of the kernel of
//! `R`, the homogeneous freedom every equivalent estimator family shares.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hs::{self, unvec, vec_op, HsVector, Operator, TOL_HERM, TOL_NUM, TOL_PSD};

/// Relative rank cutoff: singular values below `RANK_TOL * sigma_1` are
/// treated as zero. Effects are exact rationals in the worked examples, so
/// the gap between true and spurious singular values is many orders of
/// magnitude.
pub const RANK_TOL: f64 = 1e-10;

/// A validated positive operator-valued measure.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    effects: Vec<Operator>,
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Operator] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &Operator {
        &self.effects[k]
    }
}

/// Checks positivity of every effect and completeness of the sum, and wraps
/// the list into a [`Povm`]. Zero effects are accepted; they contribute zero
/// frame columns and their dual coefficients stay pinned to zero.
pub fn validate_povm(effects: Vec<Operator>) -> Result<Povm> {
    let first = effects.first().ok_or(Error::EmptyPovm)?;
    let dim = first.dim();
    for (k, e) in effects.iter().enumerate() {
        if e.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: e.dim(),
            });
        }
        let defect = e.hermiticity_defect();
        if defect > TOL_HERM {
            return Err(Error::NotHermitian {
                max_deviation: defect,
            });
        }
        let min_eig = hs::hermitian_eigenvalues(e)?[0];
        if min_eig < -TOL_PSD {
            return Err(Error::NotPsd {
                index: k,
                min_eigenvalue: min_eig,
            });
        }
    }
    let mut sum = Operator::zeros(dim);
    for e in &effects {
        sum = sum.add(e);
    }
    let residual = sum.max_abs_diff(&Operator::identity(dim));
    if residual > TOL_NUM {
        return Err(Error::NotComplete { residual });
    }
    Ok(Povm { dim, effects })
}

/// Singular value decomposition of the frame matrix, `R = U S W^dag`.
#[derive(Debug, Clone)]
pub struct FrameDecomposition {
    /// `d^2 x n` matrix whose columns are the vectorized effects.
    r: DMatrix<Complex64>,
    /// Full `d^2 x d^2` unitary of left singular vectors; the first
    /// `rank` columns span `V_D`.
    u: DMatrix<Complex64>,
    /// Retained singular values, descending.
    sigma: Vec<f64>,
    /// Full `n x n` unitary of right singular vectors; the last `n - rank`
    /// columns are an orthonormal basis of `ker R`.
    w: DMatrix<Complex64>,
    rank: usize,
    dim: usize,
}

impl FrameDecomposition {
    pub fn frame(&self) -> &DMatrix<Complex64> {
        &self.r
    }

    pub fn left_vectors(&self) -> &DMatrix<Complex64> {
        &self.u
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn right_vectors(&self) -> &DMatrix<Complex64> {
        &self.w
    }

    /// Dimension `D` of the spanned operator subspace.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.r.ncols()
    }

    /// Number of free homogeneous parameters, `n - D`.
    pub fn free_parameters(&self) -> usize {
        self.outcomes() - self.rank
    }

    /// The operators of the spanning basis, `B_s = unvec(u_s)` for `s < D`.
    pub fn basis_operators(&self) -> Vec<Operator> {
        (0..self.rank)
            .map(|s| unvec(&HsVector::new(self.u.column(s).into_owned())).expect("square"))
            .collect()
    }

    /// Orthonormal kernel basis of `R` (`n x (n - D)`).
    pub fn null_basis(&self) -> DMatrix<Complex64> {
        let n = self.outcomes();
        let free = self.free_parameters();
        let mut nb = DMatrix::zeros(n, free);
        for j in 0..free {
            nb.set_column(j, &self.w.column(self.rank + j));
        }
        nb
    }

    /// Frobenius reconstruction error `||R - U S W^dag||`.
    pub fn reconstruction_error(&self) -> f64 {
        let d2 = self.u.nrows();
        let n = self.outcomes();
        let mut s = DMatrix::<Complex64>::zeros(d2, n);
        for (i, sv) in self.sigma.iter().enumerate() {
            s[(i, i)] = Complex64::new(*sv, 0.0);
        }
        (&self.r - &self.u * s * self.w.adjoint()).norm()
    }
}

/// Phase of the largest-magnitude entry of a vector (unit modulus), or 1
/// for the zero vector.
fn dominant_phase(v: &DVector<Complex64>) -> Complex64 {
    let mut best = Complex64::ONE;
    let mut best_mag = 0.0f64;
    for z in v.iter() {
        let mag = z.norm();
        if mag > best_mag + 1e-14 {
            best_mag = mag;
            best = z / Complex64::new(mag, 0.0);
        }
    }
    best
}

fn rotate_column(m: &mut DMatrix<Complex64>, j: usize, factor: Complex64) {
    for i in 0..m.nrows() {
        m[(i, j)] *= factor;
    }
}

/// Rotates each column so its largest-magnitude entry is real positive.
/// Eigenvector phases are otherwise arbitrary; fixing them keeps every
/// downstream coefficient deterministic.
fn canonicalize_columns(m: &mut DMatrix<Complex64>) {
    for j in 0..m.ncols() {
        let phase = dominant_phase(&m.column(j).into_owned());
        rotate_column(m, j, phase.conj());
    }
}

/// Completes a set of orthonormal columns to a full orthonormal basis:
/// each slot takes the standard basis vector with the largest component
/// outside the span placed so far, Gram-Schmidt cleaned. The largest
/// residual is always at least 1/sqrt(dim), so the completion never
/// degenerates.
fn complete_basis(m: &mut DMatrix<Complex64>, filled: usize) {
    let dim = m.nrows();
    let project_out = |m: &DMatrix<Complex64>, placed: usize, v: &mut DVector<Complex64>| {
        for _ in 0..2 {
            for s in 0..placed {
                let overlap = m.column(s).dotc(&*v);
                *v -= m.column(s) * overlap;
            }
        }
    };
    for placed in filled..dim {
        let mut best: Option<(f64, DVector<Complex64>)> = None;
        for candidate in 0..dim {
            let mut cand = DVector::<Complex64>::zeros(dim);
            cand[candidate] = Complex64::ONE;
            project_out(m, placed, &mut cand);
            let norm = cand.norm();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
        }
        let (norm, mut cand) = best.expect("dim > 0");
        cand /= Complex64::new(norm, 0.0);
        m.set_column(placed, &cand);
    }
}

/// Builds the frame matrix of a POVM and decomposes it.
///
/// The bidiagonal SVD supplies the thin factors and accurate singular
/// values; the left and right bases are then completed to full unitaries so
/// the kernel of `R` (the homogeneous optimization space) is available as
/// the trailing right-vector columns.
pub fn frame_matrix(povm: &Povm) -> Result<FrameDecomposition> {
    let d = povm.dim();
    let n = povm.len();
    let d2 = d * d;
    let mut r = DMatrix::<Complex64>::zeros(d2, n);
    for (k, e) in povm.effects().iter().enumerate() {
        r.set_column(k, vec_op(e).coords());
    }

    let mut svd = r.clone().svd(true, true);
    svd.sort_by_singular_values();
    let thin_u = svd
        .u
        .ok_or_else(|| Error::SvdFailure("missing left factor".into()))?;
    let thin_vt = svd
        .v_t
        .ok_or_else(|| Error::SvdFailure("missing right factor".into()))?;
    let values = svd.singular_values;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::SvdFailure("non-finite singular value".into()));
    }
    let sigma_1 = values[0];
    if sigma_1 <= 0.0 {
        return Err(Error::SvdFailure("zero frame matrix".into()));
    }
    let rank = values
        .iter()
        .take_while(|&&s| s > RANK_TOL * sigma_1)
        .count();
    let sigma: Vec<f64> = values.iter().take(rank).cloned().collect();

    let thin = thin_u.ncols();
    let mut u = DMatrix::<Complex64>::zeros(d2, d2);
    for s in 0..thin {
        u.set_column(s, &thin_u.column(s));
    }
    complete_basis(&mut u, thin);

    let mut w = DMatrix::<Complex64>::zeros(n, n);
    for s in 0..thin {
        let row = thin_vt.row(s);
        let col = DVector::from_iterator(n, row.iter().map(|z| z.conj()));
        w.set_column(s, &col);
    }
    complete_basis(&mut w, thin);

    // Fix eigenvector phases deterministically. Retained singular pairs must
    // rotate together to keep R = U S W^dag intact; the sigma = 0 columns
    // are free on each side.
    for s in 0..rank {
        let phase = dominant_phase(&u.column(s).into_owned());
        rotate_column(&mut u, s, phase.conj());
        rotate_column(&mut w, s, phase.conj());
    }
    let mut u_tail = u.columns(rank, d2 - rank).into_owned();
    canonicalize_columns(&mut u_tail);
    for (j, col) in u_tail.column_iter().enumerate() {
        u.set_column(rank + j, &col.into_owned());
    }
    let mut w_tail = w.columns(rank, n - rank).into_owned();
    canonicalize_columns(&mut w_tail);
    for (j, col) in w_tail.column_iter().enumerate() {
        w.set_column(rank + j, &col.into_owned());
    }

    Ok(FrameDecomposition {
        r,
        u,
        sigma,
        w,
        rank,
        dim: d,
    })
}

/// The canonical dual frame of a POVM plus its homogeneous freedom.
#[derive(Debug, Clone)]
pub struct DualFrame {
    /// `D x n` particular coefficient matrix `L^(p) = Sigma^-1 W_D^dag`,
    /// expressed in the basis of the first `D` left singular vectors.
    particular: DMatrix<Complex64>,
    /// Orthonormal kernel basis `N` (`n x (n - D)`).
    null_basis: DMatrix<Complex64>,
    /// Particular estimators `eta_k^(p) = sum_s L^(p)_sk B_s`.
    estimators_particular: Vec<Operator>,
    basis_ops: Vec<Operator>,
    dim: usize,
}

impl DualFrame {
    pub fn particular(&self) -> &DMatrix<Complex64> {
        &self.particular
    }

    pub fn null_basis(&self) -> &DMatrix<Complex64> {
        &self.null_basis
    }

    pub fn estimators_particular(&self) -> &[Operator] {
        &self.estimators_particular
    }

    pub fn basis_operators(&self) -> &[Operator] {
        &self.basis_ops
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.particular.ncols()
    }

    pub fn rank(&self) -> usize {
        self.particular.nrows()
    }

    pub fn free_parameters(&self) -> usize {
        self.null_basis.ncols()
    }
}

/// Builds the minimum-norm dual frame `L^(p) = U (Sigma^-1 | 0) W^dag` from a
/// frame decomposition.
pub fn particular_dual(dec: &FrameDecomposition) -> Result<DualFrame> {
    let rank = dec.rank();
    let n = dec.outcomes();
    let sigma_1 = dec.singular_values().first().copied().unwrap_or(0.0);
    for (s, &sv) in dec.singular_values().iter().enumerate() {
        if sv <= RANK_TOL * sigma_1 {
            return Err(Error::SingularSigma {
                index: s,
                value: sv,
            });
        }
    }
    // L^(p) = Sigma^-1 W_D^dag in the left-singular-vector basis.
    let mut particular = DMatrix::<Complex64>::zeros(rank, n);
    for s in 0..rank {
        let inv = Complex64::new(1.0 / dec.singular_values()[s], 0.0);
        for k in 0..n {
            particular[(s, k)] = inv * dec.right_vectors()[(k, s)].conj();
        }
    }
    let basis_ops = dec.basis_operators();
    let dim = dec.dim();
    let mut estimators = Vec::with_capacity(n);
    for k in 0..n {
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for (s, b) in basis_ops.iter().enumerate() {
            m += b.matrix() * particular[(s, k)];
        }
        estimators.push(Operator::new(m)?);
    }
    Ok(DualFrame {
        particular,
        null_basis: dec.null_basis(),
        estimators_particular: estimators,
        basis_ops,
        dim,
    })
}

/// Assembles the estimator family at homogeneous parameter `h`.
///
/// The shift of estimator `k` is `(sum_j h_j conj(N_kj)) * T` with
/// `T = sum_s B_s`, i.e. each parameter is distributed uniformly over the
/// spanning basis operators. Since the kernel columns satisfy
/// `sum_k N_kj E_k = 0` (and the kernel is conjugation-closed for Hermitian
/// effects), the added term drops out of `sum_k |eta_k>><<E_k|` for every
/// `h`, so unbiasedness is preserved.
pub fn assemble_estimators(df: &DualFrame, h: &DVector<Complex64>) -> Result<Vec<Operator>> {
    let free = df.free_parameters();
    if h.len() != free {
        return Err(Error::LengthMismatch {
            expected: free,
            got: h.len(),
        });
    }
    if free == 0 {
        return Ok(df.estimators_particular().to_vec());
    }
    let mut spread = DMatrix::<Complex64>::zeros(df.dim(), df.dim());
    for b in df.basis_operators() {
        spread += b.matrix();
    }
    let shift_coeffs = df.null_basis().map(|z| z.conj()) * h;
    let mut out = Vec::with_capacity(df.outcomes());
    for (k, eta) in df.estimators_particular().iter().enumerate() {
        let m = eta.matrix() + &spread * shift_coeffs[k];
        out.push(Operator::new(m)?);
    }
    Ok(out)
}

/// Frobenius residual of the identity resolution,
/// `|| sum_k |eta_k>><<E_k| - P_{V_D} ||`, where `P_{V_D}` projects onto the
/// span of the effects.
pub fn check_duality(povm: &Povm, estimators: &[Operator]) -> Result<f64> {
    if estimators.len() != povm.len() {
        return Err(Error::LengthMismatch {
            expected: povm.len(),
            got: estimators.len(),
        });
    }
    let dec = frame_matrix(povm)?;
    let d2 = povm.dim() * povm.dim();
    let mut resolution = DMatrix::<Complex64>::zeros(d2, d2);
    for (k, eta) in estimators.iter().enumerate() {
        if eta.dim() != povm.dim() {
            return Err(Error::DimMismatch {
                expected: povm.dim(),
                got: eta.dim(),
            });
        }
        let ket = vec_op(eta);
        let bra = dec.frame().column(k);
        for i in 0..d2 {
            for j in 0..d2 {
                resolution[(i, j)] += ket.coords()[i] * bra[j].conj();
            }
        }
    }
    let u_d = dec.left_vectors().columns(0, dec.rank());
    let projector = u_d * u_d.adjoint();
    Ok((resolution - projector).norm())
}

/// Coordinates of an observable in the spanning basis plus the
/// Hilbert-Schmidt distance from the span.
pub fn project_observable(
    a: &Operator,
    dec: &FrameDecomposition,
) -> Result<(DVector<Complex64>, f64)> {
    if a.dim() != dec.dim() {
        return Err(Error::DimMismatch {
            expected: dec.dim(),
            got: a.dim(),
        });
    }
    let v = vec_op(a);
    let u_d = dec.left_vectors().columns(0, dec.rank());
    let coords = u_d.adjoint() * v.coords();
    let residual = (v.coords() - u_d * &coords).norm();
    Ok((coords, residual))
}
