//! Hilbert-Schmidt operator algebra.
//!
//! Operators are dense complex `d x d` matrices. Vectorization stacks the
//! columns (column-major matrix-unit basis), the one global convention every
//! frame and dual computation in this crate relies on. The inner product is
//! `<<X|Y>> = Tr(X^dag Y)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Numerical tolerance for exact double-precision identities (vec/unvec
/// round trips, completeness sums).
pub const TOL_NUM: f64 = 1e-12;
/// Hermiticity tolerance: max |X_ij - conj(X_ji)|.
pub const TOL_HERM: f64 = 1e-10;
/// Positive-semidefiniteness tolerance on the smallest eigenvalue.
pub const TOL_PSD: f64 = 1e-9;
/// Eigenvalue accuracy of the dense Hermitian solver.
pub const TOL_EIG: f64 = 1e-10;

/// A dense operator on a `d`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: DMatrix<Complex64>,
}

impl Operator {
    /// Wraps a square matrix. Fails if the matrix is not square.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = entries.nrows();
        if entries.ncols() != dim || dim == 0 {
            return Err(Error::NotSquare(dim));
        }
        Ok(Self { dim, entries })
    }

    /// Builds an operator from a row-major slice of entries.
    pub fn from_rows(dim: usize, rows: &[Complex64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: rows.len(),
            });
        }
        Ok(Self {
            dim,
            entries: DMatrix::from_row_slice(dim, dim, rows),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `Tr(self * other)`.
    pub fn trace_product(&self, other: &Operator) -> Complex64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut acc = Complex64::ZERO;
        for i in 0..self.dim {
            for k in 0..self.dim {
                acc += self.entries[(i, k)] * other.entries[(k, i)];
            }
        }
        acc
    }

    /// Max deviation from Hermiticity, `max_ij |X_ij - conj(X_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let dev = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// PSD check: Hermitian and min eigenvalue >= -tol.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(TOL_HERM) {
            return false;
        }
        min_eig_hermitian_unchecked(self) >= -tol
    }

    pub fn scale(&self, factor: Complex64) -> Operator {
        Operator {
            dim: self.dim,
            entries: &self.entries * factor,
        }
    }

    pub fn add(&self, other: &Operator) -> Operator {
        debug_assert_eq!(self.dim, other.dim);
        Operator {
            dim: self.dim,
            entries: &self.entries + &other.entries,
        }
    }

    pub fn sub(&self, other: &Operator) -> Operator {
        debug_assert_eq!(self.dim, other.dim);
        Operator {
            dim: self.dim,
            entries: &self.entries - &other.entries,
        }
    }

    /// Largest entrywise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                worst = worst.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        worst
    }
}

/// Vectorized operator: coordinates of `vec(X)` in the column-stacked
/// matrix-unit basis of the Hilbert-Schmidt space.
#[derive(Debug, Clone, PartialEq)]
pub struct HsVector {
    coords: DVector<Complex64>,
}

impl HsVector {
    pub fn new(coords: DVector<Complex64>) -> Self {
        Self { coords }
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<Complex64> {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

/// Column-stacks an operator into its Hilbert-Schmidt coordinate vector.
pub fn vec_op(x: &Operator) -> HsVector {
    let d = x.dim();
    let mut coords = DVector::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            coords[j * d + i] = x.matrix()[(i, j)];
        }
    }
    HsVector::new(coords)
}

/// Inverse of [`vec_op`]; fails unless the length is a perfect square.
pub fn unvec(v: &HsVector) -> Result<Operator> {
    let len = v.ambient_dim();
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len {
        return Err(Error::NotSquare(d));
    }
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            m[(i, j)] = v.coords()[j * d + i];
        }
    }
    Operator::new(m)
}

/// `<<x|y>> = sum_i conj(x_i) y_i`, conjugate-linear in the first argument.
/// Equals `Tr(X^dag Y)` for `x = vec(X)`, `y = vec(Y)`.
pub fn hs_inner(x: &HsVector, y: &HsVector) -> Result<Complex64> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(Error::DimMismatch {
            expected: x.ambient_dim(),
            got: y.ambient_dim(),
        });
    }
    Ok(x.coords().dotc(y.coords()))
}

/// Kronecker product of the factors in the listed order.
pub fn tensor(factors: &[Operator]) -> Result<Operator> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyOperatorList)?;
    let mut acc = first.matrix().clone();
    for f in rest {
        acc = acc.kronecker(f.matrix());
    }
    Operator::new(acc)
}

/// All eigenvalues of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(x: &Operator) -> Result<Vec<f64>> {
    let defect = x.hermiticity_defect();
    if defect > TOL_HERM {
        return Err(Error::NotHermitian {
            max_deviation: defect,
        });
    }
    Ok(eigenvalues_unchecked(x))
}

/// Largest eigenvalue of a Hermitian operator.
pub fn eig_max_hermitian(x: &Operator) -> Result<f64> {
    let defect = x.hermiticity_defect();
    if defect > TOL_HERM {
        return Err(Error::NotHermitian {
            max_deviation: defect,
        });
    }
    Ok(eig_max_unchecked(x))
}

pub(crate) fn eig_max_unchecked(x: &Operator) -> f64 {
    let d = x.dim();
    if d == 1 {
        return x.matrix()[(0, 0)].re;
    }
    if d == 2 {
        // Direct 2x2 solve: eigenvalues are mean +- sqrt(mean^2 - det).
        let m = x.matrix();
        let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
        let det = m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr();
        return mean + (mean * mean - det).max(0.0).sqrt();
    }
    x.matrix()
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn min_eig_hermitian_unchecked(x: &Operator) -> f64 {
    let d = x.dim();
    if d == 1 {
        return x.matrix()[(0, 0)].re;
    }
    if d == 2 {
        let m = x.matrix();
        let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
        let det = m[(0, 0)].re * m[(1, 1)].re - m[(0, 1)].norm_sqr();
        return mean - (mean * mean - det).max(0.0).sqrt();
    }
    x.matrix()
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn eigenvalues_unchecked(x: &Operator) -> Vec<f64> {
    let mut vals: Vec<f64> = x
        .matrix()
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// The qubit constants `(identity, sigma_x, sigma_y, sigma_z)`.
pub fn pauli_ops() -> (Operator, Operator, Operator, Operator) {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    let i = Complex64::I;
    let id = Operator::from_rows(2, &[one, z, z, one]).unwrap();
    let sx = Operator::from_rows(2, &[z, one, one, z]).unwrap();
    let sy = Operator::from_rows(2, &[z, -i, i, z]).unwrap();
    let sz = Operator::from_rows(2, &[one, z, z, -one]).unwrap();
    (id, sx, sy, sz)
}
