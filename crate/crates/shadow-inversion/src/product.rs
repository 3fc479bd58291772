//! Tensor-product measurements and product observables.
//!
//! For local POVMs and a product observable the shadow norm factorizes, so
//! each site is optimized independently at linear cost in the number of
//! sites. The dense joint construction is kept only as a validation path and
//! capped at three qubits.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{frame_matrix, particular_dual, Povm};
use crate::hs::{self, Operator};
use crate::variance::{
    optimize_shadow_norm, shadow_norm, CoefficientVector, OptimizerOptions, TOL_SUBSPACE,
};

/// Largest joint Hilbert-space dimension the dense validation path accepts
/// (three qubits).
pub const MAX_DENSE_DIM: usize = 8;

/// An ordered list of per-site measurement/observable pairs.
#[derive(Debug, Clone)]
pub struct ProductSpec {
    sites: Vec<(Povm, Operator)>,
}

impl ProductSpec {
    /// Validates that every site observable lies inside that site's span.
    pub fn new(sites: Vec<(Povm, Operator)>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptyOperatorList);
        }
        for (povm, obs) in &sites {
            let dec = frame_matrix(povm)?;
            let (_, residual) = crate::frame::project_observable(obs, &dec)?;
            if residual > TOL_SUBSPACE {
                return Err(Error::ObservableOutsideSpan { residual });
            }
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[(Povm, Operator)] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn joint_dim(&self) -> usize {
        self.sites.iter().map(|(p, _)| p.dim()).product()
    }
}

/// Product shadow norm: each site contributes its own factor, optimized
/// independently when `optimized` is set, evaluated at `h = 0` otherwise.
pub fn product_norm(spec: &ProductSpec, optimized: bool, opts: &OptimizerOptions) -> Result<f64> {
    let mut total = 1.0;
    for (povm, obs) in spec.sites() {
        let dec = frame_matrix(povm)?;
        let df = particular_dual(&dec)?;
        let factor = if optimized {
            optimize_shadow_norm(obs, &df, povm, opts)?.norm_opt
        } else {
            shadow_norm(&CoefficientVector::new(obs, &df)?, povm)?
        };
        total *= factor;
    }
    Ok(total)
}

/// Dense validation route: builds the full tensor POVM, forms the joint
/// coefficient vector as the tensor of the per-site coefficient vectors at
/// the supplied parameters, and evaluates the shadow norm on the composite
/// system directly.
pub fn product_norm_direct(spec: &ProductSpec, h_per_site: &[DVector<Complex64>]) -> Result<f64> {
    if h_per_site.len() != spec.len() {
        return Err(Error::LengthMismatch {
            expected: spec.len(),
            got: h_per_site.len(),
        });
    }
    let joint_dim = spec.joint_dim();
    if joint_dim > MAX_DENSE_DIM {
        return Err(Error::DimTooLarge {
            dim: joint_dim,
            cap: MAX_DENSE_DIM,
        });
    }

    let mut site_coeffs: Vec<DVector<Complex64>> = Vec::with_capacity(spec.len());
    for ((povm, obs), h) in spec.sites().iter().zip(h_per_site) {
        let dec = frame_matrix(povm)?;
        let df = particular_dual(&dec)?;
        let cv = CoefficientVector::with_h(obs, &df, h.clone())?;
        site_coeffs.push(cv.total());
    }

    // Joint coefficients and effects in site-major outcome order
    // (k_1 outermost).
    let mut joint_coeffs: Vec<Complex64> = vec![Complex64::ONE];
    let mut joint_effects: Vec<Operator> = vec![Operator::identity(1)];
    for ((povm, _), coeffs) in spec.sites().iter().zip(&site_coeffs) {
        let mut next_coeffs = Vec::with_capacity(joint_coeffs.len() * povm.len());
        let mut next_effects = Vec::with_capacity(joint_effects.len() * povm.len());
        for (prev_c, prev_e) in joint_coeffs.iter().zip(&joint_effects) {
            for (k, effect) in povm.effects().iter().enumerate() {
                next_coeffs.push(prev_c * coeffs[k]);
                next_effects.push(hs::tensor(&[prev_e.clone(), effect.clone()])?);
            }
        }
        joint_coeffs = next_coeffs;
        joint_effects = next_effects;
    }

    let mut op = nalgebra::DMatrix::<Complex64>::zeros(joint_dim, joint_dim);
    for (c, e) in joint_coeffs.iter().zip(&joint_effects) {
        op += e.matrix() * Complex64::new(c.norm_sqr(), 0.0);
    }
    hs::eig_max_hermitian(&Operator::new(op)?)
}

/// One row of the exponential-separation table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: u32,
    pub norm_a_pow: f64,
    pub norm_b_pow: f64,
    /// `norm_a^n / norm_b^n`.
    pub ratio: f64,
}

/// Pure-arithmetic scaling table: per-site norms raised to the site count.
pub fn scaling_curve(norm_site_a: f64, norm_site_b: f64, n_max: u32) -> Result<Vec<ScalingRow>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument(
            "scaling table needs at least one row".into(),
        ));
    }
    Ok((1..=n_max)
        .map(|n| {
            let a = norm_site_a.powi(n as i32);
            let b = norm_site_b.powi(n as i32);
            ScalingRow {
                n,
                norm_a_pow: a,
                norm_b_pow: b,
                ratio: a / b,
            }
        })
        .collect())
}
