//! Dual-frame estimators ("shadow inversions") for arbitrary finite POVMs.
//!
//! A POVM that is overcomplete on its operator span admits a whole family of
//! unbiased single-shot estimators, parameterized by the kernel of its frame
//! matrix. This crate constructs that family, minimizes the shadow norm of a
//! target observable over the free parameters, and verifies the variance
//! reduction both in closed form and by Monte Carlo measurement simulation.
//!
//! Modules:
//! - [`hs`]: dense complex operator algebra (vectorization, inner products,
//!   tensor products, Hermitian eigensolves).
//! - [`frame`]: POVM validation, frame-matrix SVD, particular dual frame and
//!   kernel basis.
//! - [`variance`]: coefficient vectors, variance operator, shadow norm,
//!   its minimization and the worked closed forms.
//! - [`product`]: tensor-product measurements, multiplicative norms and
//!   scaling tables.
//! - [`sampler`]: seeded outcome sampling plus exact-enumeration twins.
//! - [`povms`]: the built-in Pauli-6, planar-4 and triangle POVMs with their
//!   textbook estimators.

pub mod error;
pub mod frame;
pub mod hs;
pub mod povms;
pub mod product;
pub mod sampler;
pub mod variance;

pub use error::{Error, Result};
pub use frame::{
    assemble_estimators, check_duality, frame_matrix, particular_dual, project_observable,
    validate_povm, DualFrame, FrameDecomposition, Povm, RANK_TOL,
};
pub use hs::{
    eig_max_hermitian, hermitian_eigenvalues, hs_inner, pauli_ops, tensor, unvec, vec_op, HsVector,
    Operator, TOL_EIG, TOL_HERM, TOL_NUM, TOL_PSD,
};
pub use povms::{
    bloch_projector, by_name, canonical_estimators, clifford_reference_norm, equatorial_projector,
    pauli6, planar4, triangle3, NamedPovm, PovmName,
};
pub use product::{product_norm, product_norm_direct, scaling_curve, ProductSpec, ScalingRow};
pub use sampler::{
    estimate_exact, estimate_observable, outcome_probabilities, sample_outcomes, shadow_average,
    shadow_average_exact, SamplingRun,
};
pub use variance::{
    closed_form_equatorial, closed_form_pauli6, closed_form_planar, optimize_shadow_norm,
    particular_coeffs, sample_complexity_bound, shadow_norm, variance_operator, CoefficientVector,
    OptimizationResult, OptimizerOptions, TOL_SUBSPACE,
};
