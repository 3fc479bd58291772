//! Observable coefficients, the variance operator, the shadow norm and its
//! minimization over the homogeneous free parameters.
//!
//! For an observable `A` inside the measurement span, the per-outcome
//! coefficients split as `a_k = a_k^(p) + (N h)_k`: the particular part
//! reconstructs `A`, the homogeneous part (any kernel combination) drops out
//! of every expectation value but reshapes the variance operator
//! `O_A = sum_k |a_k|^2 E_k`. The shadow norm is the largest eigenvalue of
//! `O_A`; minimizing it over `h` minimizes the sample-complexity bound.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::frame::{DualFrame, Povm};
use crate::hs::{self, vec_op, Operator};

/// Largest Hilbert-Schmidt distance from the measurement span an observable
/// may have before coefficient construction refuses it.
pub const TOL_SUBSPACE: f64 = 1e-8;

/// Per-outcome coefficients of an observable under a parameterized dual
/// frame: `a = a^(p) + N h`.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    particular: DVector<Complex64>,
    null_basis: DMatrix<Complex64>,
    h: DVector<Complex64>,
}

impl CoefficientVector {
    /// Coefficients of `A` at `h = 0`.
    pub fn new(a: &Operator, df: &DualFrame) -> Result<Self> {
        let particular = particular_coeffs(a, df)?;
        let free = df.free_parameters();
        Ok(Self {
            particular,
            null_basis: df.null_basis().clone(),
            h: DVector::zeros(free),
        })
    }

    /// Coefficients of `A` at the given free parameter.
    pub fn with_h(a: &Operator, df: &DualFrame, h: DVector<Complex64>) -> Result<Self> {
        let mut cv = Self::new(a, df)?;
        cv.set_h(h)?;
        Ok(cv)
    }

    /// Wraps an explicit coefficient vector with no homogeneous freedom.
    /// Used for externally supplied estimator baselines.
    pub fn fixed(coeffs: DVector<Complex64>) -> Self {
        let n = coeffs.len();
        Self {
            particular: coeffs,
            null_basis: DMatrix::zeros(n, 0),
            h: DVector::zeros(0),
        }
    }

    /// Coefficients `a_k = Tr(A eta_k)` of `A` against explicit estimators,
    /// with no homogeneous freedom attached.
    pub fn from_estimators(a: &Operator, estimators: &[Operator]) -> Self {
        let coeffs = DVector::from_iterator(
            estimators.len(),
            estimators.iter().map(|e| a.trace_product(e)),
        );
        Self::fixed(coeffs)
    }

    pub fn set_h(&mut self, h: DVector<Complex64>) -> Result<()> {
        if h.len() != self.null_basis.ncols() {
            return Err(Error::LengthMismatch {
                expected: self.null_basis.ncols(),
                got: h.len(),
            });
        }
        self.h = h;
        Ok(())
    }

    pub fn particular(&self) -> &DVector<Complex64> {
        &self.particular
    }

    pub fn null_basis(&self) -> &DMatrix<Complex64> {
        &self.null_basis
    }

    pub fn h(&self) -> &DVector<Complex64> {
        &self.h
    }

    /// The homogeneous part `N h`.
    pub fn homogeneous(&self) -> DVector<Complex64> {
        &self.null_basis * &self.h
    }

    /// The full coefficient vector `a^(p) + N h`.
    pub fn total(&self) -> DVector<Complex64> {
        &self.particular + &self.null_basis * &self.h
    }

    pub fn len(&self) -> usize {
        self.particular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particular.is_empty()
    }

    pub fn free_parameters(&self) -> usize {
        self.null_basis.ncols()
    }
}

/// Particular coefficients `a^(p)_k = Tr(A eta_k^(p))`.
///
/// Fails with [`Error::ObservableOutsideSpan`] when `A` is farther than
/// [`TOL_SUBSPACE`] from the measurement span, since no coefficient vector
/// can reconstruct such an observable.
pub fn particular_coeffs(a: &Operator, df: &DualFrame) -> Result<DVector<Complex64>> {
    if a.dim() != df.dim() {
        return Err(Error::DimMismatch {
            expected: df.dim(),
            got: a.dim(),
        });
    }
    let va = vec_op(a);
    let mut projected = DVector::<Complex64>::zeros(va.ambient_dim());
    for b in df.basis_operators() {
        let vb = vec_op(b);
        let overlap = vb.coords().dotc(va.coords());
        projected += vb.coords() * overlap;
    }
    let residual = (va.coords() - projected).norm();
    if residual > TOL_SUBSPACE {
        return Err(Error::ObservableOutsideSpan { residual });
    }
    Ok(DVector::from_iterator(
        df.outcomes(),
        df.estimators_particular()
            .iter()
            .map(|e| a.trace_product(e)),
    ))
}

/// The variance operator `O_A = sum_k |a_k|^2 E_k`. PSD by construction.
pub fn variance_operator(cv: &CoefficientVector, povm: &Povm) -> Result<Operator> {
    if cv.len() != povm.len() {
        return Err(Error::LengthMismatch {
            expected: povm.len(),
            got: cv.len(),
        });
    }
    let a = cv.total();
    let mut m = DMatrix::<Complex64>::zeros(povm.dim(), povm.dim());
    for (k, e) in povm.effects().iter().enumerate() {
        m += e.matrix() * Complex64::new(a[k].norm_sqr(), 0.0);
    }
    Operator::new(m)
}

/// The shadow norm: largest eigenvalue of the variance operator, i.e. the
/// tightest state-independent upper bound on the single-shot second moment.
pub fn shadow_norm(cv: &CoefficientVector, povm: &Povm) -> Result<f64> {
    let op = variance_operator(cv, povm)?;
    hs::eig_max_hermitian(&op)
}

/// Controls for the homogeneous-parameter search.
#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    /// Random restarts beyond the `h = 0` start.
    pub restarts: usize,
    /// Evaluation budget per simplex run.
    pub max_evals: usize,
    /// Simplex diameter below which a run counts as converged.
    pub tol: f64,
    /// Seed for restart placement.
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_evals: 5000,
            tol: 1e-7,
            seed: 0,
        }
    }
}

/// Outcome of a shadow-norm minimization.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    /// Minimizing free parameter.
    pub h_opt: DVector<Complex64>,
    /// Shadow norm at `h_opt`.
    pub norm_opt: f64,
    /// Shadow norm at `h = 0`.
    pub norm_standard: f64,
    /// Total objective evaluations across restarts and polish.
    pub evaluations: usize,
    /// Whether the winning run satisfied the simplex-diameter criterion.
    pub converged: bool,
    pub restarts_used: usize,
}

/// Minimizes the shadow norm of `A` over the homogeneous parameters,
/// treating the `n - D` complex coordinates as `2(n - D)` real ones.
///
/// The objective is convex but non-smooth at eigenvalue crossings, so the
/// search is derivative-free: a multi-start Nelder-Mead simplex (at `h = 0`
/// plus random restarts in a ball of radius `4 ||a^(p)||`) followed by a
/// coordinate-wise golden-section polish of the best point.
pub fn optimize_shadow_norm(
    a: &Operator,
    df: &DualFrame,
    povm: &Povm,
    opts: &OptimizerOptions,
) -> Result<OptimizationResult> {
    let a_p = particular_coeffs(a, df)?;
    let m = df.free_parameters();
    let base_cv = CoefficientVector::new(a, df)?;
    let norm_standard = shadow_norm(&base_cv, povm)?;
    if m == 0 {
        return Ok(OptimizationResult {
            h_opt: DVector::zeros(0),
            norm_opt: norm_standard,
            norm_standard,
            evaluations: 1,
            converged: true,
            restarts_used: 0,
        });
    }

    let nb = df.null_basis().clone();
    let effects: Vec<DMatrix<Complex64>> =
        povm.effects().iter().map(|e| e.matrix().clone()).collect();
    let d = povm.dim();
    let n = povm.len();
    let objective = move |x: &[f64]| -> f64 {
        let mut op = DMatrix::<Complex64>::zeros(d, d);
        for k in 0..n {
            let mut ak = a_p[k];
            for j in 0..m {
                ak += nb[(k, j)] * Complex64::new(x[j], x[m + j]);
            }
            op += &effects[k] * Complex64::new(ak.norm_sqr(), 0.0);
        }
        hs::eig_max_unchecked(&Operator::new(op).expect("square"))
    };

    let dims = 2 * m;
    let radius = 4.0 * base_cv.particular().norm();
    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![0.0; dims]];
    for _ in 0..opts.restarts {
        starts.push(sample_in_ball(&mut rng, dims, radius));
    }

    let mut evaluations = 0usize;
    let mut best_x = vec![0.0; dims];
    let mut best_f = f64::INFINITY;
    let mut best_converged = false;
    for start in &starts {
        let run = nelder_mead(&objective, start, opts.tol, opts.max_evals);
        evaluations += run.evals;
        if run.f < best_f {
            best_f = run.f;
            best_x = run.x;
            best_converged = run.converged;
        }
    }
    let (polished_x, polished_f, polish_evals) = golden_polish(&objective, best_x, best_f);
    evaluations += polish_evals;

    let h_opt = DVector::from_iterator(
        m,
        (0..m).map(|j| Complex64::new(polished_x[j], polished_x[m + j])),
    );
    Ok(OptimizationResult {
        h_opt,
        norm_opt: polished_f,
        norm_standard,
        evaluations,
        converged: best_converged,
        restarts_used: opts.restarts,
    })
}

fn sample_in_ball(rng: &mut ChaCha12Rng, dims: usize, radius: f64) -> Vec<f64> {
    // Gaussian direction, radially corrected uniform magnitude.
    let mut v: Vec<f64> = (0..dims)
        .map(|_| {
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let mag = radius * rng.random::<f64>().powf(1.0 / dims as f64);
    for x in &mut v {
        *x *= mag / norm;
    }
    v
}

struct SimplexRun {
    x: Vec<f64>,
    f: f64,
    evals: usize,
    converged: bool,
}

/// Nelder-Mead with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2).
#[allow(clippy::needless_range_loop)]
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    tol: f64,
    max_evals: usize,
) -> SimplexRun {
    let dims = start.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        f(x)
    };

    let step = 0.5;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dims + 1);
    let f0 = eval(start);
    simplex.push((start.to_vec(), f0));
    for i in 0..dims {
        let mut p = start.to_vec();
        p[i] += step;
        let fp = eval(&p);
        simplex.push((p, fp));
    }

    let mut converged = false;
    while evals.get() < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| {
                p.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dims)
            .map(|i| simplex[..dims].iter().map(|(p, _)| p[i]).sum::<f64>() / dims as f64)
            .collect();
        let worst = simplex[dims].clone();
        let reflected: Vec<f64> = (0..dims)
            .map(|i| centroid[i] + (centroid[i] - worst.0[i]))
            .collect();
        let f_r = eval(&reflected);

        if f_r < simplex[0].1 {
            let expanded: Vec<f64> = (0..dims)
                .map(|i| centroid[i] + 2.0 * (centroid[i] - worst.0[i]))
                .collect();
            let f_e = eval(&expanded);
            simplex[dims] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
        } else if f_r < simplex[dims - 1].1 {
            simplex[dims] = (reflected, f_r);
        } else {
            let contracted: Vec<f64> = if f_r < worst.1 {
                (0..dims)
                    .map(|i| centroid[i] + 0.5 * (reflected[i] - centroid[i]))
                    .collect()
            } else {
                (0..dims)
                    .map(|i| centroid[i] + 0.5 * (worst.0[i] - centroid[i]))
                    .collect()
            };
            let f_c = eval(&contracted);
            if f_c < worst.1.min(f_r) {
                simplex[dims] = (contracted, f_c);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for i in 0..dims {
                        entry.0[i] = best[i] + 0.5 * (entry.0[i] - best[i]);
                    }
                    entry.1 = eval(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    SimplexRun {
        x: simplex[0].0.clone(),
        f: simplex[0].1,
        evals: evals.get(),
        converged,
    }
}

/// One-dimensional golden-section refinements along each coordinate,
/// repeated twice. Only improvements are kept.
fn golden_polish<F: Fn(&[f64]) -> f64>(
    f: &F,
    mut x: Vec<f64>,
    mut fx: f64,
) -> (Vec<f64>, f64, usize) {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut evals = 0usize;
    for _ in 0..2 {
        for i in 0..x.len() {
            let delta = 0.05 * (1.0 + x[i].abs());
            let mut lo = x[i] - delta;
            let mut hi = x[i] + delta;
            let mut probe = |t: f64| {
                let mut y = x.clone();
                y[i] = t;
                evals += 1;
                f(&y)
            };
            let mut m1 = hi - inv_phi * (hi - lo);
            let mut m2 = lo + inv_phi * (hi - lo);
            let mut f1 = probe(m1);
            let mut f2 = probe(m2);
            while hi - lo > 1e-9 {
                if f1 <= f2 {
                    hi = m2;
                    m2 = m1;
                    f2 = f1;
                    m1 = hi - inv_phi * (hi - lo);
                    f1 = probe(m1);
                } else {
                    lo = m1;
                    m1 = m2;
                    f1 = f2;
                    m2 = lo + inv_phi * (hi - lo);
                    f2 = probe(m2);
                }
            }
            let t = 0.5 * (lo + hi);
            let ft = probe(t);
            if ft < fx {
                x[i] = t;
                fx = ft;
            }
        }
    }
    (x, fx, evals)
}

/// Closed-form Pauli-6 shadow norm of `A = a 1 + x sx + y sy + z sz` under
/// the textbook estimators `3(3E - Tr(E) 1)`:
/// `a^2 + 3(x^2 + y^2 + z^2) + 2|a| sqrt(x^2 + y^2 + z^2)`.
pub fn closed_form_pauli6(a: f64, x: f64, y: f64, z: f64) -> f64 {
    let r2 = x * x + y * y + z * z;
    a * a + 3.0 * r2 + 2.0 * a.abs() * r2.sqrt()
}

/// Closed-form planar-4 shadow norm of `A = a 1 + x sx + y sy` with
/// homogeneous coefficient shift `p (1, 1, -1, -1)`:
///
/// `a^2 + 2(x^2 + y^2) + B(p) + sqrt(C(p))` with `B(p) = |p|^2` and
/// `C(p) = 4 (x^2 (a + Re p)^2 + y^2 (a - Re p)^2)`.
///
/// Derived by maximizing `Tr(sigma O_A)` over states for the coefficient
/// family `(a + p +- 2x, a - p +- 2y)` of the particular solution
/// `4E - Tr(E) 1`; cross-checked against the dense eigenvalue route.
pub fn closed_form_planar(a: f64, x: f64, y: f64, p: Complex64) -> f64 {
    let b = p.norm_sqr();
    let c = 4.0 * (x * x * (a + p.re) * (a + p.re) + y * y * (a - p.re) * (a - p.re));
    a * a + 2.0 * (x * x + y * y) + b + c.max(0.0).sqrt()
}

/// Closed-form planar-4 shadow norm of the equatorial projector at angle
/// `phi`:
///
/// `(1/2) (1 + 2 p_i^2 + B(p_r) + sqrt(2) sqrt(C(phi, p_r)))` with
/// `B(p_r) = 1/2 + 2 p_r^2` and
/// `C(phi, p_r) = 1/2 + 2 p_r^2 + 2 p_r cos(2 phi)`.
///
/// Equals [`closed_form_planar`] under `a -> 1/2`, `x -> cos(phi)/2`,
/// `y -> sin(phi)/2`.
pub fn closed_form_equatorial(phi: f64, p: Complex64) -> f64 {
    let b = 0.5 + 2.0 * p.re * p.re;
    let c = 0.5 + 2.0 * p.re * p.re + 2.0 * p.re * (2.0 * phi).cos();
    0.5 * (1.0 + 2.0 * p.im * p.im + b + std::f64::consts::SQRT_2 * c.max(0.0).sqrt())
}

/// Sample-size scaling surrogate `norm_sq * eps^-2 * ln(1/delta)`. The
/// constant factor is fixed to 1; this tracks how the budget scales, it is
/// not a rigorous tail bound.
// NaN inputs must fail the domain checks, hence the negated comparisons.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn sample_complexity_bound(norm_sq: f64, epsilon: f64, delta: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(norm_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "norm must be nonnegative, got {norm_sq}"
        )));
    }
    Ok(norm_sq / (epsilon * epsilon) * (1.0 / delta).ln())
}
