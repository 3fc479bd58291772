//! Monte Carlo simulation of POVM measurements.
//!
//! Outcomes are drawn from `p_k = Tr(rho E_k)` with a ChaCha12 stream
//! generator, a seedable counter-based algorithm, so histograms are
//! bit-reproducible across platforms and thread counts. Every estimate also
//! has an exact-enumeration twin that consumes the probabilities directly,
//! which turns statistical test assertions into deterministic ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::frame::Povm;
use crate::hs::{hermitian_eigenvalues, Operator, TOL_HERM, TOL_PSD};
use crate::variance::CoefficientVector;

/// Result of one simulated measurement run.
#[derive(Debug, Clone)]
pub struct SamplingRun {
    pub seed: u64,
    pub shots: u64,
    /// Per-outcome counts; sums to `shots`.
    pub counts: Vec<u64>,
    /// Frequency-weighted mean of the coefficients.
    pub mean_estimate: Complex64,
    /// Frequency-weighted mean of `|a_k|^2`.
    pub second_moment: f64,
    /// Frequency-weighted estimator average `(1/shots) sum_k counts_k eta_k`.
    pub shadow_mean: Operator,
}

impl SamplingRun {
    /// Samples `shots` outcomes and aggregates both the scalar estimator and
    /// the shadow average.
    pub fn execute(
        rho: &Operator,
        povm: &Povm,
        cv: &CoefficientVector,
        estimators: &[Operator],
        shots: u64,
        seed: u64,
    ) -> Result<SamplingRun> {
        let probs = outcome_probabilities(rho, povm)?;
        let counts = sample_outcomes(&probs, shots, seed);
        let (mean_estimate, second_moment) = estimate_observable(&counts, cv)?;
        let shadow_mean = shadow_average(&counts, estimators)?;
        Ok(SamplingRun {
            seed,
            shots,
            counts,
            mean_estimate,
            second_moment,
            shadow_mean,
        })
    }
}

/// Outcome distribution `p_k = Tr(rho E_k)`, clipped to `[0, 1]` and
/// renormalized. Rejects inputs that are not states and distributions whose
/// total drifts from 1 by 1e-9 or more.
pub fn outcome_probabilities(rho: &Operator, povm: &Povm) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimMismatch {
            expected: povm.dim(),
            got: rho.dim(),
        });
    }
    let defect = rho.hermiticity_defect();
    if defect > TOL_HERM {
        return Err(Error::InvalidState {
            reason: format!("not Hermitian (defect {defect:.3e})"),
        });
    }
    let trace_dev = (rho.trace() - Complex64::ONE).norm();
    if trace_dev > 1e-9 {
        return Err(Error::InvalidState {
            reason: format!("trace deviates from 1 by {trace_dev:.3e}"),
        });
    }
    let min_eig = hermitian_eigenvalues(rho)?[0];
    if min_eig < -TOL_PSD {
        return Err(Error::InvalidState {
            reason: format!("negative eigenvalue {min_eig:.3e}"),
        });
    }
    let mut probs: Vec<f64> = povm
        .effects()
        .iter()
        .map(|e| rho.trace_product(e).re.clamp(0.0, 1.0))
        .collect();
    let total: f64 = probs.iter().sum();
    let deviation = total - 1.0;
    if deviation.abs() >= 1e-9 {
        return Err(Error::ProbabilityLeak { deviation });
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(probs)
}

/// Multinomial draw: `shots` independent outcomes, tallied into a histogram.
/// Deterministic for a given `(probs, shots, seed)`.
pub fn sample_outcomes(probs: &[f64], shots: u64, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = probs.len() - 1;
        for (k, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = k;
                break;
            }
        }
        counts[chosen] += 1;
    }
    counts
}

fn weighted_moments(weights: &[f64], cv: &CoefficientVector) -> (Complex64, f64) {
    let a = cv.total();
    let mut mean = Complex64::ZERO;
    let mut second = 0.0;
    for (k, w) in weights.iter().enumerate() {
        mean += a[k] * Complex64::new(*w, 0.0);
        second += w * a[k].norm_sqr();
    }
    (mean, second)
}

/// Frequency-weighted estimator moments from a histogram:
/// `mean = sum_k (counts_k / shots) a_k` and the matching second moment.
pub fn estimate_observable(counts: &[u64], cv: &CoefficientVector) -> Result<(Complex64, f64)> {
    if counts.len() != cv.len() {
        return Err(Error::LengthMismatch {
            expected: cv.len(),
            got: counts.len(),
        });
    }
    let shots: u64 = counts.iter().sum();
    if shots == 0 {
        return Err(Error::EmptyHistogram);
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    Ok(weighted_moments(&weights, cv))
}

/// Exact-enumeration moments: the histogram is replaced by the outcome
/// distribution itself.
pub fn estimate_exact(probs: &[f64], cv: &CoefficientVector) -> Result<(Complex64, f64)> {
    if probs.len() != cv.len() {
        return Err(Error::LengthMismatch {
            expected: cv.len(),
            got: probs.len(),
        });
    }
    Ok(weighted_moments(probs, cv))
}

fn weighted_operator(weights: &[f64], estimators: &[Operator]) -> Result<Operator> {
    let first = estimators.first().ok_or(Error::EmptyOperatorList)?;
    let d = first.dim();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (w, eta) in weights.iter().zip(estimators) {
        m += eta.matrix() * Complex64::new(*w, 0.0);
    }
    Operator::new(m)
}

/// The classical shadow: frequency-weighted estimator average. Converges to
/// the projection of the state onto the measurement span as shots grow.
pub fn shadow_average(counts: &[u64], estimators: &[Operator]) -> Result<Operator> {
    if counts.len() != estimators.len() {
        return Err(Error::LengthMismatch {
            expected: estimators.len(),
            got: counts.len(),
        });
    }
    let shots: u64 = counts.iter().sum();
    if shots == 0 {
        return Err(Error::EmptyHistogram);
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    weighted_operator(&weights, estimators)
}

/// Exact-enumeration twin of [`shadow_average`].
pub fn shadow_average_exact(probs: &[f64], estimators: &[Operator]) -> Result<Operator> {
    if probs.len() != estimators.len() {
        return Err(Error::LengthMismatch {
            expected: estimators.len(),
            got: probs.len(),
        });
    }
    weighted_operator(probs, estimators)
}
