//! End-to-end checks of the inversion pipeline through the public API,
//! including a randomized overcomplete POVM that is not one of the built-ins.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use shadow_inversion::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_psd(rng: &mut ChaCha12Rng, d: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(d, d, |_, _| {
        c(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        )
    });
    &m * m.adjoint()
}

fn random_state(rng: &mut ChaCha12Rng, d: usize) -> Operator {
    let m = random_psd(rng, d);
    let trace = m.trace();
    Operator::new(m / trace).unwrap()
}

/// Random overcomplete POVM on dimension `d` with `n` outcomes: random PSD
/// operators squeezed through S^(-1/2) so they sum to the identity.
fn random_povm(rng: &mut ChaCha12Rng, d: usize, n: usize) -> Povm {
    let raw: Vec<DMatrix<Complex64>> = (0..n).map(|_| random_psd(rng, d)).collect();
    let mut total = DMatrix::<Complex64>::zeros(d, d);
    for m in &raw {
        total += m;
    }
    let eig = total.symmetric_eigen();
    let mut inv_sqrt = DMatrix::<Complex64>::zeros(d, d);
    for (i, val) in eig.eigenvalues.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        let scale = c(1.0 / val.sqrt(), 0.0);
        inv_sqrt += (col * col.adjoint()) * scale;
    }
    let effects: Vec<Operator> = raw
        .into_iter()
        .map(|m| {
            // Symmetrize away the last bits of rounding.
            let e = &inv_sqrt * m * &inv_sqrt;
            let herm = (&e + e.adjoint()) * c(0.5, 0.0);
            Operator::new(herm).unwrap()
        })
        .collect();
    validate_povm(effects).expect("squeezed effects form a POVM")
}

#[test]
fn unbiasedness_for_fifty_random_states_and_parameters() {
    let named = pauli6();
    let dec = frame_matrix(&named.povm).unwrap();
    let df = particular_dual(&dec).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    for _ in 0..50 {
        let h = DVector::from_fn(df.free_parameters(), |_, _| {
            c(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        });
        let etas = assemble_estimators(&df, &h).unwrap();
        let rho = random_state(&mut rng, 2);
        let probs = outcome_probabilities(&rho, &named.povm).unwrap();
        let reconstruction = shadow_average_exact(&probs, &etas).unwrap();
        assert!(reconstruction.max_abs_diff(&rho) < 1e-9);
    }
}

#[test]
fn constrained_povm_reconstructs_the_projected_state() {
    // On the planar POVM the shadow average converges to the projection of
    // rho onto the measurement span, not rho itself.
    let named = planar4();
    let dec = frame_matrix(&named.povm).unwrap();
    let df = particular_dual(&dec).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(103);
    for _ in 0..50 {
        let h = DVector::from_fn(df.free_parameters(), |_, _| {
            c(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            )
        });
        let etas = assemble_estimators(&df, &h).unwrap();
        let rho = random_state(&mut rng, 2);
        let probs = outcome_probabilities(&rho, &named.povm).unwrap();
        let reconstruction = shadow_average_exact(&probs, &etas).unwrap();

        let (coords, _) = project_observable(&rho, &dec).unwrap();
        let mut projected = Operator::zeros(2);
        for (s, b) in df.basis_operators().iter().enumerate() {
            projected = projected.add(&b.scale(coords[s]));
        }
        assert!(reconstruction.max_abs_diff(&projected) < 1e-9);
        // rho generically has a z-component the planar POVM cannot see.
        assert!(reconstruction.max_abs_diff(&rho) < 2.0);
    }
}

#[test]
fn random_qutrit_povm_round_trip() {
    let mut rng = ChaCha12Rng::seed_from_u64(102);
    let povm = random_povm(&mut rng, 3, 12);
    let dec = frame_matrix(&povm).unwrap();
    assert_eq!(dec.rank(), 9, "random effects span the full qutrit space");
    assert_eq!(dec.free_parameters(), 3);
    assert!(dec.reconstruction_error() < 1e-10);

    let df = particular_dual(&dec).unwrap();
    assert!(check_duality(&povm, df.estimators_particular()).unwrap() < 1e-10);

    // Unbiased reconstruction at a random homogeneous parameter.
    let h = DVector::from_fn(3, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let etas = assemble_estimators(&df, &h).unwrap();
    let rho = random_state(&mut rng, 3);
    let probs = outcome_probabilities(&rho, &povm).unwrap();
    let reconstruction = shadow_average_exact(&probs, &etas).unwrap();
    assert!(reconstruction.max_abs_diff(&rho) < 1e-9);

    // Optimization never loses to the particular solution and the optimal
    // variance operator stays PSD.
    let obs = random_state(&mut rng, 3).scale(c(3.0, 0.0));
    let opts = OptimizerOptions {
        restarts: 4,
        ..OptimizerOptions::default()
    };
    let result = optimize_shadow_norm(&obs, &df, &povm, &opts).unwrap();
    assert!(result.norm_opt <= result.norm_standard + 1e-9);
    assert!(result.norm_opt >= 0.0);
    let cv = CoefficientVector::with_h(&obs, &df, result.h_opt.clone()).unwrap();
    let op = variance_operator(&cv, &povm).unwrap();
    assert!(hermitian_eigenvalues(&op).unwrap()[0] >= -1e-10);

    // The second moment at the optimum is dominated by the optimized norm
    // for every state probed.
    for _ in 0..10 {
        let sigma = random_state(&mut rng, 3);
        let probs = outcome_probabilities(&sigma, &povm).unwrap();
        let (_, second) = estimate_exact(&probs, &cv).unwrap();
        assert!(second <= result.norm_opt + 1e-9);
    }
}

#[test]
fn kernel_dimensions_of_the_builtins() {
    for (named, expected) in [(pauli6(), 2usize), (planar4(), 1), (triangle3(), 0)] {
        let dec = frame_matrix(&named.povm).unwrap();
        assert_eq!(dec.free_parameters(), expected, "{}", named.name.as_str());
        assert_eq!(dec.null_basis().ncols(), expected);
    }
}

#[test]
fn sampled_runs_are_reproducible_across_identical_seeds() {
    let named = triangle3();
    let dec = frame_matrix(&named.povm).unwrap();
    let df = particular_dual(&dec).unwrap();
    let rho = bloch_projector(std::f64::consts::FRAC_PI_2, 0.4);
    let cv = CoefficientVector::new(&equatorial_projector(1.0), &df).unwrap();
    let etas = df.estimators_particular().to_vec();
    let a = SamplingRun::execute(&rho, &named.povm, &cv, &etas, 50_000, 77).unwrap();
    let b = SamplingRun::execute(&rho, &named.povm, &cv, &etas, 50_000, 77).unwrap();
    assert_eq!(a.counts, b.counts);
    assert_eq!(a.mean_estimate, b.mean_estimate);
    let other = SamplingRun::execute(&rho, &named.povm, &cv, &etas, 50_000, 78).unwrap();
    assert_ne!(a.counts, other.counts);
}
