//! Built-in qubit POVMs, their textbook estimators and observable families.
//!
//! Effect ordering is fixed and load-bearing: `(x+, x-, y+, y-, z+, z-)` for
//! the Pauli-6 POVM, `(x+, x-, y+, y-)` for the planar-4 POVM and `k = 0, 1,
//! 2` for the triangle POVM. Coefficient vectors and CSV columns follow it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::{validate_povm, Povm};
use crate::hs::{pauli_ops, Operator};

/// Identifier for the built-in POVMs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PovmName {
    Pauli6,
    Planar4,
    Triangle3,
}

impl PovmName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pauli6" => Some(Self::Pauli6),
            "planar4" => Some(Self::Planar4),
            "triangle3" => Some(Self::Triangle3),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pauli6 => "pauli6",
            Self::Planar4 => "planar4",
            Self::Triangle3 => "triangle3",
        }
    }
}

/// A built-in POVM together with its expected span dimension and number of
/// free homogeneous parameters.
#[derive(Debug, Clone)]
pub struct NamedPovm {
    pub name: PovmName,
    pub povm: Povm,
    pub expected_rank: usize,
    pub expected_free: usize,
}

/// The six normalized Pauli eigenprojectors `(1 +- sigma_zeta)/6`.
pub fn pauli6() -> NamedPovm {
    let (id, sx, sy, sz) = pauli_ops();
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let mut effects = Vec::new();
    for s in [&sx, &sy, &sz] {
        effects.push(id.add(s).scale(sixth));
        effects.push(id.sub(s).scale(sixth));
    }
    NamedPovm {
        name: PovmName::Pauli6,
        povm: validate_povm(effects).expect("built-in POVM is valid"),
        expected_rank: 4,
        expected_free: 2,
    }
}

/// The four equatorial effects `(1 +- sigma_zeta)/4`, `zeta in {x, y}`.
pub fn planar4() -> NamedPovm {
    let (id, sx, sy, _) = pauli_ops();
    let quarter = Complex64::new(0.25, 0.0);
    let mut effects = Vec::new();
    for s in [&sx, &sy] {
        effects.push(id.add(s).scale(quarter));
        effects.push(id.sub(s).scale(quarter));
    }
    NamedPovm {
        name: PovmName::Planar4,
        povm: validate_povm(effects).expect("built-in POVM is valid"),
        expected_rank: 3,
        expected_free: 1,
    }
}

/// Three symmetric rank-1 effects `(2/3)|psi_k><psi_k|` with
/// `|psi_k> = (|0> + e^{i 2 pi k / 3} |1>)/sqrt(2)`.
pub fn triangle3() -> NamedPovm {
    let mut effects = Vec::new();
    for k in 0..3 {
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0);
        let amp = Complex64::new(1.0 / 2.0_f64.sqrt(), 0.0);
        let v = [amp, amp * phase];
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = v[i] * v[j].conj() * Complex64::new(2.0 / 3.0, 0.0);
            }
        }
        effects.push(Operator::new(m).unwrap());
    }
    NamedPovm {
        name: PovmName::Triangle3,
        povm: validate_povm(effects).expect("built-in POVM is valid"),
        expected_rank: 3,
        expected_free: 0,
    }
}

pub fn by_name(name: &str) -> Option<NamedPovm> {
    Some(match PovmName::parse(name)? {
        PovmName::Pauli6 => pauli6(),
        PovmName::Planar4 => planar4(),
        PovmName::Triangle3 => triangle3(),
    })
}

/// The estimators displayed alongside each built-in POVM:
/// `3(3 E - Tr(E) 1)` for Pauli-6, `4 E - Tr(E) 1` for planar-4 and
/// `3 E - (3/4) Tr(E) 1` for the triangle.
pub fn canonical_estimators(name: PovmName) -> Vec<Operator> {
    let (factor, trace_factor) = match name {
        PovmName::Pauli6 => (9.0, 3.0),
        PovmName::Planar4 => (4.0, 1.0),
        PovmName::Triangle3 => (3.0, 0.75),
    };
    let named = match name {
        PovmName::Pauli6 => pauli6(),
        PovmName::Planar4 => planar4(),
        PovmName::Triangle3 => triangle3(),
    };
    named
        .povm
        .effects()
        .iter()
        .map(|e| {
            let id_part = Operator::identity(2).scale(e.trace() * trace_factor);
            e.scale(Complex64::new(factor, 0.0)).sub(&id_part)
        })
        .collect()
}

/// Rank-1 projector at Bloch angles `(theta, phi)`:
/// `(1 + sin t cos p sx + sin t sin p sy + cos t sz)/2`.
pub fn bloch_projector(theta: f64, phi: f64) -> Operator {
    let (id, sx, sy, sz) = pauli_ops();
    let half = Complex64::new(0.5, 0.0);
    let nx = Complex64::new(theta.sin() * phi.cos(), 0.0);
    let ny = Complex64::new(theta.sin() * phi.sin(), 0.0);
    let nz = Complex64::new(theta.cos(), 0.0);
    id.add(&sx.scale(nx))
        .add(&sy.scale(ny))
        .add(&sz.scale(nz))
        .scale(half)
}

/// Equatorial projector `|psi(phi)><psi(phi)|` with
/// `|psi(phi)> = (|0> + e^{i phi} |1>)/sqrt(2)`.
pub fn equatorial_projector(phi: f64) -> Operator {
    bloch_projector(std::f64::consts::FRAC_PI_2, phi)
}

/// `Tr(A^2)`, the norm obtained from global Clifford measurements, exposed
/// purely as a comparison constant. No Clifford sampling happens here.
pub fn clifford_reference_norm(a: &Operator) -> Result<f64> {
    let defect = a.hermiticity_defect();
    if defect > crate::hs::TOL_HERM {
        return Err(Error::NotHermitian {
            max_deviation: defect,
        });
    }
    Ok(a.trace_product(a).re)
}
