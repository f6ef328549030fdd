//! Photon modes, the 50-50 beam splitter, and polarization basis changes.
//!
//! The photon register holds the four interferometer modes (path ⊗
//! polarization) plus the two scattered modes `S+`/`S-` left behind by an
//! absorption. Circular labels are `u+ u- l+ l-`; linear labels are
//! `ux uy lx ly`.
//!
//! Polarization convention: σ± = ∓(x ± i·y)/√2, so that
//! x = (σ- − σ+)/√2 and y = i(σ- + σ+)/√2.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{JointState, LinearMap, Register};

/// Name of the photon register.
pub const PHOTON: &str = "photon";

pub const CIRCULAR_BASIS: [&str; 6] = ["u+", "u-", "l+", "l-", "S+", "S-"];
pub const LINEAR_BASIS: [&str; 6] = ["ux", "uy", "lx", "ly", "S+", "S-"];

/// Scattered-photon labels; never seen by a detector.
pub const SCATTERED: [&str; 2] = ["S+", "S-"];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Upper,
    Lower,
}

impl Port {
    pub fn prefix(self) -> &'static str {
        match self {
            Port::Upper => "u",
            Port::Lower => "l",
        }
    }
}

/// Which polarization basis the photon register is currently written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolarizationBasis {
    Circular,
    Linear,
}

impl PolarizationBasis {
    pub fn name(self) -> &'static str {
        match self {
            PolarizationBasis::Circular => "circular",
            PolarizationBasis::Linear => "linear",
        }
    }

    pub fn labels(self) -> [&'static str; 6] {
        match self {
            PolarizationBasis::Circular => CIRCULAR_BASIS,
            PolarizationBasis::Linear => LINEAR_BASIS,
        }
    }

    /// Polarization suffixes in this basis.
    pub fn polarizations(self) -> [&'static str; 2] {
        match self {
            PolarizationBasis::Circular => ["+", "-"],
            PolarizationBasis::Linear => ["x", "y"],
        }
    }
}

/// Input polarization of the photon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolarizationSpec {
    SigmaPlus,
    SigmaMinus,
    X,
    Y,
    /// Arbitrary superposition `plus·σ+ + minus·σ-`.
    Jones {
        plus: Complex64,
        minus: Complex64,
    },
}

impl PolarizationSpec {
    /// Amplitudes on (σ+, σ-).
    pub fn circular_components(self) -> (Complex64, Complex64) {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            PolarizationSpec::SigmaPlus => (ONE, ZERO),
            PolarizationSpec::SigmaMinus => (ZERO, ONE),
            PolarizationSpec::X => (-h, h),
            PolarizationSpec::Y => (I * h, I * h),
            PolarizationSpec::Jones { plus, minus } => (plus, minus),
        }
    }
}

pub fn photon_register(basis: PolarizationBasis) -> Register {
    Register::new(PHOTON, &basis.labels())
}

/// Single photon entering the interferometer through `port`.
pub fn photon_input(port: Port, pol: PolarizationSpec) -> JointState {
    let (plus, minus) = pol.circular_components();
    let p = port.prefix();
    JointState::from_terms(
        vec![photon_register(PolarizationBasis::Circular)],
        [([format!("{p}+")], plus), ([format!("{p}-")], minus)],
    )
    .expect("circular labels are in the photon basis")
}

/// Basis in which the photon register of `s` is written.
pub fn photon_basis(s: &JointState) -> Result<PolarizationBasis> {
    let reg = s
        .register(PHOTON)
        .ok_or_else(|| Error::MissingRegister(PHOTON.to_owned()))?;
    for basis in [PolarizationBasis::Circular, PolarizationBasis::Linear] {
        let labels = basis.labels();
        if reg.dim() == labels.len() && labels.iter().all(|l| reg.index_of(l).is_some()) {
            return Ok(basis);
        }
    }
    Err(Error::LabelMismatch {
        register: PHOTON.to_owned(),
        reason: format!("unrecognised photon basis {:?}", reg.basis()),
    })
}

fn labels(basis: PolarizationBasis) -> Vec<String> {
    basis.labels().iter().map(|l| l.to_string()).collect()
}

fn term(label: &str, amp: Complex64) -> (Vec<String>, Complex64) {
    (vec![label.to_owned()], amp)
}

/// The 50-50 beam splitter map for a given photon basis:
/// |u,μ⟩ → (i|u,μ⟩ + |l,μ⟩)/√2 and |l,μ⟩ → (|u,μ⟩ + i|l,μ⟩)/√2 for each
/// polarization μ. Scattered modes pass through.
pub fn beam_splitter_map(basis: PolarizationBasis) -> LinearMap {
    let h = FRAC_1_SQRT_2;
    let b = labels(basis);
    LinearMap::from_fn(vec![b.clone()], vec![b], |input| {
        let label = input[0];
        let (path, pol) = label.split_at(1);
        match path {
            "u" => vec![term(label, I * h), term(&format!("l{pol}"), Complex64::new(h, 0.0))],
            "l" => vec![term(&format!("u{pol}"), Complex64::new(h, 0.0)), term(label, I * h)],
            _ => vec![term(label, ONE)],
        }
    })
    .expect("beam splitter map is well formed")
}

pub fn beam_splitter(s: &JointState) -> Result<JointState> {
    let basis = photon_basis(s)?;
    s.apply_map(&[PHOTON], &beam_splitter_map(basis))
}

/// Circular → linear relabeling of the photon register.
pub fn circular_to_linear_map() -> LinearMap {
    let h = FRAC_1_SQRT_2;
    LinearMap::from_fn(
        vec![labels(PolarizationBasis::Circular)],
        vec![labels(PolarizationBasis::Linear)],
        |input| {
            let label = input[0];
            let (path, pol) = label.split_at(1);
            let x = format!("{path}x");
            let y = format!("{path}y");
            match (path, pol) {
                ("S", _) => vec![term(label, ONE)],
                // σ+ = -(x + i y)/√2
                (_, "+") => vec![term(&x, Complex64::new(-h, 0.0)), term(&y, -I * h)],
                // σ- = (x - i y)/√2
                _ => vec![term(&x, Complex64::new(h, 0.0)), term(&y, -I * h)],
            }
        },
    )
    .expect("basis change is well formed")
}

/// Linear → circular relabeling; the adjoint of [`circular_to_linear_map`].
pub fn linear_to_circular_map() -> LinearMap {
    let forward = circular_to_linear_map();
    LinearMap::new(
        forward.codomain().to_vec(),
        forward.domain().to_vec(),
        forward.matrix().adjoint(),
    )
    .expect("adjoint has swapped shape")
}

pub fn circular_to_linear(s: &JointState) -> Result<JointState> {
    match photon_basis(s)? {
        PolarizationBasis::Circular => s.apply_map(&[PHOTON], &circular_to_linear_map()),
        PolarizationBasis::Linear => Err(Error::PhotonBasis {
            expected: "circular",
            found: "linear",
        }),
    }
}

pub fn linear_to_circular(s: &JointState) -> Result<JointState> {
    match photon_basis(s)? {
        PolarizationBasis::Linear => s.apply_map(&[PHOTON], &linear_to_circular_map()),
        PolarizationBasis::Circular => Err(Error::PhotonBasis {
            expected: "linear",
            found: "circular",
        }),
    }
}

/// Rewrites the photon register in `target`, converting only if needed.
pub fn to_basis(s: &JointState, target: PolarizationBasis) -> Result<JointState> {
    match (photon_basis(s)?, target) {
        (PolarizationBasis::Circular, PolarizationBasis::Linear) => circular_to_linear(s),
        (PolarizationBasis::Linear, PolarizationBasis::Circular) => linear_to_circular(s),
        _ => Ok(s.clone()),
    }
}
