//! Atom models and the polarization-selective absorption rule.
//!
//! The excited level is eliminated: a resonant photon in the atom's arm takes
//! the atom straight to `g` and leaves a scattered photon `S±` behind. Atoms
//! in `g` are transparent. Spectators sit outside the interferometer and are
//! never touched.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{photon_basis, PolarizationBasis, PHOTON};
use crate::state::{JointState, LinearMap, Register};

pub const M_PLUS: &str = "m+";
pub const M_MINUS: &str = "m-";
pub const GROUND: &str = "g";

pub const ATOM_BASIS: [&str; 3] = [M_PLUS, M_MINUS, GROUND];
pub const SPECTATOR_BASIS: [&str; 2] = [M_PLUS, M_MINUS];

/// Tolerance on |norm - 1| of an atomic preparation before it is rejected.
pub const PREPARATION_TOLERANCE: f64 = 1e-9;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Upper,
    Lower,
    Outside,
}

impl Arm {
    fn prefix(self) -> Option<&'static str> {
        match self {
            Arm::Upper => Some("u"),
            Arm::Lower => Some("l"),
            Arm::Outside => None,
        }
    }
}

/// Circular polarization, used for the resonance of a two-level atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Circular {
    #[serde(rename = "sigma+")]
    Plus,
    #[serde(rename = "sigma-")]
    Minus,
}

impl Circular {
    pub fn sign(self) -> &'static str {
        match self {
            Circular::Plus => "+",
            Circular::Minus => "-",
        }
    }

    fn level(self) -> &'static str {
        match self {
            Circular::Plus => M_PLUS,
            Circular::Minus => M_MINUS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomVariant {
    /// Absorbs every polarization; has no internal state.
    ClassicalOpaque,
    /// Absorbs only `resonant` light, and only from the matching level.
    TwoLevel {
        resonant: Circular,
    },
    /// Four-level atom: `m+` absorbs σ+, `m-` absorbs σ-.
    HalfAbsorber,
    Spectator,
}

impl AtomVariant {
    pub fn name(self) -> &'static str {
        match self {
            AtomVariant::ClassicalOpaque => "classical_opaque",
            AtomVariant::TwoLevel { .. } => "two_level",
            AtomVariant::HalfAbsorber => "half_absorber",
            AtomVariant::Spectator => "spectator",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomModel {
    variant: AtomVariant,
    id: String,
    arm: Arm,
}

impl AtomModel {
    pub fn new<S: Into<String>>(variant: AtomVariant, id: S, arm: Arm) -> Result<Self> {
        let id = id.into();
        let outside = arm == Arm::Outside;
        let spectator = variant == AtomVariant::Spectator;
        if outside != spectator {
            return Err(Error::Preparation(format!(
                "atom `{id}`: {} cannot sit in arm {arm:?}",
                variant.name()
            )));
        }
        if id == PHOTON {
            return Err(Error::DuplicateRegister(id));
        }
        Ok(AtomModel { variant, id, arm })
    }

    pub fn half_absorber<S: Into<String>>(id: S, arm: Arm) -> Result<Self> {
        AtomModel::new(AtomVariant::HalfAbsorber, id, arm)
    }

    pub fn spectator<S: Into<String>>(id: S) -> Self {
        AtomModel::new(AtomVariant::Spectator, id, Arm::Outside).expect("spectators sit outside")
    }

    pub fn variant(&self) -> AtomVariant {
        self.variant
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn arm(&self) -> Arm {
        self.arm
    }

    pub fn absorbs(&self) -> bool {
        self.variant != AtomVariant::Spectator
    }

    /// Internal-state register, if the model has one.
    pub fn register(&self) -> Option<Register> {
        match self.variant {
            AtomVariant::ClassicalOpaque => None,
            AtomVariant::Spectator => Some(Register::new(self.id.clone(), &SPECTATOR_BASIS)),
            _ => Some(Register::new(self.id.clone(), &ATOM_BASIS)),
        }
    }
}

fn owned(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|l| l.to_string()).collect()
}

fn passthrough(labels: &[&str]) -> Vec<(Vec<String>, Complex64)> {
    vec![(owned(labels), ONE)]
}

/// The absorption map of `model` on (photon) or (photon, atom), with the
/// photon register in the circular basis. Scattered and off-arm components
/// pass through, so the map is an isometry on states with no scattered photon.
pub fn absorption_map(model: &AtomModel) -> Option<LinearMap> {
    let k = model.arm.prefix()?;
    let photon = owned(&PolarizationBasis::Circular.labels());
    let map = match model.variant {
        AtomVariant::Spectator => return None,
        AtomVariant::ClassicalOpaque => LinearMap::from_fn(vec![photon.clone()], vec![photon], |input| {
            let (path, pol) = input[0].split_at(1);
            if path == k {
                vec![(vec![format!("S{pol}")], ONE)]
            } else {
                passthrough(input)
            }
        }),
        AtomVariant::TwoLevel { resonant } => {
            let atom = owned(&ATOM_BASIS);
            LinearMap::from_fn(vec![photon.clone(), atom.clone()], vec![photon, atom], |input| {
                let (path, pol) = input[0].split_at(1);
                if path == k && pol == resonant.sign() && input[1] == resonant.level() {
                    vec![(vec![format!("S{pol}"), GROUND.to_owned()], ONE)]
                } else {
                    passthrough(input)
                }
            })
        }
        AtomVariant::HalfAbsorber => {
            let atom = owned(&ATOM_BASIS);
            LinearMap::from_fn(vec![photon.clone(), atom.clone()], vec![photon, atom], |input| {
                let (path, pol) = input[0].split_at(1);
                let level = match pol {
                    "+" => M_PLUS,
                    "-" => M_MINUS,
                    _ => "",
                };
                if path == k && input[1] == level {
                    vec![(vec![format!("S{pol}"), GROUND.to_owned()], ONE)]
                } else {
                    passthrough(input)
                }
            })
        }
    };
    Some(map.expect("absorption map is well formed"))
}

/// Passes the photon through the atom described by `model`.
pub fn interact(s: &JointState, model: &AtomModel) -> Result<JointState> {
    if model.register().is_some() {
        s.position(&model.id)?;
    }
    match photon_basis(s)? {
        PolarizationBasis::Circular => {}
        PolarizationBasis::Linear => {
            return Err(Error::PhotonBasis {
                expected: "circular",
                found: "linear",
            })
        }
    }
    match absorption_map(model) {
        None => Ok(s.clone()),
        Some(map) if model.variant == AtomVariant::ClassicalOpaque => s.apply_map(&[PHOTON], &map),
        Some(map) => s.apply_map(&[PHOTON, &model.id], &map),
    }
}

/// Amplitudes for the initial atomic state: one list per atom, plus an
/// optional joint (entangled) preparation over several atoms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AtomInitialState {
    pub single: Vec<(String, Vec<(String, Complex64)>)>,
    pub joint: Option<JointAmplitudes>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointAmplitudes {
    pub atoms: Vec<String>,
    pub terms: Vec<(Vec<String>, Complex64)>,
}

impl AtomInitialState {
    /// Every listed atom in the same single-atom state.
    pub fn uniform(ids: &[&str], amplitudes: &[(&str, Complex64)]) -> Self {
        AtomInitialState {
            single: ids
                .iter()
                .map(|id| {
                    let amps = amplitudes.iter().map(|(l, a)| (l.to_string(), *a)).collect();
                    (id.to_string(), amps)
                })
                .collect(),
            joint: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PreparedAtoms {
    pub state: JointState,
    pub warnings: Vec<String>,
}

fn check_norm(what: &str, state: JointState, warnings: &mut Vec<String>) -> Result<JointState> {
    let n = state.norm();
    if (n - 1.0).abs() > PREPARATION_TOLERANCE {
        return Err(Error::Preparation(format!("{what} has norm {n}, expected 1")));
    }
    if (n - 1.0).abs() > crate::state::NORM_TOLERANCE {
        warnings.push(format!("{what} had norm {n}; renormalized"));
    }
    state.normalize()
}

/// Builds the atomic factor that gets tensored with the photon input.
///
/// Register order: the atoms of the joint preparation (in its order), then the
/// remaining atoms with an internal state in `models` order. Classical
/// absorbers contribute no register.
pub fn prepare_atoms(spec: &AtomInitialState, models: &[AtomModel]) -> Result<PreparedAtoms> {
    let mut warnings = Vec::new();
    let find = |id: &str| {
        models
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| Error::Preparation(format!("no atom named `{id}`")))
    };
    let mut covered: Vec<&str> = Vec::new();
    let mut state = JointState::scalar();

    if let Some(joint) = &spec.joint {
        let mut registers = Vec::new();
        for id in &joint.atoms {
            let reg = find(id)?
                .register()
                .ok_or_else(|| Error::Preparation(format!("classical absorber `{id}` has no state")))?;
            if covered.contains(&id.as_str()) {
                return Err(Error::DuplicateRegister(id.clone()));
            }
            covered.push(id);
            registers.push(reg);
        }
        let joint_state = JointState::from_terms(registers, joint.terms.iter().map(|(l, a)| (l, *a)))?;
        state = check_norm("joint preparation", joint_state, &mut warnings)?;
    }

    for model in models {
        let Some(reg) = model.register() else {
            if spec.single.iter().any(|(id, _)| *id == model.id) {
                return Err(Error::Preparation(format!(
                    "classical absorber `{}` has no state",
                    model.id
                )));
            }
            continue;
        };
        let entries: Vec<_> = spec.single.iter().filter(|(id, _)| *id == model.id).collect();
        if covered.contains(&model.id.as_str()) {
            if !entries.is_empty() {
                return Err(Error::Preparation(format!(
                    "atom `{}` prepared both jointly and individually",
                    model.id
                )));
            }
            continue;
        }
        let [(_, amps)] = entries.as_slice() else {
            return Err(Error::Preparation(format!(
                "atom `{}` needs exactly one initial state, found {}",
                model.id,
                entries.len()
            )));
        };
        let single = JointState::from_terms(vec![reg], amps.iter().map(|(l, a)| ([l], *a)))?;
        let single = check_norm(&format!("atom `{}`", model.id), single, &mut warnings)?;
        state = state.tensor(&single)?;
        covered.push(&model.id);
    }

    for (id, _) in &spec.single {
        find(id)?;
    }

    for model in models {
        if let Ok(pos) = state.position(&model.id) {
            let g: f64 = state
                .terms()
                .filter(|(labels, _)| labels[pos] == GROUND)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            if g > 0.0 {
                warnings.push(format!(
                    "atom `{}` starts with |g> population {g:.3e}; that part is transparent",
                    model.id
                ));
            }
        }
    }

    Ok(PreparedAtoms { state, warnings })
}
