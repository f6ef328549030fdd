//! On-disk scenario schema (TOML).
//!
//! ```toml
//! name = "sigma_plus"
//!
//! [photon]
//! port = "lower"              # upper | lower
//! polarization = "sigma+"     # sigma+ | sigma- | x | y | { plus = .., minus = .. }
//!
//! [[atoms]]
//! id = "atom"
//! model = "half_absorber"     # classical_opaque | two_level | half_absorber | spectator
//! arm = "lower"               # upper | lower | outside (spectators only)
//! initial = { "m+" = 0.7071067811865476, "m-" = 0.7071067811865476 }
//!
//! [detector]
//! analysis = "circular"       # none | circular | linear
//! ```
//!
//! Amplitudes are either a real number or a `[re, im]` pair. Entangled
//! preparations go in `[joint_initial]`; extra fidelity columns in
//! `[[targets]]`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matter::{Arm, Circular};
use crate::measurement::DetectorConfig;
use crate::optics::Port;

/// A complex amplitude written as `0.5` or `[0.5, -0.25]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Amplitude(pub Complex64);

impl Amplitude {
    pub fn real(re: f64) -> Self {
        Amplitude(Complex64::new(re, 0.0))
    }
}

impl From<Complex64> for Amplitude {
    fn from(z: Complex64) -> Self {
        Amplitude(z)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AmplitudeRepr {
    Real(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for Amplitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match AmplitudeRepr::deserialize(d)? {
            AmplitudeRepr::Real(re) => Amplitude::real(re),
            AmplitudeRepr::Pair([re, im]) => Amplitude(Complex64::new(re, im)),
        })
    }
}

impl Serialize for Amplitude {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedPolarization {
    #[serde(rename = "sigma+")]
    SigmaPlus,
    #[serde(rename = "sigma-")]
    SigmaMinus,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarizationConfig {
    Named(NamedPolarization),
    /// Amplitudes on σ+ and σ-.
    Jones {
        plus: Amplitude,
        minus: Amplitude,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhotonConfig {
    pub port: Port,
    pub polarization: PolarizationConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ClassicalOpaque,
    TwoLevel,
    HalfAbsorber,
    Spectator,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub id: String,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<Arm>,
    /// Resonant polarization of a two-level atom.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonant: Option<Circular>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<BTreeMap<String, Amplitude>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub labels: Vec<String>,
    pub amplitude: Amplitude,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    pub atoms: Vec<String>,
    pub terms: Vec<Term>,
}

/// A pure atomic state reported as an extra fidelity column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub name: String,
    /// Register order of `terms`; defaults to the posterior register order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<String>>,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub photon: PhotonConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_initial: Option<JointConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub targets: Vec<TargetConfig>,
}
