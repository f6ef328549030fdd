#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ifm_core::matter::{Arm, Circular, ATOM_BASIS, SPECTATOR_BASIS};
use ifm_core::measurement::{AnalysisBasis, DetectorConfig};
use ifm_core::optics::Port;
use ifm_core::scenario::{
    Amplitude, AtomConfig, JointConfig, ModelKind, NamedPolarization, PhotonConfig, PolarizationConfig, Scenario, Term,
};
use ifm_core::state::{JointState, Register};

pub const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit vector with independent uniform real and imaginary parts.
pub fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random normalized state with support on the given labels of each register.
pub fn random_state(rng: &mut impl Rng, registers: &[(Register, Vec<&str>)]) -> JointState {
    let mut tuples: Vec<Vec<&str>> = vec![vec![]];
    for (_, support) in registers {
        tuples = tuples
            .iter()
            .flat_map(|t| {
                support.iter().map(move |l| {
                    let mut t = t.clone();
                    t.push(*l);
                    t
                })
            })
            .collect();
    }
    let amps = random_unit(rng, tuples.len());
    let regs = registers.iter().map(|(r, _)| r.clone()).collect();
    JointState::from_terms(regs, tuples.iter().zip(amps)).unwrap()
}

fn amplitudes(rng: &mut impl Rng, labels: &[&str]) -> Vec<Amplitude> {
    random_unit(rng, labels.len()).into_iter().map(Amplitude).collect()
}

/// A random valid scenario: up to one absorber per arm, up to two spectators,
/// sometimes a joint preparation over the first two atoms with a state.
pub fn random_scenario(rng: &mut impl Rng, index: usize) -> Scenario {
    let port = if rng.random_bool(0.5) { Port::Upper } else { Port::Lower };
    let polarization = match rng.random_range(0..5) {
        0 => PolarizationConfig::Named(NamedPolarization::SigmaPlus),
        1 => PolarizationConfig::Named(NamedPolarization::SigmaMinus),
        2 => PolarizationConfig::Named(NamedPolarization::X),
        3 => PolarizationConfig::Named(NamedPolarization::Y),
        _ => {
            let v = random_unit(rng, 2);
            PolarizationConfig::Jones {
                plus: Amplitude(v[0]),
                minus: Amplitude(v[1]),
            }
        }
    };
    let analysis = [AnalysisBasis::None, AnalysisBasis::Circular, AnalysisBasis::Linear][rng.random_range(0..3)];

    let mut atoms: Vec<AtomConfig> = Vec::new();
    let mut classical = 0;
    for (arm, id) in [(Arm::Upper, "up"), (Arm::Lower, "low")] {
        if !rng.random_bool(0.7) {
            continue;
        }
        let mut model =
            [ModelKind::ClassicalOpaque, ModelKind::TwoLevel, ModelKind::HalfAbsorber][rng.random_range(0..3)];
        if model == ModelKind::ClassicalOpaque {
            classical += 1;
            if classical == 2 {
                model = ModelKind::HalfAbsorber;
            }
        }
        atoms.push(AtomConfig {
            id: id.into(),
            model,
            arm: Some(arm),
            resonant: (model == ModelKind::TwoLevel).then(|| {
                if rng.random_bool(0.5) {
                    Circular::Plus
                } else {
                    Circular::Minus
                }
            }),
            initial: None,
        });
    }
    for k in 0..rng.random_range(0..=2) {
        atoms.push(AtomConfig {
            id: format!("spec{k}"),
            model: ModelKind::Spectator,
            arm: None,
            resonant: None,
            initial: None,
        });
    }

    let absorbers = atoms.iter().filter(|a| a.arm.is_some()).count();
    let basis_of = |a: &AtomConfig| -> Vec<&'static str> {
        match a.model {
            ModelKind::Spectator => SPECTATOR_BASIS.to_vec(),
            // |g> may only be populated when a single absorber is present
            _ if absorbers == 2 => ATOM_BASIS[..2].to_vec(),
            _ => ATOM_BASIS.to_vec(),
        }
    };

    let stateful: Vec<usize> = (0..atoms.len())
        .filter(|&i| atoms[i].model != ModelKind::ClassicalOpaque)
        .collect();
    let mut joint = None;
    if stateful.len() >= 2 && rng.random_bool(0.4) {
        let (i, j) = (stateful[0], stateful[1]);
        let (bi, bj) = (basis_of(&atoms[i]), basis_of(&atoms[j]));
        let labels: Vec<[&str; 2]> = bi.iter().flat_map(|a| bj.iter().map(move |b| [*a, *b])).collect();
        let amps = random_unit(rng, labels.len());
        joint = Some(JointConfig {
            atoms: vec![atoms[i].id.clone(), atoms[j].id.clone()],
            terms: labels
                .iter()
                .zip(amps)
                .map(|(l, a)| Term {
                    labels: l.iter().map(|s| s.to_string()).collect(),
                    amplitude: Amplitude(a),
                })
                .collect(),
        });
    }
    for &i in &stateful {
        let in_joint = joint
            .as_ref()
            .is_some_and(|j: &JointConfig| j.atoms.contains(&atoms[i].id));
        if !in_joint {
            let basis = basis_of(&atoms[i]);
            let amps = amplitudes(rng, &basis);
            atoms[i].initial = Some(
                basis
                    .iter()
                    .map(|l| l.to_string())
                    .zip(amps)
                    .collect::<BTreeMap<_, _>>(),
            );
        }
    }

    Scenario {
        name: Some(format!("random_{index}")),
        description: None,
        photon: PhotonConfig { port, polarization },
        detector: DetectorConfig::new(analysis),
        atoms,
        joint_initial: joint,
        targets: Vec::new(),
    }
}
