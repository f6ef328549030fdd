//! Declarative experiments: parsing, validation, and the end-to-end run
//! (input → beam splitter → atoms → beam splitter → detectors → metrics).

mod canned;
mod config;
mod report;

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::error::Error;
use crate::matter::{
    interact, prepare_atoms, Arm, AtomInitialState, AtomModel, AtomVariant, JointAmplitudes, ATOM_BASIS, GROUND,
    PREPARATION_TOLERANCE, SPECTATOR_BASIS,
};
use crate::measurement::{measure, outcome_budget, Budget, DetectorConfig, Outcome};
use crate::metrics::{fidelity, MetricReport};
use crate::optics::{beam_splitter, photon_input, PolarizationSpec, Port};
use crate::state::{JointState, NORM_TOLERANCE};

pub use canned::{canned, canned_names};
pub use config::{
    Amplitude, AtomConfig, JointConfig, ModelKind, NamedPolarization, PhotonConfig, PolarizationConfig, Scenario,
    TargetConfig, Term,
};
pub use report::{render_report, render_scenario, Format, MatrixRecord, Report, ReportRow};

/// Human-readable statement of the phase conventions used in every run.
pub const CONVENTION: &str = "beam splitter |u,p> -> (i|u,p> + |l,p>)/sqrt2, |l,p> -> (|u,p> + i|l,p>)/sqrt2; \
sigma+- = -+(x +- i y)/sqrt2; scattered photons S+/S- never reach a detector; \
global phase is not canonicalized";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Invalid { path: String, message: String },

    #[error(transparent)]
    Simulation(#[from] Error),
}

fn invalid<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Invalid {
        path: path.into(),
        message: message.into(),
    })
}

/// Parses TOML text into a [`Scenario`]. Validation is separate.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_column(text, span.start),
            None => (0, 0),
        };
        ScenarioError::Syntax {
            line,
            column,
            message: e.message().to_owned(),
        }
    })
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// A pure target state for an extra fidelity column.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub name: String,
    pub atoms: Option<Vec<String>>,
    pub terms: Vec<(Vec<String>, Complex64)>,
}

/// A validated scenario, ready to run.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub port: Port,
    pub polarization: PolarizationSpec,
    pub models: Vec<AtomModel>,
    pub initial: AtomInitialState,
    pub detector: DetectorConfig,
    pub targets: Vec<Target>,
    pub warnings: Vec<String>,
}

impl Experiment {
    /// Names of the atom registers in the order used by every posterior.
    pub fn atom_order(&self) -> Vec<String> {
        let mut order: Vec<String> = self.initial.joint.as_ref().map(|j| j.atoms.clone()).unwrap_or_default();
        for m in &self.models {
            if m.register().is_some() && !order.iter().any(|id| id == m.id()) {
                order.push(m.id().to_owned());
            }
        }
        order
    }
}

fn polarization_spec(cfg: &PolarizationConfig, warnings: &mut Vec<String>) -> Result<PolarizationSpec, ScenarioError> {
    Ok(match cfg {
        PolarizationConfig::Named(NamedPolarization::SigmaPlus) => PolarizationSpec::SigmaPlus,
        PolarizationConfig::Named(NamedPolarization::SigmaMinus) => PolarizationSpec::SigmaMinus,
        PolarizationConfig::Named(NamedPolarization::X) => PolarizationSpec::X,
        PolarizationConfig::Named(NamedPolarization::Y) => PolarizationSpec::Y,
        PolarizationConfig::Jones { plus, minus } => {
            let n = (plus.0.norm_sqr() + minus.0.norm_sqr()).sqrt();
            if (n - 1.0).abs() > PREPARATION_TOLERANCE {
                return invalid("photon.polarization", format!("Jones vector has norm {n}, expected 1"));
            }
            if (n - 1.0).abs() > NORM_TOLERANCE {
                warnings.push(format!("photon polarization had norm {n}; renormalized"));
            }
            PolarizationSpec::Jones {
                plus: plus.0 / n,
                minus: minus.0 / n,
            }
        }
    })
}

fn check_labels(path: &str, labels: &[&str], basis: &[&str]) -> Result<(), ScenarioError> {
    for l in labels {
        if !basis.contains(l) {
            return invalid(path, format!("unknown level `{l}`, expected one of {basis:?}"));
        }
    }
    Ok(())
}

fn check_norm(path: &str, amps: impl Iterator<Item = Complex64>) -> Result<(), ScenarioError> {
    let n = amps.map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > PREPARATION_TOLERANCE {
        return invalid(path, format!("state has norm {n}, expected 1"));
    }
    Ok(())
}

fn basis_of(model: &AtomModel) -> &'static [&'static str] {
    match model.variant() {
        AtomVariant::Spectator => &SPECTATOR_BASIS,
        _ => &ATOM_BASIS,
    }
}

/// Checks every invariant of a scenario and lowers it to an [`Experiment`].
pub fn validate(sc: &Scenario) -> Result<Experiment, ScenarioError> {
    let mut warnings = Vec::new();
    let polarization = polarization_spec(&sc.photon.polarization, &mut warnings)?;

    let mut models = Vec::new();
    for (i, a) in sc.atoms.iter().enumerate() {
        let path = format!("atoms[{i}]");
        if a.id.is_empty() {
            return invalid(format!("{path}.id"), "atom id is empty");
        }
        if a.id == crate::optics::PHOTON {
            return invalid(format!("{path}.id"), "`photon` is reserved");
        }
        if sc.atoms[..i].iter().any(|b| b.id == a.id) {
            return invalid(format!("{path}.id"), format!("duplicate atom id `{}`", a.id));
        }
        let arm = match (a.model, a.arm) {
            (ModelKind::Spectator, None | Some(Arm::Outside)) => Arm::Outside,
            (ModelKind::Spectator, Some(other)) => {
                return invalid(
                    format!("{path}.arm"),
                    format!("a spectator sits outside, not in {other:?}"),
                )
            }
            (_, None) => return invalid(format!("{path}.arm"), "absorbers need arm = \"upper\" or \"lower\""),
            (_, Some(Arm::Outside)) => {
                return invalid(
                    format!("{path}.arm"),
                    "only spectators may sit outside the interferometer",
                )
            }
            (_, Some(arm)) => arm,
        };
        let variant = match (a.model, a.resonant) {
            (ModelKind::TwoLevel, Some(resonant)) => AtomVariant::TwoLevel { resonant },
            (ModelKind::TwoLevel, None) => {
                return invalid(
                    format!("{path}.resonant"),
                    "two_level atoms need resonant = \"sigma+\" or \"sigma-\"",
                )
            }
            (_, Some(_)) => return invalid(format!("{path}.resonant"), "only two_level atoms take a resonance"),
            (ModelKind::ClassicalOpaque, None) => AtomVariant::ClassicalOpaque,
            (ModelKind::HalfAbsorber, None) => AtomVariant::HalfAbsorber,
            (ModelKind::Spectator, None) => AtomVariant::Spectator,
        };
        if variant == AtomVariant::ClassicalOpaque && a.initial.is_some() {
            return invalid(format!("{path}.initial"), "a classical absorber has no internal state");
        }
        let model = AtomModel::new(variant, a.id.clone(), arm).map_err(|e| ScenarioError::Invalid {
            path: path.clone(),
            message: e.to_string(),
        })?;
        if let Some(init) = &a.initial {
            let labels: Vec<&str> = init.keys().map(String::as_str).collect();
            check_labels(&format!("{path}.initial"), &labels, basis_of(&model))?;
            check_norm(&format!("{path}.initial"), init.values().map(|a| a.0))?;
        }
        models.push(model);
    }

    for arm in [Arm::Upper, Arm::Lower] {
        let here: Vec<usize> = (0..models.len()).filter(|&i| models[i].arm() == arm).collect();
        if here.len() > 1 {
            return invalid(
                format!("atoms[{}].arm", here[1]),
                format!("arm {arm:?} already holds absorber `{}`", models[here[0]].id()),
            );
        }
    }

    let mut joint = None;
    if let Some(j) = &sc.joint_initial {
        if j.atoms.is_empty() {
            return invalid("joint_initial.atoms", "joint preparation names no atoms");
        }
        let mut bases = Vec::new();
        for (k, id) in j.atoms.iter().enumerate() {
            let path = format!("joint_initial.atoms[{k}]");
            let Some((i, model)) = models.iter().enumerate().find(|(_, m)| m.id() == id) else {
                return invalid(path, format!("no atom named `{id}`"));
            };
            if j.atoms[..k].contains(id) {
                return invalid(path, format!("atom `{id}` listed twice"));
            }
            if model.register().is_none() {
                return invalid(path, format!("classical absorber `{id}` has no internal state"));
            }
            if sc.atoms[i].initial.is_some() {
                return invalid(
                    format!("atoms[{i}].initial"),
                    format!("atom `{id}` is prepared jointly"),
                );
            }
            bases.push(basis_of(model));
        }
        for (t, term) in j.terms.iter().enumerate() {
            let path = format!("joint_initial.terms[{t}].labels");
            if term.labels.len() != j.atoms.len() {
                return invalid(
                    path,
                    format!("expected {} labels, got {}", j.atoms.len(), term.labels.len()),
                );
            }
            for (l, basis) in term.labels.iter().zip(&bases) {
                check_labels(&path, &[l.as_str()], basis)?;
            }
        }
        check_norm("joint_initial.terms", j.terms.iter().map(|t| t.amplitude.0))?;
        joint = Some(JointAmplitudes {
            atoms: j.atoms.clone(),
            terms: j.terms.iter().map(|t| (t.labels.clone(), t.amplitude.0)).collect(),
        });
    }

    let in_joint = |id: &str| {
        joint
            .as_ref()
            .is_some_and(|j: &JointAmplitudes| j.atoms.iter().any(|a| a == id))
    };
    let mut single = Vec::new();
    for (i, (a, m)) in sc.atoms.iter().zip(&models).enumerate() {
        if m.register().is_none() || in_joint(m.id()) {
            continue;
        }
        let Some(init) = &a.initial else {
            return invalid(
                format!("atoms[{i}].initial"),
                format!("atom `{}` has no initial state", a.id),
            );
        };
        single.push((a.id.clone(), init.iter().map(|(l, amp)| (l.clone(), amp.0)).collect()));
    }
    let initial = AtomInitialState { single, joint };

    // With absorbers in both arms, the two absorption channels would share
    // scattered-photon states unless the atoms record which one fired.
    let absorbers: Vec<&AtomModel> = models.iter().filter(|m| m.arm() != Arm::Outside).collect();
    if absorbers.len() == 2 {
        let classical = absorbers
            .iter()
            .filter(|m| m.variant() == AtomVariant::ClassicalOpaque)
            .count();
        if classical == 2 {
            return invalid("atoms", "two classical absorbers would scatter into the same modes");
        }
        let prepared = prepare_atoms(&initial, &models)?;
        for m in &absorbers {
            if let Ok(pos) = prepared.state.position(m.id()) {
                let g: f64 = prepared
                    .state
                    .terms()
                    .filter(|(l, _)| l[pos] == GROUND)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                if g > 0.0 {
                    return invalid(
                        "atoms",
                        format!("with absorbers in both arms, `{}` may not start in |g>", m.id()),
                    );
                }
            }
        }
    }

    let order = Experiment {
        port: sc.photon.port,
        polarization,
        models: models.clone(),
        initial: initial.clone(),
        detector: sc.detector,
        targets: Vec::new(),
        warnings: Vec::new(),
    }
    .atom_order();

    let mut targets = Vec::new();
    for (t, tc) in sc.targets.iter().enumerate() {
        let path = format!("targets[{t}]");
        if sc.targets[..t].iter().any(|o| o.name == tc.name) {
            return invalid(format!("{path}.name"), format!("duplicate target `{}`", tc.name));
        }
        let atoms = tc.atoms.clone().unwrap_or_else(|| order.clone());
        let mut sorted_a = atoms.clone();
        let mut sorted_b = order.clone();
        sorted_a.sort();
        sorted_b.sort();
        if sorted_a != sorted_b {
            return invalid(
                format!("{path}.atoms"),
                format!("target must cover exactly the atoms {order:?}"),
            );
        }
        for (k, term) in tc.terms.iter().enumerate() {
            let tpath = format!("{path}.terms[{k}].labels");
            if term.labels.len() != atoms.len() {
                return invalid(
                    tpath,
                    format!("expected {} labels, got {}", atoms.len(), term.labels.len()),
                );
            }
            for (l, id) in term.labels.iter().zip(&atoms) {
                let m = models.iter().find(|m| m.id() == id).expect("checked above");
                check_labels(&tpath, &[l.as_str()], basis_of(m))?;
            }
        }
        check_norm(&format!("{path}.terms"), tc.terms.iter().map(|t| t.amplitude.0))?;
        targets.push(Target {
            name: tc.name.clone(),
            atoms: tc.atoms.clone(),
            terms: tc.terms.iter().map(|t| (t.labels.clone(), t.amplitude.0)).collect(),
        });
    }

    Ok(Experiment {
        port: sc.photon.port,
        polarization,
        models,
        initial,
        detector: sc.detector,
        targets,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Drop amplitudes below the pruning threshold after each step.
    pub prune: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { prune: true }
    }
}

/// Intermediate states of one run.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub atoms: JointState,
    pub input: JointState,
    pub after_first_splitter: JointState,
    pub after_atoms: JointState,
    pub output: JointState,
    pub warnings: Vec<String>,
}

/// Propagates the photon through the interferometer.
pub fn evolve(exp: &Experiment, opts: RunOptions) -> Result<Evolution, ScenarioError> {
    let prepared = prepare_atoms(&exp.initial, &exp.models)?;
    let mut warnings = exp.warnings.clone();
    warnings.extend(prepared.warnings);
    let mut photon = photon_input(exp.port, exp.polarization);
    if !opts.prune {
        photon = photon.with_prune_threshold(0.0);
    }
    let input = photon.tensor(&prepared.state)?;
    let after_first_splitter = beam_splitter(&input)?;
    let mut after_atoms = after_first_splitter.clone();
    for model in &exp.models {
        after_atoms = interact(&after_atoms, model)?;
    }
    let output = beam_splitter(&after_atoms)?;
    Ok(Evolution {
        atoms: prepared.state,
        input,
        after_first_splitter,
        after_atoms,
        output,
        warnings,
    })
}

fn target_state(exp: &Experiment, target: &Target, atoms: &JointState) -> Result<JointState, ScenarioError> {
    let order = target.atoms.clone().unwrap_or_else(|| exp.atom_order());
    let registers = order
        .iter()
        .map(|id| {
            atoms
                .register(id)
                .cloned()
                .ok_or_else(|| Error::MissingRegister(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let state = JointState::from_terms(registers, target.terms.iter().map(|(l, a)| (l, *a)))?;
    Ok(state.normalize()?)
}

/// Runs a scenario with default options.
pub fn run(sc: &Scenario) -> Result<Report, ScenarioError> {
    run_with(sc, RunOptions::default())
}

pub fn run_with(sc: &Scenario, opts: RunOptions) -> Result<Report, ScenarioError> {
    let exp = validate(sc)?;
    let evo = evolve(&exp, opts)?;
    let outcomes = measure(&evo.output, &exp.detector)?;
    let budget = outcome_budget(&evo.output)?;

    let has_atoms = !evo.atoms.registers().is_empty();
    let initial = has_atoms.then_some(&evo.atoms);
    let targets: Vec<(String, JointState)> = exp
        .targets
        .iter()
        .map(|t| Ok((t.name.clone(), target_state(&exp, t, &evo.atoms)?)))
        .collect::<Result<_, ScenarioError>>()?;

    let initial_metrics = match initial {
        Some(psi) => Some(MetricReport::of(&psi.to_density(), Some(psi))?),
        None => None,
    };

    let rows = outcomes
        .iter()
        .map(|o| row(o, initial, &targets))
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    Ok(Report {
        name: sc.name.clone(),
        scenario: sc.clone(),
        convention: CONVENTION.to_owned(),
        warnings: evo.warnings,
        atom_registers: exp.atom_order(),
        initial_metrics,
        budget,
        rows,
        outcomes,
    })
}

fn row(
    o: &Outcome,
    initial: Option<&JointState>,
    targets: &[(String, JointState)],
) -> Result<ReportRow, ScenarioError> {
    let (posterior, metrics, target_fidelities) = match &o.posterior {
        Some(rho) => {
            let metrics = MetricReport::of(rho, initial)?;
            let fids = targets
                .iter()
                .map(|(name, psi)| Ok((name.clone(), fidelity(rho, psi)?)))
                .collect::<Result<BTreeMap<_, _>, Error>>()?;
            (Some(MatrixRecord::from(rho)), Some(metrics), fids)
        }
        None => (None, None, BTreeMap::new()),
    };
    Ok(ReportRow {
        tag: o.tag,
        polarization: o.polarization.clone(),
        probability: o.probability,
        posterior,
        metrics,
        target_fidelities,
    })
}

/// Budget of a scenario without the detector split.
pub fn budget(sc: &Scenario) -> Result<Budget, ScenarioError> {
    let exp = validate(sc)?;
    Ok(outcome_budget(&evolve(&exp, RunOptions::default())?.output)?)
}
