//! Ideal detectors at the two output ports, with optional polarization
//! analysis, and the atomic states left behind by each click.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{photon_basis, to_basis, PolarizationBasis, PHOTON, SCATTERED};
use crate::state::{DensityMatrix, JointState, NORM_TOLERANCE};

/// Outcomes below this probability carry no posterior.
pub const POSTERIOR_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisBasis {
    #[default]
    None,
    Circular,
    Linear,
}

impl AnalysisBasis {
    fn polarization_basis(self) -> Option<PolarizationBasis> {
        match self {
            AnalysisBasis::None => None,
            AnalysisBasis::Circular => Some(PolarizationBasis::Circular),
            AnalysisBasis::Linear => Some(PolarizationBasis::Linear),
        }
    }
}

/// Analysis basis shared by both detectors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default)]
    pub analysis: AnalysisBasis,
}

impl DetectorConfig {
    pub fn new(analysis: AnalysisBasis) -> Self {
        DetectorConfig { analysis }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OutcomeTag {
    Du,
    Dl,
    #[serde(rename = "absorbed")]
    Absorbed,
}

impl OutcomeTag {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeTag::Du => "Du",
            OutcomeTag::Dl => "Dl",
            OutcomeTag::Absorbed => "absorbed",
        }
    }

    fn port_prefix(self) -> Option<&'static str> {
        match self {
            OutcomeTag::Du => Some("u"),
            OutcomeTag::Dl => Some("l"),
            OutcomeTag::Absorbed => None,
        }
    }

    /// Whether a photon label belongs to this outcome (any polarization).
    fn matches(self, label: &str) -> bool {
        match self.port_prefix() {
            Some(p) => label.starts_with(p),
            None => SCATTERED.contains(&label),
        }
    }
}

impl fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub tag: OutcomeTag,
    /// `+`/`-` or `x`/`y` when the detectors analyse polarization.
    pub polarization: Option<String>,
    pub probability: f64,
    /// Normalized reduced state of the atoms; absent when the outcome has
    /// (numerically) zero probability or there are no atom registers.
    pub posterior: Option<DensityMatrix>,
}

impl Outcome {
    pub fn key(&self) -> (OutcomeTag, Option<&str>) {
        (self.tag, self.polarization.as_deref())
    }
}

/// Probabilities of the three coarse outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub absorbed: f64,
    pub du: f64,
    pub dl: f64,
}

impl Budget {
    pub fn total(&self) -> f64 {
        self.absorbed + self.du + self.dl
    }
}

fn require_normalized(s: &JointState) -> Result<()> {
    let n = s.norm();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized(n));
    }
    Ok(())
}

fn atom_registers(s: &JointState) -> Vec<&str> {
    s.registers()
        .iter()
        .map(|r| r.name())
        .filter(|n| *n != PHOTON)
        .collect()
}

/// Unnormalized component of `s` that triggers `tag` (with `polarization`,
/// if given). The photon register is rewritten in the basis the polarization
/// label belongs to.
pub fn project(s: &JointState, tag: OutcomeTag, polarization: Option<&str>) -> Result<JointState> {
    let s = match polarization {
        Some("+") | Some("-") => to_basis(s, PolarizationBasis::Circular)?,
        Some("x") | Some("y") => to_basis(s, PolarizationBasis::Linear)?,
        Some(other) => {
            return Err(Error::UnknownLabel {
                register: PHOTON.to_owned(),
                label: other.to_owned(),
            })
        }
        None => {
            photon_basis(s)?;
            s.clone()
        }
    };
    s.select(PHOTON, |label| {
        tag.matches(label) && polarization.is_none_or(|p| tag != OutcomeTag::Absorbed && label.ends_with(p))
    })
}

/// Conditions `s` on an outcome and renormalizes.
pub fn post_select(s: &JointState, tag: OutcomeTag, polarization: Option<&str>) -> Result<JointState> {
    project(s, tag, polarization)?.normalize()
}

fn posterior(projected: &JointState, probability: f64) -> Result<Option<DensityMatrix>> {
    let atoms = atom_registers(projected);
    if probability < POSTERIOR_CUTOFF || atoms.is_empty() {
        return Ok(None);
    }
    let reduced = projected.to_density().partial_trace(&atoms)?;
    Ok(Some(reduced.normalized()?))
}

/// Outcome distribution of an ideal measurement at both ports.
///
/// Order: Du outcomes, Dl outcomes (each split by polarization when the
/// detectors analyse it), then `absorbed`. Without analysis the port
/// posterior is the mixture over both polarizations.
pub fn measure(s: &JointState, cfg: &DetectorConfig) -> Result<Vec<Outcome>> {
    require_normalized(s)?;
    let s = match cfg.analysis.polarization_basis() {
        Some(basis) => to_basis(s, basis)?,
        None => {
            photon_basis(s)?;
            s.clone()
        }
    };
    let mut outcomes = Vec::new();
    for tag in [OutcomeTag::Du, OutcomeTag::Dl] {
        match cfg.analysis.polarization_basis() {
            None => outcomes.push(outcome(&s, tag, None)?),
            Some(basis) => {
                for pol in basis.polarizations() {
                    outcomes.push(outcome(&s, tag, Some(pol))?);
                }
            }
        }
    }
    outcomes.push(outcome(&s, OutcomeTag::Absorbed, None)?);
    Ok(outcomes)
}

fn outcome(s: &JointState, tag: OutcomeTag, polarization: Option<&str>) -> Result<Outcome> {
    let projected = project(s, tag, polarization)?;
    let probability = projected.norm_sqr();
    Ok(Outcome {
        tag,
        polarization: polarization.map(str::to_owned),
        probability,
        posterior: posterior(&projected, probability)?,
    })
}

/// Split of the total probability into absorbed / Du / Dl.
pub fn outcome_budget(s: &JointState) -> Result<Budget> {
    require_normalized(s)?;
    let p = |tag| project(s, tag, None).map(|c| c.norm_sqr());
    Ok(Budget {
        absorbed: p(OutcomeTag::Absorbed)?,
        du: p(OutcomeTag::Du)?,
        dl: p(OutcomeTag::Dl)?,
    })
}

/// ⟨target|ρ|target⟩ for the outcome's posterior.
pub fn posterior_fidelity(outcome: &Outcome, target: &JointState) -> Result<f64> {
    let rho = outcome.posterior.as_ref().ok_or(Error::NoPosterior)?;
    crate::metrics::fidelity(rho, target)
}

/// Probability-weighted mixture of the posteriors of several outcomes, e.g.
/// all polarizations seen by one detector.
pub fn mixed_posterior<'a, I>(outcomes: I) -> Result<Option<(f64, DensityMatrix)>>
where
    I: IntoIterator<Item = &'a Outcome>,
{
    let mut total = 0.0;
    let mut acc: Option<DensityMatrix> = None;
    for o in outcomes {
        total += o.probability;
        let Some(rho) = &o.posterior else { continue };
        let weighted = rho.matrix().map(|z| z * o.probability);
        acc = Some(match acc {
            None => DensityMatrix::new(rho.registers().to_vec(), weighted)?,
            Some(prev) => {
                if prev.registers() != rho.registers() {
                    return Err(Error::Dimension("posteriors over different registers".into()));
                }
                DensityMatrix::new(prev.registers().to_vec(), prev.matrix() + weighted)?
            }
        });
    }
    match acc {
        Some(rho) if total >= POSTERIOR_CUTOFF => Ok(Some((total, rho.normalized()?))),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matter::{interact, prepare_atoms, Arm, AtomInitialState, AtomModel, M_MINUS, M_PLUS};
    use crate::optics::{beam_splitter, photon_input, PolarizationSpec, Port};
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn output(pol: PolarizationSpec) -> JointState {
        let atom = AtomModel::half_absorber("atom", Arm::Lower).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let atoms = prepare_atoms(
            &AtomInitialState::uniform(&["atom"], &[(M_PLUS, h), (M_MINUS, h)]),
            std::slice::from_ref(&atom),
        )
        .unwrap()
        .state;
        let s = photon_input(Port::Lower, pol).tensor(&atoms).unwrap();
        let s = beam_splitter(&s).unwrap();
        let s = interact(&s, &atom).unwrap();
        beam_splitter(&s).unwrap()
    }

    fn find<'a>(outs: &'a [Outcome], tag: OutcomeTag, pol: Option<&str>) -> &'a Outcome {
        outs.iter().find(|o| o.key() == (tag, pol)).unwrap()
    }

    #[test]
    fn circular_analysis_of_sigma_plus() {
        let outs = measure(
            &output(PolarizationSpec::SigmaPlus),
            &DetectorConfig::new(AnalysisBasis::Circular),
        )
        .unwrap();
        assert_eq!(outs.len(), 5);
        let dl = find(&outs, OutcomeTag::Dl, Some("+"));
        assert!((dl.probability - 0.125).abs() < 1e-15);
        let rho = dl.posterior.as_ref().unwrap();
        assert!((rho.entry(&["m+"], &["m+"]).unwrap().re - 1.0).abs() < 1e-12);
        assert!(find(&outs, OutcomeTag::Dl, Some("-")).posterior.is_none());
        let total: f64 = outs.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_analysis_of_x_input() {
        let outs = measure(
            &output(PolarizationSpec::X),
            &DetectorConfig::new(AnalysisBasis::Linear),
        )
        .unwrap();
        for pol in ["x", "y"] {
            let o = find(&outs, OutcomeTag::Dl, Some(pol));
            assert!((o.probability - 1.0 / 16.0).abs() < 1e-15);
            let rho = o.posterior.as_ref().unwrap();
            let off = rho.entry(&["m+"], &["m-"]).unwrap();
            let sign = if pol == "x" { 1.0 } else { -1.0 };
            assert!((off.re - sign * 0.5).abs() < 1e-12 && off.im.abs() < 1e-12);
        }
    }

    #[test]
    fn unanalysed_port_gives_mixture() {
        let outs = measure(&output(PolarizationSpec::X), &DetectorConfig::default()).unwrap();
        assert_eq!(outs.len(), 3);
        let dl = find(&outs, OutcomeTag::Dl, None);
        assert!((dl.probability - 0.125).abs() < 1e-15);
        let rho = dl.posterior.as_ref().unwrap();
        assert!((rho.entry(&["m+"], &["m+"]).unwrap().re - 0.5).abs() < 1e-12);
        assert!(rho.entry(&["m+"], &["m-"]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn absorbed_posterior_is_ground_state() {
        let outs = measure(&output(PolarizationSpec::X), &DetectorConfig::default()).unwrap();
        let a = find(&outs, OutcomeTag::Absorbed, None);
        assert!((a.probability - 0.25).abs() < 1e-15);
        let rho = a.posterior.as_ref().unwrap();
        assert!((rho.entry(&["g"], &["g"]).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_of_sigma_plus_and_x() {
        for pol in [PolarizationSpec::SigmaPlus, PolarizationSpec::X] {
            let b = outcome_budget(&output(pol)).unwrap();
            assert!((b.absorbed - 0.25).abs() < 1e-15);
            assert!((b.du - 0.625).abs() < 1e-15);
            assert!((b.dl - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let s = output(PolarizationSpec::X).scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            measure(&s, &DetectorConfig::default()),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn post_selection_is_idempotent() {
        let s = output(PolarizationSpec::X);
        let once = post_select(&s, OutcomeTag::Dl, Some("x")).unwrap();
        let twice = post_select(&once, OutcomeTag::Dl, Some("x")).unwrap();
        assert!((once.overlap(&twice).unwrap() - 1.0).abs() < 1e-12);
        assert!((once.inner(&twice).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn port_mixture_matches_unanalysed_posterior() {
        let s = output(PolarizationSpec::X);
        let lin = measure(&s, &DetectorConfig::new(AnalysisBasis::Linear)).unwrap();
        let none = measure(&s, &DetectorConfig::default()).unwrap();
        let (p, mixed) = mixed_posterior(lin.iter().filter(|o| o.tag == OutcomeTag::Du))
            .unwrap()
            .unwrap();
        let du = find(&none, OutcomeTag::Du, None);
        assert!((p - du.probability).abs() < 1e-12);
        let diff = mixed.matrix() - du.posterior.as_ref().unwrap().matrix();
        assert!(diff.iter().all(|z| z.norm() < 1e-12));
    }
}
