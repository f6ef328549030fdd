//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use common::{c, H};
use ifm_core::matter::{interact, Arm, AtomModel, ATOM_BASIS, SPECTATOR_BASIS};
use ifm_core::measurement::{mixed_posterior, AnalysisBasis, DetectorConfig, Outcome, OutcomeTag};
use ifm_core::metrics::{concurrence, fidelity, l1_coherence, purity};
use ifm_core::optics::{beam_splitter, photon_register, PolarizationBasis};
use ifm_core::oracle::{max_deviation, oracle_run};
use ifm_core::scenario::{
    canned, canned_names, evolve, run, validate, Amplitude, NamedPolarization, PolarizationConfig, Report, RunOptions,
    Scenario,
};
use ifm_core::state::{DensityMatrix, JointState, Register};

const TOL: f64 = 1e-12;
/// Criterion 7 margin below unity.
const STRICT_MARGIN: f64 = 1e-6;

type Check = Result<String, String>;
type Criterion = (&'static str, fn(&mut Duration) -> Check);

fn near(what: &str, got: f64, want: f64) -> Result<f64, String> {
    let d = (got - want).abs();
    if d <= TOL {
        Ok(d)
    } else {
        Err(format!(
            "{what} = {got:.15}, expected {want:.15} (|diff| {d:.3e} > {TOL:e})"
        ))
    }
}

fn timed_run(sc: &Scenario, slowest: &mut Duration) -> Result<Report, String> {
    let start = Instant::now();
    let r = run(sc).map_err(|e| e.to_string())?;
    *slowest = (*slowest).max(start.elapsed());
    Ok(r)
}

fn outcome<'a>(r: &'a Report, tag: OutcomeTag, pol: Option<&str>) -> Result<&'a Outcome, String> {
    r.outcome(tag, pol).ok_or_else(|| format!("no outcome {tag} {pol:?}"))
}

fn posterior(o: &Outcome) -> Result<&DensityMatrix, String> {
    o.posterior
        .as_ref()
        .ok_or_else(|| format!("no posterior for {}", o.tag))
}

fn atom_state(terms: &[(&str, Complex64)]) -> JointState {
    JointState::from_terms(
        vec![Register::new("atom", &ATOM_BASIS)],
        terms.iter().map(|(l, a)| ([*l], *a)),
    )
    .unwrap()
}

fn with_photon(mut sc: Scenario, pol: NamedPolarization, analysis: AnalysisBasis) -> Scenario {
    sc.photon.polarization = PolarizationConfig::Named(pol);
    sc.detector = DetectorConfig::new(analysis);
    sc
}

const ALL_POLS: [NamedPolarization; 4] = [
    NamedPolarization::SigmaPlus,
    NamedPolarization::SigmaMinus,
    NamedPolarization::X,
    NamedPolarization::Y,
];

fn criterion_1(slowest: &mut Duration) -> Check {
    let mut worst: f64 = 0.0;
    for pol in ALL_POLS {
        for analysis in [AnalysisBasis::None, AnalysisBasis::Circular, AnalysisBasis::Linear] {
            let r = timed_run(&with_photon(canned("no_atom").unwrap(), pol, analysis), slowest)?;
            worst = worst.max(near(&format!("P(Du) for {pol:?}"), r.budget.du, 1.0)?);
            worst = worst.max(near(&format!("P(Dl) for {pol:?}"), r.budget.dl, 0.0)?);
        }
    }
    Ok(format!(
        "P(Du) = 1, P(Dl) = 0 for sigma+, sigma-, x, y (max |diff| {worst:.1e})"
    ))
}

fn criterion_2(slowest: &mut Duration) -> Check {
    let sc = canned("classical_ev").unwrap();
    let r = timed_run(&sc, slowest)?;
    near("absorbed", r.budget.absorbed, 0.5)?;
    near("Du", r.budget.du, 0.25)?;
    near("Dl", r.budget.dl, 0.25)?;
    let d = max_deviation(&r.outcomes, &oracle_run(&sc).map_err(|e| e.to_string())?).map_err(|m| m.0)?;
    near("deviation from dense reference", d, 0.0)?;
    Ok(format!(
        "classical budget {{absorbed, Du, Dl}} = {{{:.12}, {:.12}, {:.12}}}",
        r.budget.absorbed, r.budget.du, r.budget.dl
    ))
}

fn single_level_criterion(pol: NamedPolarization, level: &str, slowest: &mut Duration) -> Check {
    let sc = with_photon(canned("sigma_plus").unwrap(), pol, AnalysisBasis::Circular);
    let r = timed_run(&sc, slowest)?;
    near("P(Dl)", r.budget.dl, 0.125)?;
    let sign = &level[1..];
    let o = outcome(&r, OutcomeTag::Dl, Some(sign))?;
    near(&format!("P(Dl, {sign})"), o.probability, 0.125)?;
    let rho = posterior(o)?;
    let target = atom_state(&[(level, c(1.0, 0.0))]);
    let f = fidelity(rho, &target).map_err(|e| e.to_string())?;
    near("fidelity", f, 1.0)?;
    let l1 = l1_coherence(rho).map_err(|e| e.to_string())?;
    near("l1 coherence", l1, 0.0)?;
    let pure = target.to_density();
    let d = (rho.matrix() - pure.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    near("posterior entries", d, 0.0)?;
    Ok(format!(
        "P(Dl) = {:.12}, posterior = |{level}><{level}|, fidelity {f:.12}, l1 {l1:.1e}",
        r.budget.dl
    ))
}

fn criterion_5(slowest: &mut Duration) -> Check {
    let r = timed_run(&canned("linear_x").unwrap(), slowest)?;
    let plus = atom_state(&[("m+", c(H, 0.0)), ("m-", c(H, 0.0))]);
    let minus = atom_state(&[("m+", c(H, 0.0)), ("m-", c(-H, 0.0))]);
    let x = outcome(&r, OutcomeTag::Dl, Some("x"))?;
    let y = outcome(&r, OutcomeTag::Dl, Some("y"))?;
    near("P(Dl, x)", x.probability, 1.0 / 16.0)?;
    near("P(Dl, y)", y.probability, 1.0 / 16.0)?;
    let fx = fidelity(posterior(x)?, &plus).map_err(|e| e.to_string())?;
    let fy = fidelity(posterior(y)?, &minus).map_err(|e| e.to_string())?;
    near("fidelity (Dl, x) vs (m+ + m-)/sqrt2", fx, 1.0)?;
    near("fidelity (Dl, y) vs (m+ - m-)/sqrt2", fy, 1.0)?;
    Ok(format!(
        "P(Dl,x) = {:.12}, P(Dl,y) = {:.12}, fidelities {fx:.12}, {fy:.12}",
        x.probability, y.probability
    ))
}

fn criterion_6(slowest: &mut Duration) -> Check {
    let sc = with_photon(canned("linear_x").unwrap(), NamedPolarization::X, AnalysisBasis::None);
    let r = timed_run(&sc, slowest)?;
    let o = outcome(&r, OutcomeTag::Dl, None)?;
    near("P(Dl)", o.probability, 0.125)?;
    let rho = posterior(o)?;
    let p = purity(rho);
    let l1 = l1_coherence(rho).map_err(|e| e.to_string())?;
    near("purity", p, 0.5)?;
    near("l1 coherence", l1, 0.0)?;
    near("<m+|rho|m+>", rho.entry(&["m+"], &["m+"]).unwrap().re, 0.5)?;
    near("<m-|rho|m->", rho.entry(&["m-"], &["m-"]).unwrap().re, 0.5)?;
    Ok(format!("P(Dl) = {:.12}, purity {p:.12}, l1 {l1:.1e}", o.probability))
}

fn criterion_7(slowest: &mut Duration) -> Check {
    let initial = atom_state(&[("m+", c(H, 0.0)), ("m-", c(H, 0.0))]);
    let mut notes = Vec::new();
    let mut worst: f64 = 0.0;
    for analysis in [AnalysisBasis::None, AnalysisBasis::Circular, AnalysisBasis::Linear] {
        let sc = with_photon(canned("linear_x").unwrap(), NamedPolarization::X, analysis);
        let r = timed_run(&sc, slowest)?;
        near("absorbed", r.budget.absorbed, 0.25)?;
        near("Du", r.budget.du, 0.625)?;
        near("Dl", r.budget.dl, 0.125)?;
        let du = r.outcomes.iter().filter(|o| o.tag == OutcomeTag::Du);
        let (p, rho) = mixed_posterior(du)
            .map_err(|e| e.to_string())?
            .ok_or("no Du posterior")?;
        near("P(Du)", p, 0.625)?;
        let f = fidelity(&rho, &initial).map_err(|e| e.to_string())?;
        if f >= 1.0 - STRICT_MARGIN {
            return Err(format!(
                "Du fidelity {f:.12} under {analysis:?} analysis is not below 1 - {STRICT_MARGIN:e}"
            ));
        }
        worst = worst.max(f);
        for o in r
            .outcomes
            .iter()
            .filter(|o| o.tag == OutcomeTag::Du && o.polarization.is_some())
        {
            let fo = fidelity(posterior(o)?, &initial).map_err(|e| e.to_string())?;
            notes.push(format!("{}:{:.6}", o.polarization.as_deref().unwrap(), fo));
        }
    }
    Ok(format!(
        "budget {{1/4, 5/8, 1/8}}; Du port fidelity {worst:.12} < 1 - {STRICT_MARGIN:e} in every basis \
         (resolved Du outcomes: {})",
        notes.join(" ")
    ))
}

fn reduced_atom1(rho: &DensityMatrix) -> Result<DensityMatrix, String> {
    rho.partial_trace(&["atom1"]).map_err(|e| e.to_string())
}

fn criterion_8(slowest: &mut Duration) -> Check {
    let lin = timed_run(&canned("bell_linear").unwrap(), slowest)?;
    let circ = timed_run(&canned("bell_circular").unwrap(), slowest)?;

    let c0 = lin
        .initial_metrics
        .as_ref()
        .and_then(|m| m.concurrence)
        .ok_or("no initial concurrence")?;
    near("initial concurrence", c0, 1.0)?;

    // initial reduced state of atom1
    let exp = validate(&lin.scenario).map_err(|e| e.to_string())?;
    let atoms = evolve(&exp, RunOptions::default()).map_err(|e| e.to_string())?.atoms;
    let before = reduced_atom1(&atoms.to_density())?;

    let x = posterior(outcome(&lin, OutcomeTag::Dl, Some("x"))?)?;
    let cx = concurrence(x).map_err(|e| e.to_string())?;
    near("concurrence after (Dl, x)", cx, 1.0)?;
    let after = reduced_atom1(x)?;
    let l1_before = l1_coherence(&before).map_err(|e| e.to_string())?;
    let l1_after = l1_coherence(&after).map_err(|e| e.to_string())?;
    near("atom1 l1 coherence after (Dl, x)", l1_after, l1_before)?;
    let d = (after.matrix() - before.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    near("atom1 reduced state change", d, 0.0)?;

    let plus = posterior(outcome(&circ, OutcomeTag::Dl, Some("+"))?)?;
    let cp = concurrence(plus).map_err(|e| e.to_string())?;
    near("concurrence after (Dl, sigma+)", cp, 0.0)?;
    Ok(format!(
        "concurrence initial {c0:.12}, after (Dl,x) {cx:.12}, after (Dl,sigma+) {cp:.1e}; atom1 l1 {l1_before:.1e} -> {l1_after:.1e}"
    ))
}

fn criterion_9(slowest: &mut Duration) -> Check {
    // isometry of the evolution on 1000 random states
    let mut rng = common::rng(9001);
    let model = AtomModel::half_absorber("atom", Arm::Lower).unwrap();
    let mut iso: f64 = 0.0;
    for _ in 0..1000 {
        let psi = common::random_state(
            &mut rng,
            &[
                (
                    photon_register(PolarizationBasis::Circular),
                    vec!["u+", "u-", "l+", "l-"],
                ),
                (Register::new("atom", &ATOM_BASIS), ATOM_BASIS.to_vec()),
                (Register::new("spec", &SPECTATOR_BASIS), SPECTATOR_BASIS.to_vec()),
            ],
        );
        let out = beam_splitter(&interact(&beam_splitter(&psi).unwrap(), &model).unwrap()).unwrap();
        iso = iso.max(near("norm after evolution", out.norm(), 1.0)?);
    }

    // normalization and agreement with the dense reference
    let mut norm: f64 = 0.0;
    let mut agree: f64 = 0.0;
    let mut scenarios: Vec<Scenario> = canned_names().map(|n| canned(n).unwrap()).collect();
    let canned_count = scenarios.len();
    let mut rng = common::rng(9002);
    scenarios.extend((0..200).map(|i| common::random_scenario(&mut rng, i)));
    for sc in &scenarios {
        let r = timed_run(sc, slowest)?;
        norm = norm.max(near("total probability", r.total_probability(), 1.0)?);
        let reference = oracle_run(sc).map_err(|e| e.to_string())?;
        let d = max_deviation(&r.outcomes, &reference).map_err(|m| m.0)?;
        agree = agree.max(near("deviation from dense reference", d, 0.0)?);
    }

    // P(Dl) = |alpha|^2 / 4 on a grid of 101 populations
    let mut law: f64 = 0.0;
    for k in 0..=100 {
        let p = k as f64 / 100.0;
        let mut sc = with_photon(
            canned("sigma_plus").unwrap(),
            NamedPolarization::SigmaPlus,
            AnalysisBasis::None,
        );
        sc.atoms[0].initial = Some(BTreeMap::from([
            ("m+".to_owned(), Amplitude::real(p.sqrt())),
            ("m-".to_owned(), Amplitude::real((1.0 - p).sqrt())),
        ]));
        sc.targets.clear();
        let r = timed_run(&sc, slowest)?;
        law = law.max(near(&format!("P(Dl) at |alpha|^2 = {p}"), r.budget.dl, p / 4.0)?);
    }
    Ok(format!(
        "isometry 1000 states ({iso:.1e}); normalization and dense agreement on {canned_count} canned + 200 random \
         ({norm:.1e}, {agree:.1e}); |alpha|^2/4 law on 101 points ({law:.1e})"
    ))
}

fn criterion_10(slowest: &mut Duration) -> Check {
    let sc = canned("sigma_plus").unwrap();
    let start = Instant::now();
    let out = evolve(&validate(&sc).map_err(|e| e.to_string())?, RunOptions::default())
        .map_err(|e| e.to_string())?
        .output;
    *slowest = (*slowest).max(start.elapsed());
    let q = 0.5 * H;
    let printed = JointState::from_terms(
        vec![
            photon_register(PolarizationBasis::Circular),
            Register::new("atom", &ATOM_BASIS),
        ],
        [
            (["S+", "g"], c(-0.5, 0.0)),
            (["l+", "m+"], c(0.0, q)),
            (["u+", "m+"], c(-q, 0.0)),
            (["u+", "m-"], c(-H, 0.0)),
        ],
    )
    .unwrap();
    let overlap = printed.inner(&out).unwrap();
    let magnitude = overlap.norm() / (printed.norm() * out.norm());
    near("|<printed|simulated>|", magnitude, 1.0)?;
    Ok(format!(
        "|<printed|simulated>| = {magnitude:.15}, global phase ({:+.6}, {:+.6})",
        overlap.re, overlap.im
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("empty interferometer", criterion_1),
        ("classical baseline", criterion_2),
        ("sigma+ projects onto m+", |t| {
            single_level_criterion(NamedPolarization::SigmaPlus, "m+", t)
        }),
        ("sigma- projects onto m-", |t| {
            single_level_criterion(NamedPolarization::SigmaMinus, "m-", t)
        }),
        ("x input, linear analysis", criterion_5),
        ("x input, no analysis", criterion_6),
        ("x input budget and Du fidelity", criterion_7),
        ("entangled pair", criterion_8),
        ("property suites", criterion_9),
        ("global-phase robustness", criterion_10),
    ];
    let mut failed = 0;
    let mut slowest = Duration::ZERO;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check(&mut slowest) {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "slowest single run: {:.1} ms (tolerance {TOL:e})",
        slowest.as_secs_f64() * 1e3
    );
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
