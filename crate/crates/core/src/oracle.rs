//! Dense reference evolution.
//!
//! Rebuilds a scenario as explicit matrices over the flattened basis
//! `photon ⊗ atom_1 ⊗ … ⊗ atom_n` and measures with plain index arithmetic.
//! Nothing here goes through the labeled states, linear maps, or optics and
//! matter functions of the main pipeline; only the scenario validation and
//! the output containers are shared.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::matter::{Arm, AtomModel, AtomVariant, Circular};
use crate::measurement::{AnalysisBasis, Outcome, OutcomeTag, POSTERIOR_CUTOFF};
use crate::optics::PolarizationSpec;
use crate::scenario::{validate, Experiment, Scenario, ScenarioError};
use crate::state::{DensityMatrix, Register};

const PHOTON_DIM: usize = 6;
// photon index = 2·path + pol for path ∈ {u, l}, pol ∈ {+, -}; 4, 5 = S+, S-
const UPPER: usize = 0;
const LOWER: usize = 1;
const SCATTER: usize = 4;

const LEVELS: [&str; 3] = ["m+", "m-", "g"];
const G: usize = 2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rows: x, y. Columns: σ+, σ-. A linear mode is Σ_μ L[row][μ] |σ_μ⟩.
fn linear_in_circular() -> [[Complex64; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(-h, 0.0), c(h, 0.0)], [c(0.0, h), c(0.0, h)]]
}

struct AtomSlot {
    name: String,
    dim: usize,
}

/// Explicit matrices for one scenario.
pub struct DenseEvolution {
    atoms: Vec<AtomSlot>,
    atom_dim: usize,
    pub input: DVector<Complex64>,
    pub first_splitter: DMatrix<Complex64>,
    pub interaction: DMatrix<Complex64>,
    pub second_splitter: DMatrix<Complex64>,
    pub composed: DMatrix<Complex64>,
    analysis: AnalysisBasis,
}

impl DenseEvolution {
    pub fn build(exp: &Experiment) -> Result<Self, ScenarioError> {
        // joint atoms first, then the rest in declaration order
        let mut names: Vec<String> = exp.initial.joint.as_ref().map(|j| j.atoms.clone()).unwrap_or_default();
        for m in &exp.models {
            if m.variant() != AtomVariant::ClassicalOpaque && !names.contains(&m.id().to_owned()) {
                names.push(m.id().to_owned());
            }
        }
        let atoms: Vec<AtomSlot> = names
            .iter()
            .map(|n| {
                let m = exp.models.iter().find(|m| m.id() == n).expect("validated");
                AtomSlot {
                    name: n.clone(),
                    dim: if m.variant() == AtomVariant::Spectator { 2 } else { 3 },
                }
            })
            .collect();
        let atom_dim: usize = atoms.iter().map(|a| a.dim).product();
        let dim = PHOTON_DIM * atom_dim;

        let input = {
            let photon = photon_vector(exp);
            let atomic = atomic_vector(exp, &atoms);
            DVector::from_fn(dim, |i, _| photon[i / atom_dim] * atomic[i % atom_dim])
        };

        let splitter = splitter_matrix(atom_dim);
        let mut interaction = DMatrix::identity(dim, dim);
        for m in &exp.models {
            if m.arm() != Arm::Outside {
                interaction = absorber_matrix(m, &atoms, atom_dim) * interaction;
            }
        }
        let composed = &splitter * &interaction * &splitter;
        Ok(DenseEvolution {
            atoms,
            atom_dim,
            input,
            first_splitter: splitter.clone(),
            interaction,
            second_splitter: splitter,
            composed,
            analysis: exp.detector.analysis,
        })
    }

    pub fn dim(&self) -> usize {
        self.input.len()
    }

    /// Flattened basis in index order.
    pub fn basis_index(&self) -> Vec<Vec<String>> {
        const PHOTON: [&str; 6] = ["u+", "u-", "l+", "l-", "S+", "S-"];
        (0..self.dim())
            .map(|i| {
                let mut labels = vec![PHOTON[i / self.atom_dim].to_owned()];
                labels.extend(
                    self.atom_levels(i % self.atom_dim)
                        .iter()
                        .map(|&l| LEVELS[l].to_owned()),
                );
                labels
            })
            .collect()
    }

    pub fn output(&self) -> DVector<Complex64> {
        &self.composed * &self.input
    }

    /// max |(U†U - 1)_ij| over the columns with no scattered photon and no
    /// atom in |g>.
    pub fn input_subspace_defect(&self) -> f64 {
        let cols: Vec<usize> = (0..self.dim())
            .filter(|i| i / self.atom_dim < SCATTER && !self.atom_levels(i % self.atom_dim).contains(&G))
            .collect();
        let sub = self.composed.select_columns(&cols);
        let gram = sub.adjoint() * &sub;
        let n = cols.len();
        (gram - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn atom_levels(&self, mut a: usize) -> Vec<usize> {
        let mut out = vec![0; self.atoms.len()];
        for (slot, atom) in out.iter_mut().zip(&self.atoms).rev() {
            *slot = a % atom.dim;
            a /= atom.dim;
        }
        out
    }

    fn registers(&self) -> Vec<Register> {
        self.atoms
            .iter()
            .map(|a| Register::new(a.name.clone(), &LEVELS[..a.dim]))
            .collect()
    }

    /// Outcomes in the same order and shape as the main pipeline.
    pub fn outcomes(&self) -> Result<Vec<Outcome>, ScenarioError> {
        let psi = self.output();
        let a_dim = self.atom_dim;
        // amplitude block for one photon index
        let block = |p: usize| -> Vec<Complex64> { (0..a_dim).map(|a| psi[p * a_dim + a]).collect() };

        let mut out = Vec::new();
        for (tag, path) in [(OutcomeTag::Du, UPPER), (OutcomeTag::Dl, LOWER)] {
            let plus = block(2 * path);
            let minus = block(2 * path + 1);
            match self.analysis {
                AnalysisBasis::None => out.push(self.outcome(tag, None, &[plus, minus])?),
                AnalysisBasis::Circular => {
                    out.push(self.outcome(tag, Some("+"), &[plus])?);
                    out.push(self.outcome(tag, Some("-"), &[minus])?);
                }
                AnalysisBasis::Linear => {
                    let l = linear_in_circular();
                    for (row, name) in [(0, "x"), (1, "y")] {
                        let v: Vec<Complex64> = (0..a_dim)
                            .map(|a| l[row][0].conj() * plus[a] + l[row][1].conj() * minus[a])
                            .collect();
                        out.push(self.outcome(tag, Some(name), &[v])?);
                    }
                }
            }
        }
        out.push(self.outcome(OutcomeTag::Absorbed, None, &[block(SCATTER), block(SCATTER + 1)])?);
        Ok(out)
    }

    fn outcome(&self, tag: OutcomeTag, pol: Option<&str>, blocks: &[Vec<Complex64>]) -> Result<Outcome, ScenarioError> {
        let probability: f64 = blocks.iter().flatten().map(|z| z.norm_sqr()).sum();
        let posterior = if probability >= POSTERIOR_CUTOFF && !self.atoms.is_empty() {
            let n = self.atom_dim;
            let mut rho = DMatrix::from_element(n, n, c(0.0, 0.0));
            for b in blocks {
                rho += DMatrix::from_fn(n, n, |i, j| b[i] * b[j].conj());
            }
            Some(DensityMatrix::new(self.registers(), rho / c(probability, 0.0))?)
        } else {
            None
        };
        Ok(Outcome {
            tag,
            polarization: pol.map(str::to_owned),
            probability,
            posterior,
        })
    }
}

fn photon_vector(exp: &Experiment) -> Vec<Complex64> {
    let l = linear_in_circular();
    let (plus, minus) = match exp.polarization {
        PolarizationSpec::SigmaPlus => (c(1.0, 0.0), c(0.0, 0.0)),
        PolarizationSpec::SigmaMinus => (c(0.0, 0.0), c(1.0, 0.0)),
        PolarizationSpec::X => (l[0][0], l[0][1]),
        PolarizationSpec::Y => (l[1][0], l[1][1]),
        PolarizationSpec::Jones { plus, minus } => (plus, minus),
    };
    let path = match exp.port {
        crate::optics::Port::Upper => UPPER,
        crate::optics::Port::Lower => LOWER,
    };
    let mut v = vec![c(0.0, 0.0); PHOTON_DIM];
    v[2 * path] = plus;
    v[2 * path + 1] = minus;
    v
}

fn level_index(label: &str) -> usize {
    LEVELS.iter().position(|l| *l == label).expect("validated level")
}

fn normalized(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= n;
    }
    v
}

fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn atomic_vector(exp: &Experiment, atoms: &[AtomSlot]) -> Vec<Complex64> {
    let mut v = vec![c(1.0, 0.0)];
    let mut done = 0;
    if let Some(j) = &exp.initial.joint {
        let dims: Vec<usize> = atoms[..j.atoms.len()].iter().map(|a| a.dim).collect();
        let mut w = vec![c(0.0, 0.0); dims.iter().product()];
        for (labels, amp) in &j.terms {
            let idx = labels.iter().zip(&dims).fold(0, |acc, (l, d)| acc * d + level_index(l));
            w[idx] += amp;
        }
        v = kron(&v, &normalized(w));
        done = j.atoms.len();
    }
    for atom in &atoms[done..] {
        let (_, amps) = exp
            .initial
            .single
            .iter()
            .find(|(id, _)| *id == atom.name)
            .expect("validated");
        let mut w = vec![c(0.0, 0.0); atom.dim];
        for (l, a) in amps {
            w[level_index(l)] += a;
        }
        v = kron(&v, &normalized(w));
    }
    v
}

fn splitter_matrix(atom_dim: usize) -> DMatrix<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut bs = DMatrix::from_element(PHOTON_DIM, PHOTON_DIM, c(0.0, 0.0));
    for pol in 0..2 {
        let (u, l) = (2 * UPPER + pol, 2 * LOWER + pol);
        bs[(u, u)] = c(0.0, h);
        bs[(l, u)] = c(h, 0.0);
        bs[(u, l)] = c(h, 0.0);
        bs[(l, l)] = c(0.0, h);
    }
    bs[(SCATTER, SCATTER)] = c(1.0, 0.0);
    bs[(SCATTER + 1, SCATTER + 1)] = c(1.0, 0.0);
    let dim = PHOTON_DIM * atom_dim;
    DMatrix::from_fn(dim, dim, |i, j| {
        if i % atom_dim == j % atom_dim {
            bs[(i / atom_dim, j / atom_dim)]
        } else {
            c(0.0, 0.0)
        }
    })
}

fn absorber_matrix(model: &AtomModel, atoms: &[AtomSlot], atom_dim: usize) -> DMatrix<Complex64> {
    let dim = PHOTON_DIM * atom_dim;
    let path = if model.arm() == Arm::Upper { UPPER } else { LOWER };
    let slot = atoms.iter().position(|a| a.name == model.id());
    // stride of this atom's digit inside the atomic index
    let stride: usize = slot.map_or(1, |s| atoms[s + 1..].iter().map(|a| a.dim).product());
    let mut m = DMatrix::from_element(dim, dim, c(0.0, 0.0));
    for col in 0..dim {
        let (p, a) = (col / atom_dim, col % atom_dim);
        let mut target = col;
        if p / 2 == path && p < SCATTER {
            let pol = p % 2;
            let scattered = SCATTER + pol;
            match model.variant() {
                AtomVariant::ClassicalOpaque => target = scattered * atom_dim + a,
                AtomVariant::HalfAbsorber | AtomVariant::TwoLevel { .. } => {
                    let level = (a / stride) % 3;
                    let resonant = match model.variant() {
                        AtomVariant::TwoLevel {
                            resonant: Circular::Plus,
                        } => pol == 0 && level == 0,
                        AtomVariant::TwoLevel {
                            resonant: Circular::Minus,
                        } => pol == 1 && level == 1,
                        _ => level == pol,
                    };
                    if resonant {
                        let a2 = a - level * stride + G * stride;
                        target = scattered * atom_dim + a2;
                    }
                }
                AtomVariant::Spectator => {}
            }
        }
        m[(target, col)] = c(1.0, 0.0);
    }
    m
}

/// Runs a scenario through the dense reference path.
pub fn oracle_run(sc: &Scenario) -> Result<Vec<Outcome>, ScenarioError> {
    DenseEvolution::build(&validate(sc)?)?.outcomes()
}

/// Structural mismatch between two outcome lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch(pub String);

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Largest absolute deviation between two outcome lists over all
/// probabilities and posterior entries.
pub fn max_deviation(a: &[Outcome], b: &[Outcome]) -> Result<f64, Mismatch> {
    if a.len() != b.len() {
        return Err(Mismatch(format!("{} outcomes vs {}", a.len(), b.len())));
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        if x.key() != y.key() {
            return Err(Mismatch(format!("outcome {:?} vs {:?}", x.key(), y.key())));
        }
        worst = worst.max((x.probability - y.probability).abs());
        match (&x.posterior, &y.posterior) {
            (None, None) => {}
            (Some(p), Some(q)) => {
                if p.basis_labels() != q.basis_labels() || p.registers() != q.registers() {
                    return Err(Mismatch(format!("posterior bases differ for {:?}", x.key())));
                }
                let d = (p.matrix() - q.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
            _ => {
                // one side fell just under the cutoff
                if x.probability.max(y.probability) > 10.0 * POSTERIOR_CUTOFF {
                    return Err(Mismatch(format!(
                        "posterior present on one side only for {:?}",
                        x.key()
                    )));
                }
            }
        }
    }
    Ok(worst)
}
