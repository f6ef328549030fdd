//! Scalar diagnostics of atomic states.

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matter::{GROUND, M_MINUS, M_PLUS};
use crate::state::{DensityMatrix, JointState, NORM_TOLERANCE};

/// Largest |g⟩ population tolerated by metrics restricted to `{m+, m-}`.
pub const GROUND_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub purity: f64,
    /// Absent when the state has |g⟩ population.
    pub l1_coherence: Option<f64>,
    pub fidelity_vs_initial: Option<f64>,
    /// Only for two-atom states confined to `{m+, m-}`.
    pub concurrence: Option<f64>,
}

impl MetricReport {
    pub fn of(rho: &DensityMatrix, initial: Option<&JointState>) -> Result<Self> {
        let fidelity_vs_initial = initial.map(|psi| fidelity(rho, psi)).transpose()?;
        let concurrence = if rho.registers().len() == 2 {
            concurrence(rho).ok()
        } else {
            None
        };
        Ok(MetricReport {
            purity: purity(rho),
            l1_coherence: l1_coherence(rho).ok(),
            fidelity_vs_initial,
            concurrence,
        })
    }
}

/// Tr ρ².
pub fn purity(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    // Tr(ρ²) = Σ ρ_ij ρ_ji
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            acc += m[(i, j)] * m[(j, i)];
        }
    }
    acc.re
}

fn ground_population(rho: &DensityMatrix) -> f64 {
    rho.basis_labels()
        .iter()
        .enumerate()
        .filter(|(_, labels)| labels.iter().any(|l| l == GROUND))
        .map(|(i, _)| rho.matrix()[(i, i)].re)
        .sum()
}

/// Σ_{i≠j} |ρ_ij| over a state confined to the metastable levels.
pub fn l1_coherence(rho: &DensityMatrix) -> Result<f64> {
    let g = ground_population(rho);
    if g.abs() >= GROUND_TOLERANCE {
        return Err(Error::GroundPopulation(g));
    }
    let m = rho.matrix();
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                acc += m[(i, j)].norm();
            }
        }
    }
    Ok(acc)
}

/// ⟨ψ|ρ|ψ⟩ against a normalized pure target over the same registers.
pub fn fidelity(rho: &DensityMatrix, target: &JointState) -> Result<f64> {
    let n = target.norm();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized(n));
    }
    let mut a: Vec<&str> = rho.registers().iter().map(|r| r.name()).collect();
    let mut b: Vec<&str> = target.registers().iter().map(|r| r.name()).collect();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::Dimension(format!(
            "target registers {b:?} do not match posterior registers {a:?}"
        )));
    }
    rho.expectation(target)
}

/// The 4×4 block of a two-register state on {m+, m-}⊗{m+, m-}.
fn qubit_block(rho: &DensityMatrix) -> Result<Matrix4<Complex64>> {
    if rho.registers().len() != 2 {
        return Err(Error::Dimension(format!(
            "concurrence needs two atoms, got {} registers",
            rho.registers().len()
        )));
    }
    for r in rho.registers() {
        let extra = r.basis().iter().any(|l| l != M_PLUS && l != M_MINUS && l != GROUND);
        if extra || r.index_of(M_PLUS).is_none() || r.index_of(M_MINUS).is_none() {
            return Err(Error::Dimension(format!(
                "register `{}` is not an atomic qubit: {:?}",
                r.name(),
                r.basis()
            )));
        }
    }
    let g = ground_population(rho);
    if g.abs() >= GROUND_TOLERANCE {
        return Err(Error::GroundPopulation(g));
    }
    let levels = [M_PLUS, M_MINUS];
    let mut idx = [0usize; 4];
    for (k, slot) in idx.iter_mut().enumerate() {
        *slot = rho.index_of(&[levels[k / 2], levels[k % 2]])?;
    }
    Ok(Matrix4::from_fn(|i, j| rho.matrix()[(idx[i], idx[j])]))
}

/// Eigenvalues of a normalized density matrix below this are rounding noise.
const SPECTRUM_FLOOR: f64 = 1e-14;

/// Wootters concurrence of a two-atom state.
///
/// With ρ = W W† (W built from the eigenvectors of ρ scaled by √p), the
/// squared λs are the eigenvalues of the Hermitian matrix W† ρ̃ W, where
/// ρ̃ = (σy⊗σy) ρ* (σy⊗σy). Dropping eigenvalues of ρ below the rounding
/// floor keeps pure states exact instead of off by √ε.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let block = qubit_block(rho)?;
    let trace = block.trace().re;
    let r = DMatrix::from_fn(4, 4, |i, j| block[(i, j)] / trace);
    let r = (&r + r.adjoint()).map(|z| z * 0.5);
    let flip = DMatrix::from_fn(4, 4, |i, j| {
        let v = match (i, j) {
            (0, 3) | (3, 0) => -1.0,
            (1, 2) | (2, 1) => 1.0,
            _ => 0.0,
        };
        Complex64::new(v, 0.0)
    });
    let tilde = &flip * r.conjugate() * &flip;

    let eig = r.symmetric_eigen();
    let kept: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > SPECTRUM_FLOOR).collect();
    let w = DMatrix::from_fn(4, kept.len(), |i, k| {
        eig.eigenvectors[(i, kept[k])] * eig.eigenvalues[kept[k]].sqrt()
    });
    let m = w.adjoint() * tilde * &w;
    let m = (&m + m.adjoint()).map(|z| z * 0.5);
    let mut lambdas: Vec<f64> = m.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.resize(4, 0.0);
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
