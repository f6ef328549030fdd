//! Labeled-basis pure states and density matrices.
//!
//! A [`JointState`] is a sparse map from label tuples (one label per declared
//! register) to complex amplitudes. The reachable states of the
//! interferometer have only a handful of nonzero amplitudes, so linear maps
//! are applied term by term rather than through a flattened state vector.
//!
//! Register order matters: label tuples, density-matrix rows and the output
//! of [`DensityMatrix::partial_trace`] all follow the order in which the
//! registers were declared.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes with magnitude below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Tolerance on |norm - 1| for a state to count as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A named subsystem together with its ordered basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Register {
    name: String,
    basis: Vec<String>,
}

impl Register {
    pub fn new<S: Into<String>, L: AsRef<str>>(name: S, basis: &[L]) -> Self {
        Register {
            name: name.into(),
            basis: basis.iter().map(|l| l.as_ref().to_owned()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|l| l == label)
    }

    /// Validated label on this register.
    pub fn label(&self, label: &str) -> Result<BasisLabel> {
        match self.index_of(label) {
            Some(_) => Ok(BasisLabel {
                register: self.name.clone(),
                label: label.to_owned(),
            }),
            None => Err(self.unknown(label)),
        }
    }

    fn unknown(&self, label: &str) -> Error {
        Error::UnknownLabel {
            register: self.name.clone(),
            label: label.to_owned(),
        }
    }

    fn same_basis_set(&self, basis: &[String]) -> bool {
        self.basis.len() == basis.len() && basis.iter().all(|l| self.index_of(l).is_some())
    }
}

/// A basis symbol that is known to belong to its register.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    register: String,
    label: String,
}

impl BasisLabel {
    pub fn register(&self) -> &str {
        &self.register
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.register, self.label)
    }
}

/// Pure state of a composite system over labeled registers.
#[derive(Clone, Debug)]
pub struct JointState {
    registers: Vec<Register>,
    amplitudes: BTreeMap<Vec<usize>, Complex64>,
    prune_threshold: f64,
}

impl JointState {
    /// The zero vector over the given registers.
    pub fn zero(registers: Vec<Register>) -> Result<Self> {
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::DuplicateRegister(r.name.clone()));
            }
        }
        Ok(JointState {
            registers,
            amplitudes: BTreeMap::new(),
            prune_threshold: PRUNE_THRESHOLD,
        })
    }

    /// State with no registers and amplitude 1; the unit of [`JointState::tensor`].
    pub fn scalar() -> Self {
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(Vec::new(), Complex64::new(1.0, 0.0));
        JointState {
            registers: Vec::new(),
            amplitudes,
            prune_threshold: PRUNE_THRESHOLD,
        }
    }

    /// Builds a state from `(labels, amplitude)` terms. Repeated tuples add up.
    pub fn from_terms<I, T, S>(registers: Vec<Register>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, Complex64)>,
        T: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut state = JointState::zero(registers)?;
        for (labels, amp) in terms {
            let key = state.key_of(labels.as_ref())?;
            *state.amplitudes.entry(key).or_insert(ZERO) += amp;
        }
        state.prune();
        Ok(state)
    }

    /// Single register in one basis state with amplitude 1.
    pub fn basis_state(register: Register, label: &str) -> Result<Self> {
        JointState::from_terms(vec![register], [([label], Complex64::new(1.0, 0.0))])
    }

    /// Sets the magnitude below which amplitudes are dropped. `0.0` keeps every
    /// amplitude that is not exactly zero.
    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self.prune();
        self
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::MissingRegister(name.to_owned()))
    }

    /// Number of stored (nonzero) amplitudes.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude<S: AsRef<str>>(&self, labels: &[S]) -> Result<Complex64> {
        let key = self.key_of(labels)?;
        Ok(self.amplitudes.get(&key).copied().unwrap_or(ZERO))
    }

    /// Nonzero terms in deterministic order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<&str>, Complex64)> + '_ {
        self.amplitudes
            .iter()
            .map(move |(key, amp)| (self.labels_of(key), *amp))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Rescales to unit norm. Global phase is left as it is.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 1e-12 {
            return Err(Error::ZeroNorm(n));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for amp in out.amplitudes.values_mut() {
            *amp *= factor;
        }
        out.prune();
        out
    }

    /// Sum of two states over the same registers (matched by name and label).
    pub fn add(&self, other: &JointState) -> Result<Self> {
        let mut out = self.clone();
        for (labels, amp) in other.terms() {
            let key = out.key_by_name(&other.registers, &labels)?;
            *out.amplitudes.entry(key).or_insert(ZERO) += amp;
        }
        out.prune();
        Ok(out)
    }

    /// ⟨self|other⟩, with registers matched by name and labels by symbol.
    pub fn inner(&self, other: &JointState) -> Result<Complex64> {
        let mut acc = ZERO;
        for (labels, amp) in other.terms() {
            let key = self.key_by_name(&other.registers, &labels)?;
            if let Some(a) = self.amplitudes.get(&key) {
                acc += a.conj() * amp;
            }
        }
        Ok(acc)
    }

    /// Phase-insensitive overlap |⟨a|b⟩| / (|a| |b|).
    pub fn overlap(&self, other: &JointState) -> Result<f64> {
        let denom = self.norm() * other.norm();
        if denom <= 1e-300 {
            return Err(Error::ZeroNorm(denom));
        }
        Ok(self.inner(other)?.norm() / denom)
    }

    /// Keeps only the terms whose label on `register` satisfies `keep`.
    pub fn select<F>(&self, register: &str, mut keep: F) -> Result<Self>
    where
        F: FnMut(&str) -> bool,
    {
        let pos = self.position(register)?;
        let basis = &self.registers[pos].basis;
        let mut out = self.clone();
        out.amplitudes.retain(|key, _| keep(&basis[key[pos]]));
        Ok(out)
    }

    /// Tensor product; registers of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &JointState) -> Result<Self> {
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        let mut out = JointState::zero(registers)?;
        out.prune_threshold = self.prune_threshold.min(other.prune_threshold);
        for (ka, a) in &self.amplitudes {
            for (kb, b) in &other.amplitudes {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                out.amplitudes.insert(key, a * b);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Applies `map` to the listed registers (in the order the map expects)
    /// and leaves every other register untouched. The targeted registers take
    /// the map's codomain bases afterwards.
    pub fn apply_map(&self, targets: &[&str], map: &LinearMap) -> Result<Self> {
        if targets.len() != map.domain.len() {
            return Err(Error::Dimension(format!(
                "map acts on {} registers but {} were named",
                map.domain.len(),
                targets.len()
            )));
        }
        let positions = targets.iter().map(|t| self.position(t)).collect::<Result<Vec<_>>>()?;
        for (i, p) in positions.iter().enumerate() {
            if positions[..i].contains(p) {
                return Err(Error::DuplicateRegister(targets[i].to_owned()));
            }
        }

        // state basis index -> map domain index, per targeted register
        let mut translate = Vec::with_capacity(targets.len());
        for (&pos, domain) in positions.iter().zip(&map.domain) {
            let reg = &self.registers[pos];
            if !reg.same_basis_set(domain) {
                return Err(Error::LabelMismatch {
                    register: reg.name.clone(),
                    reason: format!("register basis {:?}, map domain {:?}", reg.basis, domain),
                });
            }
            translate.push(
                reg.basis
                    .iter()
                    .map(|l| domain.iter().position(|d| d == l).unwrap())
                    .collect::<Vec<_>>(),
            );
        }

        let mut registers = self.registers.clone();
        for (&pos, codomain) in positions.iter().zip(&map.codomain) {
            registers[pos].basis = codomain.clone();
        }
        let mut out = JointState::zero(registers)?;
        out.prune_threshold = self.prune_threshold;

        let in_dims: Vec<usize> = map.domain.iter().map(Vec::len).collect();
        let out_dims: Vec<usize> = map.codomain.iter().map(Vec::len).collect();
        let mut digits = vec![0; targets.len()];
        for (key, amp) in &self.amplitudes {
            for (j, &pos) in positions.iter().enumerate() {
                digits[j] = translate[j][key[pos]];
            }
            let col = flatten(&digits, &in_dims);
            for row in 0..map.matrix.nrows() {
                let m = map.matrix[(row, col)];
                if m == ZERO {
                    continue;
                }
                let mut new_key = key.clone();
                for (&pos, d) in positions.iter().zip(unflatten(row, &out_dims)) {
                    new_key[pos] = d;
                }
                *out.amplitudes.entry(new_key).or_insert(ZERO) += m * amp;
            }
        }
        out.prune();
        Ok(out)
    }

    /// |ψ⟩⟨ψ| as a dense matrix over the full product basis.
    pub fn to_density(&self) -> DensityMatrix {
        let dims: Vec<usize> = self.registers.iter().map(Register::dim).collect();
        let dim = dims.iter().product();
        let mut psi = vec![ZERO; dim];
        for (key, amp) in &self.amplitudes {
            psi[flatten(key, &dims)] = *amp;
        }
        let matrix = DMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
        DensityMatrix {
            registers: self.registers.clone(),
            matrix,
        }
    }

    fn prune(&mut self) {
        let thr = self.prune_threshold;
        self.amplitudes.retain(|_, a| a.norm() >= thr && *a != ZERO);
    }

    fn key_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        if labels.len() != self.registers.len() {
            return Err(Error::TupleArity {
                expected: self.registers.len(),
                got: labels.len(),
            });
        }
        self.registers
            .iter()
            .zip(labels)
            .map(|(r, l)| r.index_of(l.as_ref()).ok_or_else(|| r.unknown(l.as_ref())))
            .collect()
    }

    /// Key in `self` for labels expressed in the register order `order`.
    fn key_by_name(&self, order: &[Register], labels: &[&str]) -> Result<Vec<usize>> {
        if order.len() != self.registers.len() {
            return Err(Error::TupleArity {
                expected: self.registers.len(),
                got: order.len(),
            });
        }
        let mut key = vec![0; self.registers.len()];
        for (reg, label) in order.iter().zip(labels) {
            let pos = self.position(&reg.name)?;
            let own = &self.registers[pos];
            key[pos] = own.index_of(label).ok_or_else(|| own.unknown(label))?;
        }
        Ok(key)
    }

    fn labels_of(&self, key: &[usize]) -> Vec<&str> {
        self.registers
            .iter()
            .zip(key)
            .map(|(r, &i)| r.basis[i].as_str())
            .collect()
    }
}

impl fmt::Display for JointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (labels, amp) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:+.6}{:+.6}i)|{}⟩", amp.re, amp.im, labels.join(","))?;
        }
        Ok(())
    }
}

/// Linear map between the product bases of one or more registers.
///
/// Columns are indexed by the row-major product of the domain bases, rows by
/// the row-major product of the codomain bases. Rectangular maps enlarge or
/// shrink a register's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    domain: Vec<Vec<String>>,
    codomain: Vec<Vec<String>>,
    matrix: DMatrix<Complex64>,
}

impl LinearMap {
    pub fn new(domain: Vec<Vec<String>>, codomain: Vec<Vec<String>>, matrix: DMatrix<Complex64>) -> Result<Self> {
        if domain.len() != codomain.len() || domain.is_empty() {
            return Err(Error::Dimension(format!(
                "domain names {} registers, codomain {}",
                domain.len(),
                codomain.len()
            )));
        }
        let cols: usize = domain.iter().map(Vec::len).product();
        let rows: usize = codomain.iter().map(Vec::len).product();
        if matrix.shape() != (rows, cols) {
            return Err(Error::Dimension(format!(
                "matrix is {:?}, bases require {:?}",
                matrix.shape(),
                (rows, cols)
            )));
        }
        Ok(LinearMap {
            domain,
            codomain,
            matrix,
        })
    }

    /// Single-register map given as a matrix.
    pub fn on_register<L: AsRef<str>>(domain: &[L], codomain: &[L], matrix: DMatrix<Complex64>) -> Result<Self> {
        let own = |ls: &[L]| ls.iter().map(|l| l.as_ref().to_owned()).collect::<Vec<_>>();
        LinearMap::new(vec![own(domain)], vec![own(codomain)], matrix)
    }

    /// Builds the map column by column: `image` receives one domain label
    /// tuple and returns the image as `(codomain labels, amplitude)` terms.
    pub fn from_fn<F>(domain: Vec<Vec<String>>, codomain: Vec<Vec<String>>, mut image: F) -> Result<Self>
    where
        F: FnMut(&[&str]) -> Vec<(Vec<String>, Complex64)>,
    {
        let in_dims: Vec<usize> = domain.iter().map(Vec::len).collect();
        let out_dims: Vec<usize> = codomain.iter().map(Vec::len).collect();
        let cols: usize = in_dims.iter().product();
        let rows: usize = out_dims.iter().product();
        let mut matrix = DMatrix::from_element(rows, cols, ZERO);
        for col in 0..cols {
            let digits = unflatten(col, &in_dims);
            let labels: Vec<&str> = domain.iter().zip(&digits).map(|(b, &d)| b[d].as_str()).collect();
            for (out, amp) in image(&labels) {
                if out.len() != codomain.len() {
                    return Err(Error::TupleArity {
                        expected: codomain.len(),
                        got: out.len(),
                    });
                }
                let mut out_digits = Vec::with_capacity(out.len());
                for (i, (b, l)) in codomain.iter().zip(&out).enumerate() {
                    let d = b.iter().position(|x| x == l).ok_or_else(|| Error::UnknownLabel {
                        register: format!("codomain[{i}]"),
                        label: l.clone(),
                    })?;
                    out_digits.push(d);
                }
                matrix[(flatten(&out_digits, &out_dims), col)] += amp;
            }
        }
        LinearMap::new(domain, codomain, matrix)
    }

    pub fn identity<L: AsRef<str>>(basis: &[L]) -> Self {
        let b: Vec<String> = basis.iter().map(|l| l.as_ref().to_owned()).collect();
        let n = b.len();
        LinearMap {
            domain: vec![b.clone()],
            codomain: vec![b],
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn domain(&self) -> &[Vec<String>] {
        &self.domain
    }

    pub fn codomain(&self) -> &[Vec<String>] {
        &self.codomain
    }

    /// Largest entry of |M†M - 1|.
    pub fn isometry_defect(&self) -> f64 {
        let g = self.matrix.adjoint() * &self.matrix;
        let n = g.nrows();
        (g - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Hermitian, positive matrix over the row-major product basis of its registers.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    registers: Vec<Register>,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(registers: Vec<Register>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim: usize = registers.iter().map(Register::dim).product();
        if matrix.shape() != (dim, dim) {
            return Err(Error::Dimension(format!(
                "matrix is {:?}, registers span dimension {dim}",
                matrix.shape()
            )));
        }
        for (i, r) in registers.iter().enumerate() {
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(Error::DuplicateRegister(r.name.clone()));
            }
        }
        Ok(DensityMatrix { registers, matrix })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Label tuple of every row, in row order.
    pub fn basis_labels(&self) -> Vec<Vec<String>> {
        let dims: Vec<usize> = self.registers.iter().map(Register::dim).collect();
        (0..self.dim())
            .map(|i| {
                unflatten(i, &dims)
                    .into_iter()
                    .zip(&self.registers)
                    .map(|(d, r)| r.basis[d].clone())
                    .collect()
            })
            .collect()
    }

    /// Row index of a label tuple.
    pub fn index_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        if labels.len() != self.registers.len() {
            return Err(Error::TupleArity {
                expected: self.registers.len(),
                got: labels.len(),
            });
        }
        let dims: Vec<usize> = self.registers.iter().map(Register::dim).collect();
        let digits = self
            .registers
            .iter()
            .zip(labels)
            .map(|(r, l)| r.index_of(l.as_ref()).ok_or_else(|| r.unknown(l.as_ref())))
            .collect::<Result<Vec<_>>>()?;
        Ok(flatten(&digits, &dims))
    }

    pub fn entry<S: AsRef<str>>(&self, row: &[S], col: &[S]) -> Result<Complex64> {
        Ok(self.matrix[(self.index_of(row)?, self.index_of(col)?)])
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Rescales to unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace().re;
        if t <= 1e-300 {
            return Err(Error::ZeroNorm(t));
        }
        Ok(DensityMatrix {
            registers: self.registers.clone(),
            matrix: self.matrix.map(|z| z / t),
        })
    }

    /// Largest entrywise |ρ - ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Checks Hermiticity (1e-12), unit trace (1e-12) and eigenvalues ≥ -1e-10.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > 1e-12 {
            return Err(Error::Dimension(format!("not Hermitian (defect {h:e})")));
        }
        let t = self.trace();
        if (t.re - 1.0).abs() > 1e-12 || t.im.abs() > 1e-12 {
            return Err(Error::Unnormalized(t.re));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < -1e-10 {
                return Err(Error::Dimension(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    /// Traces out every register not named in `keep`. Kept registers stay in
    /// their original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        for k in keep {
            if !self.registers.iter().any(|r| r.name == *k) {
                return Err(Error::MissingRegister((*k).to_owned()));
            }
        }
        let dims: Vec<usize> = self.registers.iter().map(Register::dim).collect();
        let kept: Vec<usize> = (0..self.registers.len())
            .filter(|&i| keep.contains(&self.registers[i].name.as_str()))
            .collect();
        let traced: Vec<usize> = (0..self.registers.len()).filter(|i| !kept.contains(i)).collect();
        let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
        let kd: usize = kept_dims.iter().product();
        let td: usize = traced_dims.iter().product();

        let mut reduced = DMatrix::from_element(kd, kd, ZERO);
        let mut digits = vec![0; dims.len()];
        let mut full_index = |k: usize, t: usize| {
            for (&pos, d) in kept.iter().zip(unflatten(k, &kept_dims)) {
                digits[pos] = d;
            }
            for (&pos, d) in traced.iter().zip(unflatten(t, &traced_dims)) {
                digits[pos] = d;
            }
            flatten(&digits, &dims)
        };
        for a in 0..kd {
            for b in 0..kd {
                let mut acc = ZERO;
                for t in 0..td {
                    acc += self.matrix[(full_index(a, t), full_index(b, t))];
                }
                reduced[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix {
            registers: kept.iter().map(|&i| self.registers[i].clone()).collect(),
            matrix: reduced,
        })
    }

    /// ⟨ψ|ρ|ψ⟩ for a state over the same registers (matched by name).
    pub fn expectation(&self, psi: &JointState) -> Result<f64> {
        if psi.registers().len() != self.registers.len() {
            return Err(Error::Dimension(format!(
                "state has {} registers, density matrix {}",
                psi.registers().len(),
                self.registers.len()
            )));
        }
        let mut v = vec![ZERO; self.dim()];
        for (labels, amp) in psi.terms() {
            let ordered = self
                .registers
                .iter()
                .map(|r| {
                    let pos = psi.position(&r.name)?;
                    Ok(labels[pos])
                })
                .collect::<Result<Vec<_>>>()?;
            v[self.index_of(&ordered)?] = amp;
        }
        let mut acc = ZERO;
        for i in 0..v.len() {
            for j in 0..v.len() {
                acc += v[i].conj() * self.matrix[(i, j)] * v[j];
            }
        }
        Ok(acc.re)
    }
}

pub(crate) fn flatten(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

pub(crate) fn unflatten(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (slot, n) in digits.iter_mut().zip(dims).rev() {
        *slot = index % n;
        index /= n;
    }
    digits
}
