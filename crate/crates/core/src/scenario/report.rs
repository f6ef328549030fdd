use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::measurement::{Budget, Outcome, OutcomeTag};
use crate::metrics::MetricReport;
use crate::state::DensityMatrix;

use super::{Scenario, ScenarioError};

/// Dense matrix as `(re, im)` pairs, row-major, with one basis label per row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixRecord {
    pub registers: Vec<String>,
    /// Row labels, each a comma-joined tuple over `registers`.
    pub basis: Vec<String>,
    pub entries: Vec<Vec<(f64, f64)>>,
}

impl From<&DensityMatrix> for MatrixRecord {
    fn from(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        MatrixRecord {
            registers: rho.registers().iter().map(|r| r.name().to_owned()).collect(),
            basis: rho.basis_labels().iter().map(|l| l.join(",")).collect(),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub tag: OutcomeTag,
    pub polarization: Option<String>,
    pub probability: f64,
    pub posterior: Option<MatrixRecord>,
    pub metrics: Option<MetricReport>,
    pub target_fidelities: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: Option<String>,
    pub scenario: Scenario,
    pub convention: String,
    pub warnings: Vec<String>,
    pub atom_registers: Vec<String>,
    pub initial_metrics: Option<MetricReport>,
    pub budget: Budget,
    pub rows: Vec<ReportRow>,
    #[serde(skip)]
    pub outcomes: Vec<Outcome>,
}

impl Report {
    pub fn outcome(&self, tag: OutcomeTag, polarization: Option<&str>) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.key() == (tag, polarization))
    }

    pub fn row(&self, tag: OutcomeTag, polarization: Option<&str>) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.tag == tag && r.polarization.as_deref() == polarization)
    }

    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Machine,
}

/// Renders a report as a fixed-width table or as JSON.
pub fn render_report(r: &Report, format: Format) -> String {
    match format {
        Format::Machine => {
            let mut s = serde_json::to_string_pretty(r).expect("report is plain data");
            s.push('\n');
            s
        }
        Format::Table => table(r),
    }
}

/// The scenario echo as TOML; parses back to an equal [`Scenario`].
pub fn render_scenario(sc: &Scenario) -> Result<String, ScenarioError> {
    toml::to_string(sc).map_err(|e| ScenarioError::Invalid {
        path: String::new(),
        message: e.to_string(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.12}"))
}

fn table(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario    {}", r.name.as_deref().unwrap_or("(unnamed)"));
    let _ = writeln!(out, "convention  {}", r.convention);
    for w in &r.warnings {
        let _ = writeln!(out, "warning     {w}");
    }
    if !r.atom_registers.is_empty() {
        let _ = writeln!(out, "atoms       {}", r.atom_registers.join(", "));
    }
    if let Some(m) = &r.initial_metrics {
        let _ = writeln!(
            out,
            "initial     purity {}  l1 {}  concurrence {}",
            opt(Some(m.purity)),
            opt(m.l1_coherence),
            opt(m.concurrence)
        );
    }
    let _ = writeln!(
        out,
        "budget      absorbed {:.12}  Du {:.12}  Dl {:.12}",
        r.budget.absorbed, r.budget.du, r.budget.dl
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<9} {:<4} {:>15} {:>15} {:>15} {:>15} {:>15}",
        "outcome", "pol", "probability", "purity", "l1_coherence", "fid_initial", "concurrence"
    );
    for row in &r.rows {
        let m = row.metrics.as_ref();
        let _ = writeln!(
            out,
            "{:<9} {:<4} {:>15.12} {:>15} {:>15} {:>15} {:>15}",
            row.tag.name(),
            row.polarization.as_deref().unwrap_or("-"),
            row.probability,
            opt(m.map(|m| m.purity)),
            opt(m.and_then(|m| m.l1_coherence)),
            opt(m.and_then(|m| m.fidelity_vs_initial)),
            opt(m.and_then(|m| m.concurrence)),
        );
    }
    for row in &r.rows {
        let Some(p) = &row.posterior else { continue };
        let _ = writeln!(out);
        let _ = write!(out, "posterior {}", row.tag.name());
        if let Some(pol) = &row.polarization {
            let _ = write!(out, " {pol}");
        }
        let _ = writeln!(out, "  [{}]", p.registers.join(" ⊗ "));
        for (name, f) in &row.target_fidelities {
            let _ = writeln!(out, "  fidelity vs {name}: {f:.12}");
        }
        let width = p.basis.iter().map(String::len).max().unwrap_or(1).max(5);
        let _ = write!(out, "  {:width$}", "");
        for b in &p.basis {
            let _ = write!(out, " {b:>23}");
        }
        let _ = writeln!(out);
        for (label, entries) in p.basis.iter().zip(&p.entries) {
            let _ = write!(out, "  {label:width$}");
            for (re, im) in entries {
                let _ = write!(out, " ({re:>+9.6}, {im:>+9.6})");
            }
            let _ = writeln!(out);
        }
    }
    out
}
