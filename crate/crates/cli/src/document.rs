//! Serialized reports. JSON keys are sorted and reals use the shortest
//! decimal that round-trips.

use infodiagram::monoid::all_joints;
use infodiagram::{AtomMeasure, ChainRuleViolation, DiagramReport, Joint, Residual};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub instance: String,
    /// What the values measure, e.g. "Shannon entropy".
    pub label: String,
    pub base: Option<String>,
    pub alpha: Option<f64>,
    pub tolerance: f64,
    pub q_max: usize,
    pub seed: u64,
    pub generators: Vec<String>,
    pub inputs: Vec<String>,
    pub compressor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub subset: Vec<usize>,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalEntry {
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub q: usize,
    pub terms: Vec<Vec<usize>>,
    pub given: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl From<&Residual> for ResidualEntry {
    fn from(r: &Residual) -> Self {
        ResidualEntry {
            q: r.q,
            terms: r.terms.iter().map(|t| t.indices()).collect(),
            given: r.given.indices(),
            lhs: r.lhs,
            rhs: r.rhs,
            gap: r.gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEntry {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl From<&ChainRuleViolation> for ViolationEntry {
    fn from(v: &ChainRuleViolation) -> Self {
        ViolationEntry {
            first: v.first.indices(),
            second: v.second.indices(),
            lhs: v.lhs,
            rhs: v.rhs,
            gap: v.gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub q_max: usize,
    pub tolerance: f64,
    /// "exhaustive" or "sampled".
    pub sweep: String,
    pub tuples: usize,
    pub max_residual: f64,
    pub chain_rule_violations: usize,
    /// Largest `|f1(K) - Σ_{I ∩ K ≠ ∅} eta(I)|` over the emitted totals.
    pub totals_gap: f64,
    pub passed: bool,
    pub worst: Option<ResidualEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDocument {
    pub metadata: Metadata,
    pub atoms: Vec<AtomEntry>,
    pub totals: Vec<TotalEntry>,
    pub verification: VerificationSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyDocument {
    pub metadata: Metadata,
    pub verification: VerificationSummary,
    pub chain_rule: Vec<ViolationEntry>,
    pub residuals: Vec<ResidualEntry>,
}

pub fn atom_entries(measure: &AtomMeasure) -> Vec<AtomEntry> {
    measure
        .iter()
        .map(|(atom, eta)| AtomEntry {
            subset: atom.subset().indices(),
            eta,
        })
        .collect()
}

/// `F_1(X_K)` for every nonempty `K`, ascending by mask.
pub fn total_entries(n: usize, total: impl Fn(Joint) -> f64) -> Vec<TotalEntry> {
    all_joints(n)
        .skip(1)
        .map(|k| TotalEntry {
            k: k.indices(),
            f1: total(k),
        })
        .collect()
}

fn mask(indices: &[usize]) -> u64 {
    indices.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

/// Largest gap in `F_1(X_K) = Σ_{I ∩ K ≠ ∅} η_I` across the document.
pub fn totals_gap(atoms: &[AtomEntry], totals: &[TotalEntry]) -> f64 {
    totals
        .iter()
        .map(|t| {
            let k = mask(&t.k);
            let sum: f64 = atoms.iter().filter(|a| mask(&a.subset) & k != 0).map(|a| a.eta).sum();
            (t.f1 - sum).abs()
        })
        .fold(0.0, f64::max)
}

pub fn summary(
    report: &DiagramReport,
    q_max: usize,
    tol: f64,
    sweep: &str,
    violations: usize,
    totals_gap: f64,
) -> VerificationSummary {
    VerificationSummary {
        q_max,
        tolerance: tol,
        sweep: sweep.to_owned(),
        tuples: report.residuals.len(),
        max_residual: report.max_residual,
        chain_rule_violations: violations,
        totals_gap,
        passed: violations == 0 && report.passes(tol) && totals_gap <= tol,
        worst: report.worst().map(ResidualEntry::from),
    }
}

/// Pretty JSON with sorted keys.
pub fn to_json<T: Serialize>(doc: &T) -> CliResult<String> {
    let value = serde_json::to_value(doc).map_err(|e| CliError::Output(e.to_string()))?;
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn parse_diagram(text: &str) -> CliResult<DiagramDocument> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("not a diagram document: {e}")))
}

fn indices_field(indices: &[usize]) -> String {
    indices.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Atom table: space-separated subset indices and eta.
pub fn atoms_csv(atoms: &[AtomEntry]) -> CliResult<String> {
    csv_text(
        &["subset", "eta"],
        atoms.iter().map(|a| vec![indices_field(&a.subset), a.eta.to_string()]),
    )
}

/// Residual table: terms separated by `|`, indices by spaces.
pub fn residuals_csv(residuals: &[ResidualEntry]) -> CliResult<String> {
    csv_text(
        &["q", "terms", "given", "lhs", "rhs", "gap"],
        residuals.iter().map(|r| {
            vec![
                r.q.to_string(),
                r.terms.iter().map(|t| indices_field(t)).collect::<Vec<_>>().join("|"),
                indices_field(&r.given),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.gap.to_string(),
            ]
        }),
    )
}
