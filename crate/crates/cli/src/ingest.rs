//! Reading sample tables, set-function JSON and blob files.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Column name reserved for per-row sample weights.
pub const WEIGHT_COLUMN: &str = "__weight";

/// A sample table: one variable per column, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub weights: Option<Vec<f64>>,
}

fn delimiter(path: &Path, text: &str) -> u8 {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let first = text.lines().next().unwrap_or("");
    if ext == "tsv" || ext == "tab" || (first.contains('\t') && !first.contains(',')) {
        b'\t'
    } else {
        b','
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Reads a CSV or TSV file whose first row names the variables.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = read_text(path)?;
    parse_table(&text, delimiter(path, &text)).map_err(|m| CliError::Input(format!("{}: {m}", path.display())))
}

pub fn parse_table(text: &str, delimiter: u8) -> Result<Table, String> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| format!("header: {e}"))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err("empty header row".into());
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = header.iter().find(|h| !seen.insert(h.as_str())) {
        return Err(format!("duplicate column name {dup:?}"));
    }
    let weight_at = header.iter().position(|h| h == WEIGHT_COLUMN);
    let names: Vec<String> = header.iter().filter(|h| h.as_str() != WEIGHT_COLUMN).cloned().collect();
    if names.is_empty() {
        return Err("no variable columns".into());
    }
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.position() {
            Some(pos) => format!("line {}: {e}", pos.line()),
            None => e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(names.len());
        for (i, field) in record.iter().enumerate() {
            if Some(i) == weight_at {
                let w: f64 = field
                    .parse()
                    .map_err(|_| format!("line {line}: weight {field:?} is not a number"))?;
                if !w.is_finite() || w < 0.0 {
                    return Err(format!("line {line}: weight {w} must be finite and nonnegative"));
                }
                weights.push(w);
            } else {
                row.push(field.to_owned());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(Table {
        names,
        rows,
        weights: weight_at.map(|_| weights),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetFunctionFile {
    n: usize,
    #[serde(default)]
    names: Option<Vec<String>>,
    values: Vec<SetFunctionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetFunctionEntry {
    subset: Vec<usize>,
    value: f64,
}

/// A total function on subsets of `[n]`, values indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFunctionInput {
    pub n: usize,
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// Reads `{"n": .., "names": [..]?, "values": [{"subset": [..], "value": ..}, ..]}`
/// where every subset of `1..=n` appears once as a sorted index list.
pub fn read_set_function(path: &Path) -> CliResult<SetFunctionInput> {
    let text = read_text(path)?;
    parse_set_function(&text).map_err(|m| CliError::Input(format!("{}: {m}", path.display())))
}

pub fn parse_set_function(text: &str) -> Result<SetFunctionInput, String> {
    let file: SetFunctionFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let n = file.n;
    if n == 0 || n > 30 {
        return Err(format!("n = {n} is out of range"));
    }
    let mut values = vec![None; 1 << n];
    for entry in &file.values {
        if entry.subset.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!(
                "subset {:?} is not a strictly increasing index list",
                entry.subset
            ));
        }
        let mut mask = 0usize;
        for &i in &entry.subset {
            if i == 0 || i > n {
                return Err(format!("subset {:?} has index {i} outside 1..={n}", entry.subset));
            }
            mask |= 1 << (i - 1);
        }
        if !entry.value.is_finite() {
            return Err(format!("subset {:?} has a non-finite value", entry.subset));
        }
        if values[mask].replace(entry.value).is_some() {
            return Err(format!("subset {:?} appears twice", entry.subset));
        }
    }
    if let Some(mask) = values.iter().position(Option::is_none) {
        let missing: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        return Err(format!(
            "no value for subset {missing:?}; all {} subsets are required",
            1usize << n
        ));
    }
    let names = match file.names {
        Some(names) if names.len() != n => return Err(format!("{} names given for n = {n}", names.len())),
        Some(names) => names,
        None => default_names(n),
    };
    Ok(SetFunctionInput {
        n,
        names,
        values: values.into_iter().map(Option::unwrap).collect(),
    })
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

pub fn read_blob(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
