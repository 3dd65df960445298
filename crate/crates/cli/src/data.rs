//! Delimited text observation files and state-label files.

use std::fs;
use std::io::Write;
use std::path::Path;

use nphmm::ObservationSequence;

use crate::error::{CliError, CliResult};

fn split_fields(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c == ';' || c.is_whitespace()).filter(|f| !f.is_empty()).collect()
}

fn read_text(path: &Path, flag: &str) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{flag}: cannot read {}: {e}", path.display())))
}

/// Parses an observation file. A single column of non-negative integers is
/// count data; anything else is real-valued with one row per observation.
/// Blank lines and `#` comments are skipped; a non-numeric first row is
/// taken as a header.
pub fn parse_observations(text: &str, flag: &str) -> CliResult<ObservationSequence> {
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            rows.push((idx + 1, split_fields(line)));
        }
    }
    if let Some((_, first)) = rows.first() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{flag}: no observations")));
    }
    let dim = rows[0].1.len();
    let mut values = Vec::with_capacity(rows.len() * dim);
    for (line, fields) in &rows {
        if fields.len() != dim {
            return Err(CliError::input(format!(
                "{flag}: line {line}: expected {dim} columns, found {}",
                fields.len()
            )));
        }
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| CliError::input(format!("{flag}: line {line}: '{f}' is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::input(format!("{flag}: line {line}: non-finite value '{f}'")));
            }
            values.push(v);
        }
    }
    let is_count = dim == 1 && values.iter().all(|v| *v >= 0.0 && v.fract() == 0.0 && *v <= u64::MAX as f64);
    let obs = if is_count {
        ObservationSequence::counts(values.into_iter().map(|v| v as u64).collect())
    } else {
        ObservationSequence::real(dim, values)
    };
    obs.map_err(|e| CliError::input(format!("{flag}: {e}")))
}

pub fn read_observations(path: &Path, flag: &str) -> CliResult<ObservationSequence> {
    parse_observations(&read_text(path, flag)?, flag)
}

/// Parses one 1-based state label per line into 0-based labels.
pub fn parse_labels(text: &str, flag: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<usize>() {
            Ok(v) if v >= 1 => out.push(v - 1),
            _ => {
                return Err(CliError::input(format!(
                    "{flag}: line {}: '{line}' is not a state label (positive integer)",
                    idx + 1
                )))
            }
        }
    }
    Ok(out)
}

pub fn read_labels(path: &Path, flag: &str) -> CliResult<Vec<usize>> {
    parse_labels(&read_text(path, flag)?, flag)
}

pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 2);
    for l in labels {
        out.push_str(&(l + 1).to_string());
        out.push('\n');
    }
    out
}

pub fn format_observations(obs: &ObservationSequence) -> String {
    let mut out = String::new();
    match obs {
        ObservationSequence::Counts(v) => {
            for y in v {
                out.push_str(&y.to_string());
                out.push('\n');
            }
        }
        ObservationSequence::Real { dim, values } => {
            for row in values.chunks(*dim) {
                let fields: Vec<String> = row.iter().map(f64::to_string).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
    }
    out
}

/// Writes through a temporary file in the target directory so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8], flag: &str) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let fail = |e: std::io::Error| CliError::input(format!("{flag}: cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
