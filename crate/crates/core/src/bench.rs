//! Cross-strategy comparison runs.

use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::cegar::{abstract_mc, CegarConfig, CegarError, FinalVerdict, Strategy};
use crate::model::KripkeModel;
use crate::parse::{parse_model, parse_property, ParseError};
use crate::predicate::Property;

/// One model to benchmark, with its property and initial hidden variables.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub name: String,
    pub model: KripkeModel,
    pub property: Property,
    pub hidden: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub model: String,
    pub strategy: Strategy,
    pub verdict: &'static str,
    pub iterations: usize,
    pub final_abstract_states: usize,
    pub max_abstract_states: usize,
    pub millis: u128,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: no property given (expected a .prop file next to the model or a fallback property)")]
    MissingProperty { path: PathBuf },
    #[error("{model}: {source}")]
    Cegar { model: String, source: CegarError },
    #[error("{model}: strategies disagree ({details})")]
    Disagreement { model: String, details: String },
}

pub const CSV_HEADER: &str = "model,strategy,verdict,iterations,final_abstract_states,max_abstract_states,millis";

/// Runs every case under every strategy. Returns all rows, or an error if a
/// run fails or two strategies reach different verdicts on one model.
pub fn run_benchmark(cases: &[BenchCase], strategies: &[Strategy]) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::with_capacity(cases.len() * strategies.len());
    for case in cases {
        let model = Arc::new(case.model.clone());
        let start = rows.len();
        for &strategy in strategies {
            let t = Instant::now();
            let report = abstract_mc(model.clone(), &case.property, &CegarConfig::new(case.hidden.iter().cloned(), strategy))
                .map_err(|source| BenchError::Cegar {
                    model: case.name.clone(),
                    source,
                })?;
            rows.push(BenchRow {
                model: case.name.clone(),
                strategy,
                verdict: report.final_verdict.name(),
                iterations: report.total_iterations(),
                final_abstract_states: report.final_abstract_states(),
                max_abstract_states: report.max_abstract_states(),
                millis: t.elapsed().as_millis(),
            });
        }
        let decided: Vec<&BenchRow> = rows[start..]
            .iter()
            .filter(|r| r.verdict != FinalVerdict::CapExceeded.name())
            .collect();
        if decided.windows(2).any(|w| w[0].verdict != w[1].verdict) {
            let details = decided.iter().map(|r| format!("{}={}", r.strategy, r.verdict)).collect::<Vec<_>>().join(", ");
            return Err(BenchError::Disagreement {
                model: case.name.clone(),
                details,
            });
        }
    }
    Ok(rows)
}

/// Renders rows as CSV, header included.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.model, r.strategy, r.verdict, r.iterations, r.final_abstract_states, r.max_abstract_states, r.millis
        );
    }
    out
}

/// Property and hidden variables from a `.prop` sidecar: the first
/// non-comment line is the property, an optional `hide a, b` line lists the
/// hidden variables.
pub fn parse_sidecar(text: &str) -> Result<(Property, Vec<String>), ParseError> {
    let mut property = None;
    let mut hidden = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("hide ") {
            hidden.extend(rest.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_owned));
        } else if property.is_none() {
            property = Some(parse_property(line).map_err(|e| ParseError { line: n + 1, ..e })?);
        } else {
            return Err(ParseError {
                line: n + 1,
                column: 1,
                message: "expected 'hide' after the property".into(),
            });
        }
    }
    let property = property.ok_or(ParseError {
        line: 1,
        column: 1,
        message: "no property given".into(),
    })?;
    Ok((property, hidden))
}

/// Loads every `*.kmod` file directly inside `dir`, in file-name order. A
/// `<stem>.prop` sidecar supplies the property and hidden variables;
/// otherwise `fallback` is used.
pub fn load_cases(dir: &Path, fallback: Option<&(Property, Vec<String>)>) -> Result<Vec<BenchCase>, BenchError> {
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| BenchError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io(dir))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io(dir))?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "kmod"));
    paths.sort();

    let mut cases = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path).map_err(io(&path))?;
        let model = parse_model(&text).map_err(|source| BenchError::Parse {
            path: path.clone(),
            source,
        })?;
        let sidecar = path.with_extension("prop");
        let (property, hidden) = if sidecar.is_file() {
            let text = fs::read_to_string(&sidecar).map_err(io(&sidecar))?;
            parse_sidecar(&text).map_err(|source| BenchError::Parse { path: sidecar, source })?
        } else {
            fallback.cloned().ok_or_else(|| BenchError::MissingProperty { path: path.clone() })?
        };
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        cases.push(BenchCase {
            name,
            model,
            property,
            hidden,
        });
    }
    Ok(cases)
}
