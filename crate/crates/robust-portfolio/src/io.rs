//! Returns-file ingestion and report emission.
//!
//! Input files are comma-separated with a header row and an optional
//! leading `date` column. Reports serialize floating-point values with 17
//! significant digits, enough to reproduce every `f64` bit-exactly, and the
//! output bytes are a pure function of the report content.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;

use crate::asymptotics::AreTable;
use crate::error::{Error, Result};
use crate::estimators::{Estimate, Sample};
use crate::monte_carlo::MseTable;
use crate::portfolio::FrontierPoint;

/// Whether an input file holds returns directly or price levels to be
/// converted into log-returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    Returns,
    Prices,
}

/// Parsed returns: asset names from the header plus the observation matrix.
#[derive(Debug, Clone)]
pub struct ReturnsData {
    pub names: Vec<String>,
    pub sample: Sample,
}

/// Loads a returns or prices file.
///
/// Prices are converted through consecutive log-ratios, yielding one row
/// fewer than the input. A leading header cell named `date` (any case)
/// marks a period-label column, which is skipped.
pub fn load_returns(path: &Path, mode: InputMode) -> Result<ReturnsData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_open_error)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let has_date = headers.get(0).is_some_and(|h| h.eq_ignore_ascii_case("date"));
    let skip = usize::from(has_date);
    let names: Vec<String> = headers.iter().skip(skip).map(String::from).collect();
    if names.is_empty() {
        return Err(Error::Parse { line: 1, message: "header declares no asset columns".into() });
    }
    let n = names.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header occupies line 1
        let record = record.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let mut row = Vec::with_capacity(n);
        for (col, cell) in record.iter().skip(skip).enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: cannot parse {cell:?} as a number", col + 1 + skip),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { line, column: col + 1 + skip });
            }
            row.push(value);
        }
        rows.push(row);
    }
    let rows = match mode {
        InputMode::Returns => rows,
        InputMode::Prices => prices_to_returns(&rows, skip)?,
    };
    if rows.is_empty() {
        let required = if mode == InputMode::Prices { 2 } else { 1 };
        return Err(Error::TooFewRows { required, actual: 0 });
    }
    Ok(ReturnsData { names, sample: Sample::from_rows(&rows)? })
}

fn prices_to_returns(prices: &[Vec<f64>], skip: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(prices.len().saturating_sub(1));
    for t in 1..prices.len() {
        let mut row = Vec::with_capacity(prices[t].len());
        for (col, (now, before)) in prices[t].iter().zip(&prices[t - 1]).enumerate() {
            let r = (now / before).ln();
            if !r.is_finite() {
                return Err(Error::NonFiniteValue { line: t + 2, column: col + 1 + skip });
            }
            row.push(r);
        }
        out.push(row);
    }
    Ok(out)
}

fn csv_open_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line: 0, message: format!("{other:?}") },
    }
}

/// Writes a returns file that [`load_returns`] reproduces bit-exactly.
pub fn save_returns(path: &Path, names: &[String], sample: &Sample) -> Result<()> {
    if names.len() != sample.n_assets() {
        return Err(Error::DimensionMismatch { expected: sample.n_assets(), actual: names.len() });
    }
    let mut writer = csv::Writer::from_path(path).map_err(csv_open_error)?;
    writer.write_record(names).map_err(csv_write_error)?;
    for row in sample.rows() {
        let cells: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        writer.write_record(&cells).map_err(csv_write_error)?;
    }
    writer.flush()?;
    Ok(())
}

fn csv_write_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse { line: 0, message: format!("{other:?}") },
    }
}

/// 17-significant-digit scientific rendering; round-trips any finite `f64`.
pub fn fmt_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// Output encoding for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Everything the command-line front end can emit.
#[derive(Debug, Clone)]
pub enum Report {
    Estimate { assets: Vec<String>, alpha: f64, estimate: Estimate },
    Frontier { assets: Vec<String>, points: Vec<FrontierPoint> },
    DimSeries { values: Vec<f64> },
    Are(AreTable),
    Mse(MseTable),
}

/// Serializes a report to `path`. Identical reports produce identical bytes.
pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    match format {
        ReportFormat::Csv => write_csv(report, &mut out)?,
        ReportFormat::Json => write_json(report, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn write_csv(report: &Report, out: &mut impl Write) -> Result<()> {
    match report {
        Report::Estimate { estimate, alpha, .. } => {
            writeln!(out, "field,i,j,value")?;
            writeln!(out, "alpha,,,{}", fmt_float(*alpha))?;
            writeln!(out, "converged,,,{}", estimate.converged)?;
            writeln!(out, "iterations,,,{}", estimate.iterations)?;
            writeln!(out, "objective,,,{}", fmt_float(estimate.objective_value))?;
            for (i, v) in estimate.mu.iter().enumerate() {
                writeln!(out, "mu,{},,{}", i + 1, fmt_float(*v))?;
            }
            let n = estimate.sigma.dim();
            for i in 0..n {
                for j in 0..n {
                    writeln!(out, "sigma,{},{},{}", i + 1, j + 1, fmt_float(estimate.sigma.get(i, j)))?;
                }
            }
            for (i, w) in estimate.weights.iter().enumerate() {
                writeln!(out, "weight,{},,{}", i + 1, fmt_float(*w))?;
            }
        }
        Report::Frontier { points, .. } => {
            let n = points.first().map_or(0, |p| p.weights.len());
            let header: Vec<String> = ["lambda", "return", "variance"]
                .iter()
                .map(|s| s.to_string())
                .chain((1..=n).map(|i| format!("w_{i}")))
                .collect();
            writeln!(out, "{}", header.join(","))?;
            for p in points {
                let mut cells = vec![
                    fmt_float(p.lambda),
                    fmt_float(p.expected_return),
                    fmt_float(p.variance),
                ];
                cells.extend(p.weights.iter().map(|w| fmt_float(*w)));
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Report::DimSeries { values } => {
            writeln!(out, "index,dim")?;
            for (i, v) in values.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, fmt_float(*v))?;
            }
        }
        Report::Are(table) => {
            let header: Vec<String> = std::iter::once("n".to_string())
                .chain(table.alphas.iter().map(|a| format!("{a}")))
                .collect();
            writeln!(out, "{}", header.join(","))?;
            for (i, n) in table.n_values.iter().enumerate() {
                let cells: Vec<String> = std::iter::once(n.to_string())
                    .chain(table.values[i].iter().map(|v| fmt_float(*v)))
                    .collect();
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        Report::Mse(table) => {
            writeln!(out, "n,t,eps,alpha,mse,failures")?;
            for cell in &table.cells {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    cell.n,
                    cell.t,
                    fmt_float(cell.eps),
                    fmt_float(cell.alpha),
                    fmt_float(cell.mse),
                    cell.failures
                )?;
            }
        }
    }
    Ok(())
}

/// JSON formatter that renders every float with 17 significant digits.
struct Precision17;

impl serde_json::ser::Formatter for Precision17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn write_json(report: &Report, out: &mut impl Write) -> Result<()> {
    let value = match report {
        Report::Estimate { assets, alpha, estimate } => {
            let n = estimate.sigma.dim();
            let sigma_rows: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| estimate.sigma.get(i, j)).collect())
                .collect();
            json!({
                "alpha": alpha,
                "assets": assets,
                "converged": estimate.converged,
                "iterations": estimate.iterations,
                "mu": estimate.mu,
                "objective_value": estimate.objective_value,
                "sigma": sigma_rows,
                "weights": estimate.weights,
            })
        }
        Report::Frontier { assets, points } => {
            let pts: Vec<serde_json::Value> = points
                .iter()
                .map(|p| {
                    json!({
                        "lambda": p.lambda,
                        "expected_return": p.expected_return,
                        "variance": p.variance,
                        "weights": p.weights,
                    })
                })
                .collect();
            json!({ "assets": assets, "points": pts })
        }
        Report::DimSeries { values } => {
            let pts: Vec<serde_json::Value> = values
                .iter()
                .enumerate()
                .map(|(i, v)| json!({ "index": i + 1, "dim": v }))
                .collect();
            json!({ "points": pts })
        }
        Report::Are(table) => {
            let rows: Vec<serde_json::Value> = table
                .n_values
                .iter()
                .zip(&table.values)
                .map(|(n, values)| json!({ "n": n, "values": values }))
                .collect();
            json!({ "alphas": table.alphas, "rows": rows })
        }
        Report::Mse(table) => {
            let cells: Vec<serde_json::Value> = table
                .cells
                .iter()
                .map(|c| {
                    json!({
                        "n": c.n,
                        "t": c.t,
                        "eps": c.eps,
                        "alpha": c.alpha,
                        "mse": if c.mse.is_finite() { Some(c.mse) } else { None },
                        "failures": c.failures,
                    })
                })
                .collect();
            json!({ "cells": cells })
        }
    };
    let mut serializer = serde_json::Serializer::with_formatter(&mut *out, Precision17);
    serde::Serialize::serialize(&value, &mut serializer)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    writeln!(out)?;
    Ok(())
}
