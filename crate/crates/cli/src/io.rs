//! Vector and matrix text input, result output.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use theta_norms::{DMatrix, Error, Result};

use crate::args::{Format, OutputArgs};

fn open(path: Option<&Path>) -> Result<Box<dyn BufRead>> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(std::fs::File::open(p)?)),
        None => Box::new(BufReader::new(std::io::stdin())),
    })
}

fn numbers(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a number: {t:?}"),
            })
        })
        .collect()
}

/// One whitespace-separated vector, possibly spread over several lines.
pub fn read_vector(path: Option<&Path>) -> Result<Vec<f64>> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        out.extend(numbers(line, i + 1)?);
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    Ok(out)
}

/// A dense matrix, one row per non-blank line.
pub fn read_matrix(path: Option<&Path>) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = numbers(&line, i + 1)?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("row has {} values, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    let Some(cols) = rows.first().map(Vec::len) else {
        return Err(Error::InvalidInput("empty matrix".into()));
    };
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Write `text` to the requested destination.
pub fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json(value: serde_json::Value) -> Result<String> {
    serde_json::to_string(&value)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize output: {e}")))
}

/// Scalar at full precision.
pub fn scalar(format: Format, x: f64) -> Result<String> {
    Ok(match format {
        Format::Csv => format!("{x}\n"),
        Format::Json => format!("{}\n", json(serde_json::json!(x))?),
    })
}

/// Vector at full precision, space separated so it can be fed back in.
pub fn vector(format: Format, v: &[f64]) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("{}\n", parts.join(" "))
        }
        Format::Json => format!("{}\n", json(serde_json::json!(v))?),
    })
}
