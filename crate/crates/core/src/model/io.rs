//! Plain-text QUBO coefficient files.
//!
//! ```text
//! offset 1.5        # optional, first data line only
//! 0 0 -1.0          # i == j: linear term a_i
//! 0 1 2.0           # i < j: interaction b_ij
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::QuboModel;
use crate::error::{Error, Result};

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

/// Parses the whitespace-separated `i j value` format. Line numbers in
/// errors are 1-based.
pub fn parse_qubo(text: &str) -> Result<QuboModel> {
    let mut offset = 0.0;
    let mut seen_data = false;
    let mut linear: BTreeMap<usize, f64> = BTreeMap::new();
    let mut quadratic: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut num_vars = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();

        if tokens[0] == "offset" {
            if seen_data {
                return parse_err(line_no, "offset must be the first data line");
            }
            if tokens.len() != 2 {
                return parse_err(line_no, "expected `offset <value>`");
            }
            offset = parse_value(tokens[1], line_no)?;
            seen_data = true;
            continue;
        }
        seen_data = true;

        if tokens.len() != 3 {
            return parse_err(
                line_no,
                format!("expected `i j value`, found {} fields", tokens.len()),
            );
        }
        let i = parse_index(tokens[0], line_no)?;
        let j = parse_index(tokens[1], line_no)?;
        let value = parse_value(tokens[2], line_no)?;
        num_vars = num_vars.max(i.max(j) + 1);

        if i == j {
            if linear.insert(i, value).is_some() {
                return parse_err(line_no, format!("duplicate linear term for variable {i}"));
            }
        } else if i < j {
            if let Some((_, first)) = quadratic.insert((i, j), (value, line_no)) {
                return parse_err(
                    line_no,
                    format!("duplicate interaction ({i}, {j}), first given on line {first}"),
                );
            }
        } else {
            return parse_err(
                line_no,
                format!("interaction ({i}, {j}) must be written with i < j"),
            );
        }
    }

    let mut model = QuboModel::new(num_vars);
    model.set_offset(offset)?;
    for (i, a) in linear {
        model.set_linear(i, a)?;
    }
    for ((i, j), (b, _)) in quadratic {
        model.set_quadratic(i, j, b)?;
    }
    Ok(model)
}

fn parse_index(token: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .or_else(|_| parse_err(line, format!("`{token}` is not a non-negative integer index")))
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => parse_err(line, format!("`{token}` is not a finite number")),
    }
}

pub fn read_qubo(path: impl AsRef<Path>) -> Result<QuboModel> {
    parse_qubo(&std::fs::read_to_string(path)?)
}

/// Serializes `m` in the format accepted by [`parse_qubo`]. The highest
/// variable always appears so the variable count survives a round trip.
pub fn write_qubo(m: &QuboModel) -> String {
    let mut out = String::new();
    if m.offset() != 0.0 {
        let _ = writeln!(out, "offset {:?}", m.offset());
    }
    let n = m.num_vars();
    for (i, &a) in m.linear().iter().enumerate() {
        if a != 0.0 || i + 1 == n {
            let _ = writeln!(out, "{i} {i} {a:?}");
        }
    }
    for (&(i, j), &b) in m.quadratic() {
        let _ = writeln!(out, "{i} {j} {b:?}");
    }
    out
}
