//! Plain-text model files.
//!
//! ```text
//! # comment
//! 0 0.5        # field h_0
//! 0 1 -1.0     # coupling J_01
//! ```
//!
//! The spin count is one more than the largest index mentioned.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::IsingModel;
use crate::error::{Error, Result};

pub fn parse_text_model(text: &str) -> Result<IsingModel> {
    let mut fields: BTreeMap<usize, f64> = BTreeMap::new();
    let mut couplings: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut max_index: Option<usize> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let index = |tok: &str| {
            tok.parse::<usize>()
                .map_err(|_| err(format!("expected a nonnegative integer index, got {tok:?}")))
        };
        let value = |tok: &str| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("expected a finite number, got {tok:?}")))
        };
        match tokens.as_slice() {
            [i, h] => {
                let i = index(i)?;
                let h = value(h)?;
                if fields.insert(i, h).is_some() {
                    return Err(err(format!("field of spin {i} set twice")));
                }
                max_index = max_index.max(Some(i));
            }
            [i, j, v] => {
                let (i, j) = (index(i)?, index(j)?);
                let v = value(v)?;
                if i == j {
                    return Err(err(format!("self-coupling on spin {i}")));
                }
                if v == 0.0 {
                    return Err(err(format!("zero coupling between {i} and {j}")));
                }
                let key = (i.min(j), i.max(j));
                if couplings.insert(key, (v, line)).is_some() {
                    return Err(err(format!("coupling ({}, {}) set twice", key.0, key.1)));
                }
                max_index = max_index.max(Some(i.max(j)));
            }
            _ => {
                return Err(err(format!(
                    "expected `i h` or `i j J`, found {} tokens",
                    tokens.len()
                )))
            }
        }
    }

    let n = max_index.map_or(0, |m| m + 1);
    let mut h = vec![0.0; n];
    for (i, v) in fields {
        h[i] = v;
    }
    IsingModel::new(n, h, couplings.into_iter().map(|(k, (v, _))| (k, v)))
}

/// Writes every field (zeros included, so the spin count survives) then every coupler.
pub fn format_text_model(model: &IsingModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} spins, {} couplers",
        model.num_spins(),
        model.num_couplers()
    );
    for (i, h) in model.fields().iter().enumerate() {
        let _ = writeln!(out, "{i} {h}");
    }
    for ((i, j), v) in model.couplings() {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    out
}
