//! LIBSVM sparse text format: `label idx:val idx:val ...` with 1-based indices.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use adasamp::Dataset;

use crate::error::{HarnessError, Result};

fn parse_number(tok: &str) -> Option<f64> {
    // Accept the typographic minus sign as well as ASCII '-'.
    let v: f64 = if tok.contains('\u{2212}') {
        tok.replace('\u{2212}', "-").parse().ok()?
    } else {
        tok.parse().ok()?
    };
    v.is_finite().then_some(v)
}

fn parse_line(line: &str, lineno: usize) -> Result<(f64, Vec<(usize, f64)>)> {
    let err = |msg: String| HarnessError::Parse { line: lineno, msg };
    let mut toks = line.split_whitespace();
    let label_tok = toks.next().ok_or_else(|| err("missing label".into()))?;
    let label = parse_number(label_tok).ok_or_else(|| err(format!("bad label {label_tok:?}")))?;
    let mut row = Vec::new();
    let mut seen = HashSet::new();
    for tok in toks {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
        let idx: usize = idx
            .parse()
            .ok()
            .filter(|&i| i >= 1)
            .ok_or_else(|| err(format!("bad feature index {idx:?}")))?;
        let val = parse_number(val).ok_or_else(|| err(format!("bad value {val:?} for feature {idx}")))?;
        if !seen.insert(idx) {
            return Err(err(format!("duplicate feature index {idx}")));
        }
        row.push((idx - 1, val));
    }
    row.sort_unstable_by_key(|&(j, _)| j);
    Ok((label, row))
}

/// Reads LIBSVM text. Blank lines and lines starting with `#` are skipped.
/// The dimension is the largest index seen unless `n_features` is given.
pub fn read_libsvm(reader: impl BufRead, n_features: Option<usize>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut max_index = 0;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| HarnessError::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (label, row) = parse_line(trimmed, lineno)?;
        if let Some(&(j, _)) = row.last() {
            max_index = max_index.max(j + 1);
            if let Some(d) = n_features {
                if j >= d {
                    return Err(HarnessError::Parse {
                        line: lineno,
                        msg: format!("feature index {} exceeds dimension {d}", j + 1),
                    });
                }
            }
        }
        labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(HarnessError::Parse {
            line: 0,
            msg: "no samples".into(),
        });
    }
    let d = n_features.unwrap_or(max_index).max(1);
    Ok(Dataset::sparse(&rows, &labels, d)?)
}

pub fn parse_libsvm(path: &Path, n_features: Option<usize>) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_libsvm(BufReader::new(file), n_features)
}

/// Writes nonzero entries with 17 significant digits; labels as `+1` / `-1`.
pub fn write_libsvm(data: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    let d = data.n_features();
    for i in 0..data.n_samples() {
        out.write_all(if data.label(i) > 0.0 { b"+1" } else { b"-1" })?;
        for (j, v) in data.row(i).to_dense(d).into_iter().enumerate() {
            if v != 0.0 {
                write!(out, " {}:{v:.16e}", j + 1)?;
            }
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}
