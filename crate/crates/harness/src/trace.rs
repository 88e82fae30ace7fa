//! CSV output. Floats use 17 significant digits in scientific notation; lines end in LF.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use adasamp::{OracleReport, TraceRecord};

use crate::error::{HarnessError, Result};

pub const TRACE_HEADER: &str =
    "k,sample_size,alpha,L,eff_evals,f_error,grad_inf,angle_deg,beta,ip_lhs,ip_rhs,orth_lhs,orth_rhs,branch";

pub const ORACLE_HEADER: &str =
    "k,sample_size,beta,s_min_inner,s_min_norm,angle_deg,exact_ip_lhs,exact_orth_lhs,exact_norm_lhs,rho,tan_bound";

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_trace(trace: &[TraceRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        let floats = [
            r.alpha, r.l_k, r.eff_evals, r.f_error, r.grad_inf, r.angle_deg, r.beta, r.ip_lhs, r.ip_rhs, r.orth_lhs,
            r.orth_rhs,
        ];
        write!(out, "{},{}", r.k, r.sample_size)?;
        for v in floats {
            write!(out, ",{}", fmt_f64(v))?;
        }
        writeln!(out, ",{}", r.branch.as_str())?;
    }
    Ok(())
}

/// Writes `contents` to `path` through a buffered writer.
pub fn write_file(path: &Path, contents: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = BufWriter::new(file);
    contents(&mut w).and_then(|_| w.flush()).map_err(|e| HarnessError::io(path, e))
}

pub fn write_trace_file(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    write_file(path, |w| write_trace(trace, w))
}

/// One iterate of a run: the point, the batch size used there and the batch gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRow {
    pub k: usize,
    pub sample_size: usize,
    pub x: Vec<f64>,
    pub batch_gradient: Vec<f64>,
}

pub fn write_iterates(rows: &[IterateRow], mut out: impl Write) -> std::io::Result<()> {
    let d = rows.first().map_or(0, |r| r.x.len());
    write!(out, "k,sample_size")?;
    for j in 0..d {
        write!(out, ",x{j}")?;
    }
    for j in 0..d {
        write!(out, ",g{j}")?;
    }
    writeln!(out)?;
    for r in rows {
        write!(out, "{},{}", r.k, r.sample_size)?;
        for v in r.x.iter().chain(&r.batch_gradient) {
            write!(out, ",{}", fmt_f64(*v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_iterates(path: &Path) -> Result<Vec<IterateRow>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| HarnessError::io(path, e))?,
        None => {
            return Err(HarnessError::Parse {
                line: 1,
                msg: "empty iterates file".into(),
            })
        }
    };
    let cols = header.split(',').count();
    if cols < 4 || cols % 2 != 0 || !header.starts_with("k,sample_size,") {
        return Err(HarnessError::Parse {
            line: 1,
            msg: "not an iterates header".into(),
        });
    }
    let d = (cols - 2) / 2;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let bad = |msg: &str| HarnessError::Parse {
            line: lineno,
            msg: msg.into(),
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(bad("wrong number of columns"));
        }
        let k = fields[0].parse().map_err(|_| bad("bad iteration index"))?;
        let sample_size = fields[1].parse().map_err(|_| bad("bad sample size"))?;
        let vals: Vec<f64> = fields[2..]
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("bad number"))?;
        rows.push(IterateRow {
            k,
            sample_size,
            x: vals[..d].to_vec(),
            batch_gradient: vals[d..].to_vec(),
        });
    }
    Ok(rows)
}

pub fn write_oracle(rows: &[(usize, usize, OracleReport)], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{ORACLE_HEADER}")?;
    for (k, m, r) in rows {
        write!(out, "{k},{m}")?;
        for v in [
            r.beta,
            r.s_min_inner,
            r.s_min_norm,
            r.angle_deg,
            r.exact_ip_lhs,
            r.exact_orth_lhs,
            r.exact_norm_lhs,
            r.rho,
            r.tan_bound,
        ] {
            write!(out, ",{}", fmt_f64(v))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
