//! CSV rows and per-cell summaries.

use std::io::Write;

use super::{ResultRow, SchemeId, SweepVariable};
use crate::error::Result;

pub const CSV_HEADER: &str =
    "scheme,sweep_variable,sweep_value,trial,harvested_power_w,sinr_linear,status,wall_ms";

pub const SUMMARY_HEADER: &str = "scheme,sweep_variable,sweep_value,trials,feasible,infeasible,\
mean_harvested_power_w,std_harvested_power_w,mean_sinr_linear,flagged";

/// Decimal notation with 12 significant digits; `nan` and `inf` spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // The exponent form rounds correctly; shift its digits into place.
    let sci = format!("{:.11e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let mut out = String::new();
    if v < 0.0 {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else if exp as usize >= digits.len() - 1 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', exp as usize - (digits.len() - 1)));
    } else {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.scheme,
            r.sweep_variable.as_str(),
            format_float(r.sweep_value),
            r.trial,
            format_float(r.harvested_power_w),
            format_float(r.sinr_linear),
            r.status.as_str(),
            r.wall_ms.map(format_float).unwrap_or_default(),
        )?;
    }
    Ok(())
}

/// Statistics of one `(scheme, sweep point)` cell over its trials.
/// Infeasible and failed trials are excluded from the means.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub scheme: SchemeId,
    pub sweep_variable: SweepVariable,
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trials: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub mean_harvested_power_w: f64,
    pub std_harvested_power_w: f64,
    pub mean_sinr_linear: f64,
    /// More than half the trials were infeasible.
    pub flagged: bool,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups sorted or unsorted rows into per-cell summaries, ordered by
/// sweep point then scheme.
pub fn summarize(rows: &[ResultRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(usize, SchemeId)> = rows.iter().map(|r| (r.sweep_index, r.scheme)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(idx, scheme)| {
            let cell: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.sweep_index == idx && r.scheme == scheme)
                .collect();
            let ok: Vec<&ResultRow> = cell.iter().copied().filter(|r| r.status.is_feasible()).collect();
            let q: Vec<f64> = ok.iter().map(|r| r.harvested_power_w).collect();
            let s: Vec<f64> = ok.iter().map(|r| r.sinr_linear).collect();
            let (mean, std) = mean_std(&q);
            let infeasible = cell.len() - ok.len();
            CellSummary {
                scheme,
                sweep_variable: cell[0].sweep_variable,
                sweep_index: idx,
                sweep_value: cell[0].sweep_value,
                trials: cell.len(),
                feasible: ok.len(),
                infeasible,
                mean_harvested_power_w: mean,
                std_harvested_power_w: std,
                mean_sinr_linear: mean_std(&s).0,
                flagged: 2 * infeasible > cell.len(),
            }
        })
        .collect()
}

pub fn write_summary<W: Write>(cells: &[CellSummary], mut out: W) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.scheme,
            c.sweep_variable.as_str(),
            format_float(c.sweep_value),
            c.trials,
            c.feasible,
            c.infeasible,
            format_float(c.mean_harvested_power_w),
            format_float(c.std_harvested_power_w),
            format_float(c.mean_sinr_linear),
            c.flagged,
        )?;
    }
    Ok(())
}
