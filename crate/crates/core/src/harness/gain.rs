//! Hybrid-field gain versus panel size, with a free-space comparison curve.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use super::output::format_float;
use crate::channel::{hybrid_gain_numeric, FarFieldStats};
use crate::error::{Result, SwiptError};
use crate::geometry::{centered_offsets, Aperture};
use crate::hybridfield::{asymptotic_gain, closed_form_gain, closed_form_valid, mirror_bound, AsymptoticCondition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainAxis {
    X,
    Z,
}

impl FromStr for GainAxis {
    type Err = SwiptError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(GainAxis::X),
            "z" => Ok(GainAxis::Z),
            _ => Err(SwiptError::InvalidParameter(format!("axis must be x or z, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub n_x: usize,
    pub n_z: usize,
    pub exact_sum: f64,
    pub closed_form: f64,
    pub closed_form_valid: bool,
    pub asymptotic_a: Option<f64>,
    pub asymptotic_b: Option<f64>,
    pub asymptotic_c: Option<f64>,
    pub free_space: f64,
    pub mirror_bound: f64,
}

/// Same cascade without the aperture projection: each element contributes
/// `A / (4π r²)`, so the sum keeps growing with the panel.
pub fn free_space_gain(ap: &Aperture, stats: &FarFieldStats) -> f64 {
    let xi = ap.xi();
    let r2 = ap.r_bar() * ap.r_bar();
    let zs: Vec<f64> = centered_offsets(ap.n_z).map(|z| z * z * xi * xi).collect();
    let mut sum = 0.0;
    for nx in centered_offsets(ap.n_x) {
        let base = (1.0 + nx * xi).powi(2) + r2;
        sum += zs.iter().map(|z2| 1.0 / (base + z2)).sum::<f64>();
    }
    stats.variance() * ap.element_area / (4.0 * PI * ap.l_x * ap.l_x) * sum
}

/// Sweeps one element count of `template` over `values`.
pub fn gain_sweep(
    template: &Aperture,
    stats: &FarFieldStats,
    axis: GainAxis,
    values: &[usize],
) -> Result<Vec<GainRow>> {
    values
        .iter()
        .map(|&n| {
            let ap = match axis {
                GainAxis::X => template.with_counts(n, template.n_z),
                GainAxis::Z => template.with_counts(template.n_x, n),
            };
            let asym = |c| asymptotic_gain(&ap, stats, c).ok();
            Ok(GainRow {
                n_x: ap.n_x,
                n_z: ap.n_z,
                exact_sum: hybrid_gain_numeric(&ap, stats),
                closed_form: closed_form_gain(&ap, stats)?,
                closed_form_valid: closed_form_valid(&ap),
                asymptotic_a: asym(AsymptoticCondition::A),
                asymptotic_b: asym(AsymptoticCondition::B),
                asymptotic_c: asym(AsymptoticCondition::C),
                free_space: free_space_gain(&ap, stats),
                mirror_bound: mirror_bound(stats, ap.spacing, ap.element_area),
            })
        })
        .collect()
}

pub const GAIN_HEADER: &str = "n_x,n_z,exact_sum,closed_form,closed_form_valid,\
asymptotic_a,asymptotic_b,asymptotic_c,free_space,mirror_bound";

pub fn write_gain_csv<W: Write>(rows: &[GainRow], mut out: W) -> Result<()> {
    writeln!(out, "{GAIN_HEADER}")?;
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n_x,
            r.n_z,
            format_float(r.exact_sum),
            format_float(r.closed_form),
            r.closed_form_valid,
            opt(r.asymptotic_a),
            opt(r.asymptotic_b),
            opt(r.asymptotic_c),
            format_float(r.free_space),
            format_float(r.mirror_bound),
        )?;
    }
    Ok(())
}
