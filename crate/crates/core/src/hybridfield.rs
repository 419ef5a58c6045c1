//! Hybrid-field gains (near-field AP→panel hop, Rayleigh panel→user hop)
//! and the matching power-splitting solver.

use std::f64::consts::PI;

use crate::channel::{hybrid_gain_numeric, FarFieldStats};
use crate::error::{Result, SwiptError};
use crate::geometry::Aperture;
use crate::linalg::CVector;
use crate::receiver::{harvested_power_hybrid, hybrid_average_sinr, PsVector, SystemParams};

/// Above this `ξ` the integral approximation is flagged as outside its
/// small-spacing regime.
pub const CLOSED_FORM_XI_LIMIT: f64 = 0.1;

/// Relative exclusion zone around the `N_x` branch boundary.
const BRANCH_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticCondition {
    /// `N_x → ∞` at fixed `N_z`.
    A,
    /// `N_z → ∞` with `N_x` below the branch boundary.
    B,
    /// `N_z → ∞` with `N_x` above the branch boundary.
    C,
}

impl AsymptoticCondition {
    pub fn label(&self) -> &'static str {
        match self {
            AsymptoticCondition::A => "a",
            AsymptoticCondition::B => "b",
            AsymptoticCondition::C => "c",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBreakdown {
    pub exact_sum: f64,
    pub closed_form: f64,
    /// `false` when `ξ` exceeds [`CLOSED_FORM_XI_LIMIT`].
    pub closed_form_valid: bool,
    pub asymptotic: Option<(AsymptoticCondition, f64)>,
    pub mirror_bound: f64,
}

fn prefactor(ap: &Aperture, stats: &FarFieldStats) -> f64 {
    stats.variance() * ap.element_area / (2.0 * PI * ap.spacing * ap.spacing)
}

fn checked(ap: &Aperture) -> Result<(f64, f64)> {
    ap.validate()?;
    let r = ap.r_bar();
    if r == 0.0 {
        return Err(SwiptError::InvalidGeometry(
            "r̄ = 0 puts the AP in the panel plane".into(),
        ));
    }
    Ok((ap.xi(), r))
}

/// Integral approximation of [`hybrid_gain_numeric`].
pub fn closed_form_gain(ap: &Aperture, stats: &FarFieldStats) -> Result<f64> {
    let (xi, r) = checked(ap)?;
    let (nx, nz) = (ap.n_x as f64, ap.n_z as f64);
    let common = nx * nx * xi * xi / 4.0 + nz * nz * xi * xi / 4.0 + r * r + 1.0;
    let upper = xi * nz * (1.0 + xi * nx / 2.0) / (2.0 * r * (common + nx * xi).sqrt());
    let lower = xi * nz * (1.0 - xi * nx / 2.0) / (2.0 * r * (common - nx * xi).sqrt());
    Ok(prefactor(ap, stats) * (upper.atan() - lower.atan()))
}

pub fn closed_form_valid(ap: &Aperture) -> bool {
    ap.xi() <= CLOSED_FORM_XI_LIMIT
}

/// `N_x = 2√(1 + r̄²)/ξ`, where the condition-b/c denominator vanishes.
pub fn branch_boundary(ap: &Aperture) -> f64 {
    let r = ap.r_bar();
    2.0 * (1.0 + r * r).sqrt() / ap.xi()
}

/// Large-panel limit of the closed form under one of the three growth
/// conditions.
pub fn asymptotic_gain(
    ap: &Aperture,
    stats: &FarFieldStats,
    condition: AsymptoticCondition,
) -> Result<f64> {
    let (xi, r) = checked(ap)?;
    let (nx, nz) = (ap.n_x as f64, ap.n_z as f64);
    let pre = prefactor(ap, stats);
    if condition == AsymptoticCondition::A {
        return Ok(2.0 * pre * (xi * nz / (2.0 * r)).atan());
    }
    let boundary = branch_boundary(ap);
    if (nx - boundary).abs() <= BRANCH_MARGIN * boundary {
        return Err(SwiptError::InvalidParameter(format!(
            "N_x = {nx} is within 1% of the branch boundary {boundary:.4}"
        )));
    }
    let below = nx < boundary;
    match (condition, below) {
        (AsymptoticCondition::B, false) => {
            return Err(SwiptError::InvalidParameter(format!(
                "condition b needs N_x < {boundary:.4}, got {nx}"
            )))
        }
        (AsymptoticCondition::C, true) => {
            return Err(SwiptError::InvalidParameter(format!(
                "condition c needs N_x > {boundary:.4}, got {nx}"
            )))
        }
        _ => {}
    }
    let base = (4.0 * xi * r * nx / (4.0 * r * r + 4.0 - xi * xi * nx * nx)).atan();
    let bracket = if below { base } else { base + PI };
    Ok(pre * bracket)
}

/// Half-power limit `βA/(2ε²d^α)` of an unbounded panel.
pub fn mirror_bound(stats: &FarFieldStats, spacing: f64, element_area: f64) -> f64 {
    stats.variance() * element_area / (2.0 * spacing * spacing)
}

/// All gain estimates for one aperture. The asymptotic entry follows the
/// dominant dimension and is omitted near the branch boundary.
pub fn gain_breakdown(ap: &Aperture, stats: &FarFieldStats) -> Result<GainBreakdown> {
    let closed_form = closed_form_gain(ap, stats)?;
    let condition = if ap.n_x >= ap.n_z {
        AsymptoticCondition::A
    } else if (ap.n_x as f64) < branch_boundary(ap) {
        AsymptoticCondition::B
    } else {
        AsymptoticCondition::C
    };
    let asymptotic = asymptotic_gain(ap, stats, condition)
        .ok()
        .map(|g| (condition, g));
    Ok(GainBreakdown {
        exact_sum: hybrid_gain_numeric(ap, stats),
        closed_form,
        closed_form_valid: closed_form_valid(ap),
        asymptotic,
        mirror_bound: mirror_bound(stats, ap.spacing, ap.element_area),
    })
}

#[derive(Debug, Clone)]
pub struct HybridPsSolution {
    pub rho: PsVector,
    pub harvested_power: f64,
    pub sinr: f64,
}

struct Knapsack {
    cost: Vec<f64>,
    weight: Vec<f64>,
    bound: f64,
}

fn knapsack(gain_a: f64, gain_b: f64, f: &CVector, params: &SystemParams) -> Result<Knapsack> {
    if !(gain_a >= 0.0) || !(gain_b >= 0.0) {
        return Err(SwiptError::InvalidParameter(format!(
            "combined gains must be non-negative, got {gain_a}, {gain_b}"
        )));
    }
    params.validate()?;
    let total = params.transmit_power * (gain_a + gain_b);
    let gamma = params.sinr_threshold;
    let cost = f
        .iter()
        .map(|fm| {
            params.efficiency
                * (total + params.interference_power * fm.norm_sqr() + params.antenna_noise)
        })
        .collect();
    let weight = f
        .iter()
        .map(|fm| total - gamma * params.interference_power * fm.norm_sqr() - gamma * params.antenna_noise)
        .collect();
    Ok(Knapsack {
        cost,
        weight,
        bound: gamma * params.id_noise,
    })
}

/// Maximizes harvested power subject to the average-SINR constraint. The
/// problem is a single-constraint LP with box bounds: antennas are filled
/// in increasing cost-to-weight order, lowest index first on ties.
pub fn solve_hybrid_ps(
    gain_a: f64,
    gain_b: f64,
    f: &CVector,
    params: &SystemParams,
) -> Result<HybridPsSolution> {
    if f.is_empty() {
        return Err(SwiptError::InvalidParameter("no receive antennas".into()));
    }
    let k = knapsack(gain_a, gain_b, f, params)?;
    let capacity: f64 = k.weight.iter().map(|w| w.max(0.0)).sum();
    if capacity < k.bound {
        return Err(SwiptError::Infeasible(format!(
            "decoder constraint needs {:.4e}, full splitting reaches {capacity:.4e}",
            k.bound
        )));
    }
    let mut order: Vec<usize> = (0..f.len()).filter(|&m| k.weight[m] > 0.0).collect();
    order.sort_by(|&i, &j| {
        (k.cost[i] / k.weight[i])
            .total_cmp(&(k.cost[j] / k.weight[j]))
            .then(i.cmp(&j))
    });
    let mut rho = vec![0.0; f.len()];
    let mut remaining = k.bound;
    for m in order {
        if remaining <= 0.0 {
            break;
        }
        if k.weight[m] >= remaining {
            rho[m] = remaining / k.weight[m];
            remaining = 0.0;
        } else {
            rho[m] = 1.0;
            remaining -= k.weight[m];
        }
    }
    let rho = PsVector::clamped(rho);
    Ok(HybridPsSolution {
        harvested_power: harvested_power_hybrid(gain_a, gain_b, f, &rho, params)?,
        sinr: hybrid_average_sinr(gain_a, gain_b, f, &rho, params)?,
        rho,
    })
}

/// Common splitting ratio making the average-SINR constraint tight.
pub fn equal_ps_hybrid(
    gain_a: f64,
    gain_b: f64,
    f: &CVector,
    params: &SystemParams,
) -> Result<HybridPsSolution> {
    if f.is_empty() {
        return Err(SwiptError::InvalidParameter("no receive antennas".into()));
    }
    let k = knapsack(gain_a, gain_b, f, params)?;
    let total: f64 = k.weight.iter().sum();
    if total <= 0.0 || k.bound / total > 1.0 {
        return Err(SwiptError::Infeasible(
            "no common splitting ratio meets the decoder constraint".into(),
        ));
    }
    let rho = PsVector::clamped(vec![k.bound / total; f.len()]);
    Ok(HybridPsSolution {
        harvested_power: harvested_power_hybrid(gain_a, gain_b, f, &rho, params)?,
        sinr: hybrid_average_sinr(gain_a, gain_b, f, &rho, params)?,
        rho,
    })
}
