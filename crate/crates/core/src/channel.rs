//! Channel construction.
//!
//! Near-field links use the projected-aperture spherical-wave model: each
//! element's power gain is `A cos(φ) / (4π r²)` where `φ` is the angle
//! between the propagation direction and the panel normal, and its phase is
//! `−2π r / λ0` with the exact element distance `r`. Far-field hops are i.i.d.
//! Rayleigh with variance `β / d^α`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SwiptError};
use crate::geometry::{
    ap_element_distances, centered_offsets, distance_factor, element_positions,
    user_antenna_positions, Aperture, IrsPanelSpec, Point3, SystemGeometry, UserArraySpec,
};
use crate::linalg::{cis, CMatrix, CVector};
use crate::nearfield_opt::PhaseConfig;

/// AP→panel response of one panel.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldLink {
    /// Linear power gain per element.
    pub gains: Vec<f64>,
    /// Propagation phase per element, radians.
    pub phases: Vec<f64>,
    /// `sqrt(gain) · e^{j phase}`.
    pub response: CVector,
}

impl NearFieldLink {
    pub fn total_gain(&self) -> f64 {
        self.gains.iter().sum()
    }
}

/// AP→panel link for every element of `panel`.
pub fn ap_irs_link(panel: &IrsPanelSpec, wavelength: f64) -> Result<NearFieldLink> {
    if !(wavelength > 0.0) {
        return Err(SwiptError::InvalidParameter(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let c = panel.center();
    let area = panel.element_area();
    let distances = ap_element_distances(panel);
    let mut gains = Vec::with_capacity(panel.element_count());
    if distances.euclidean_fallback {
        for &r in &distances.values {
            gains.push(area * c.y.abs() / (4.0 * PI * r * r * r));
        }
    } else {
        let l_x = c.x.abs();
        let r_bar = c.y / c.x;
        let xi = panel.spacing() / c.x;
        for (ix, iz) in panel.element_indices() {
            let f = distance_factor(r_bar, xi, ix as f64, iz as f64);
            gains.push(area * c.y.abs() / (4.0 * PI * l_x.powi(3) * f.powf(1.5)));
        }
    }
    for (index, &g) in gains.iter().enumerate() {
        if !(g > 0.0) || !g.is_finite() {
            return Err(SwiptError::NonPositiveGain { index, value: g });
        }
    }
    let phases: Vec<f64> = distances
        .values
        .iter()
        .map(|r| -2.0 * PI * r / wavelength)
        .collect();
    let response = CVector::from_iterator(
        gains.len(),
        gains.iter().zip(&phases).map(|(g, p)| g.sqrt() * cis(*p)),
    );
    Ok(NearFieldLink {
        gains,
        phases,
        response,
    })
}

/// Near-field panel→user matrix (`M × N`): entry `(m, k)` links element `k`
/// to antenna `m`.
pub fn irs_user_link_near(
    panel: &IrsPanelSpec,
    user: &UserArraySpec,
    wavelength: f64,
) -> Result<CMatrix> {
    if !(wavelength > 0.0) {
        return Err(SwiptError::InvalidParameter(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let elements = element_positions(panel);
    let antennas = user_antenna_positions(user);
    let normal_y = panel.normal_sign();
    let area = panel.element_area();
    let mut g = CMatrix::zeros(antennas.len(), elements.len());
    for (m, a) in antennas.iter().enumerate() {
        for (k, p) in elements.iter().enumerate() {
            let r = p.distance_to(a);
            if r == 0.0 {
                return Err(SwiptError::ZeroDistance {
                    antenna: m,
                    element: k,
                });
            }
            let projection = normal_y * (a.y - p.y);
            if !(projection > 0.0) {
                return Err(SwiptError::BehindPanel {
                    antenna: m,
                    element: k,
                    projection,
                });
            }
            let gain = area * projection / (4.0 * PI * r * r * r);
            g[(m, k)] = gain.sqrt() * cis(-2.0 * PI * r / wavelength);
        }
    }
    Ok(g)
}

/// Large-scale statistics of a Rayleigh hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldStats {
    pub path_loss_exponent: f64,
    /// Linear reference gain at 1 m.
    pub reference_gain: f64,
    pub distance: f64,
}

impl FarFieldStats {
    pub fn new(path_loss_exponent: f64, reference_gain: f64, distance: f64) -> Result<Self> {
        if !(path_loss_exponent > 0.0) || !(reference_gain > 0.0) || !(distance > 0.0) {
            return Err(SwiptError::InvalidParameter(format!(
                "far-field stats need α, β, d > 0 (got {path_loss_exponent}, {reference_gain}, {distance})"
            )));
        }
        Ok(Self {
            path_loss_exponent,
            reference_gain,
            distance,
        })
    }

    /// Per-entry variance `β / d^α`.
    pub fn variance(&self) -> f64 {
        self.reference_gain / self.distance.powf(self.path_loss_exponent)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * db_to_linear(dbm)
}

/// One circularly-symmetric complex Gaussian draw with variance `var`.
pub fn sample_cn<R: Rng + ?Sized>(var: f64, rng: &mut R) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// `rows × cols` matrix of i.i.d. `CN(0, β/d^α)` entries, filled row by row.
pub fn sample_far_field<R: Rng + ?Sized>(
    stats: &FarFieldStats,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMatrix {
    let var = stats.variance();
    let mut out = CMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            out[(r, c)] = sample_cn(var, rng);
        }
    }
    out
}

/// Average combined AP→panel→user gain `ϱ²` by exact double summation.
pub fn hybrid_gain_numeric(aperture: &Aperture, stats: &FarFieldStats) -> f64 {
    let xi = aperture.xi();
    let r_signed = aperture.l_y / aperture.l_x;
    let prefactor = stats.variance() * aperture.element_area * aperture.l_y.abs()
        / (4.0 * PI * aperture.l_x.powi(3));
    prefactor * projected_sum(aperture.n_x, aperture.n_z, xi, r_signed)
}

/// `Σ_{n_x} Σ_{n_z} [1 + r̄² + 2 n_x ξ + (n_x² + n_z²) ξ²]^{-3/2}` over
/// centred offsets.
pub fn projected_sum(n_x: usize, n_z: usize, xi: f64, r_bar: f64) -> f64 {
    let zs: Vec<f64> = centered_offsets(n_z).map(|z| z * z * xi * xi).collect();
    let mut total = 0.0;
    for nx in centered_offsets(n_x) {
        let base = 1.0 + r_bar * r_bar + 2.0 * nx * xi + nx * nx * xi * xi;
        let mut row = 0.0;
        for z2 in &zs {
            let f = base + z2;
            row += 1.0 / (f * f.sqrt());
        }
        total += row;
    }
    total
}

/// Regime of the panel→user hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NearField,
    HybridField,
}

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_a: CVector,
    pub h_b: CVector,
    pub g_a: CMatrix,
    pub g_b: CMatrix,
    pub f: CVector,
    pub regime: Regime,
}

impl ChannelSet {
    pub fn antenna_count(&self) -> usize {
        self.f.len()
    }
    pub fn n_a(&self) -> usize {
        self.h_a.len()
    }
    pub fn n_b(&self) -> usize {
        self.h_b.len()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.f.len();
        for (what, got) in [("G_a rows", self.g_a.nrows()), ("G_b rows", self.g_b.nrows())] {
            if got != m {
                return Err(SwiptError::DimensionMismatch {
                    what,
                    expected: m,
                    got,
                });
            }
        }
        if self.g_a.ncols() != self.h_a.len() {
            return Err(SwiptError::DimensionMismatch {
                what: "G_a columns",
                expected: self.h_a.len(),
                got: self.g_a.ncols(),
            });
        }
        if self.g_b.ncols() != self.h_b.len() {
            return Err(SwiptError::DimensionMismatch {
                what: "G_b columns",
                expected: self.h_b.len(),
                got: self.g_b.ncols(),
            });
        }
        Ok(())
    }
}

/// Deterministic near-field channels for a geometry plus a given
/// interference channel.
pub fn near_field_channels(
    geometry: &SystemGeometry,
    wavelength: f64,
    f: CVector,
) -> Result<ChannelSet> {
    let link_a = ap_irs_link(&geometry.irs1, wavelength)?;
    let link_b = ap_irs_link(&geometry.irs2, wavelength)?;
    let set = ChannelSet {
        h_a: link_a.response,
        h_b: link_b.response,
        g_a: irs_user_link_near(&geometry.irs1, &geometry.user, wavelength)?,
        g_b: irs_user_link_near(&geometry.irs2, &geometry.user, wavelength)?,
        f,
        regime: Regime::NearField,
    };
    set.validate()?;
    Ok(set)
}

/// Hybrid-field channels: near-field AP→panel hops with Rayleigh
/// panel→user matrices.
pub fn hybrid_field_channels<R: Rng + ?Sized>(
    geometry: &SystemGeometry,
    wavelength: f64,
    stats_a: &FarFieldStats,
    stats_b: &FarFieldStats,
    f: CVector,
    rng_a: &mut R,
    rng_b: &mut R,
) -> Result<ChannelSet> {
    let link_a = ap_irs_link(&geometry.irs1, wavelength)?;
    let link_b = ap_irs_link(&geometry.irs2, wavelength)?;
    let m = geometry.user.antenna_count();
    let g_a = sample_far_field(stats_a, m, link_a.response.len(), rng_a);
    let g_b = sample_far_field(stats_b, m, link_b.response.len(), rng_b);
    let set = ChannelSet {
        h_a: link_a.response,
        h_b: link_b.response,
        g_a,
        g_b,
        f,
        regime: Regime::HybridField,
    };
    set.validate()?;
    Ok(set)
}

/// `g = G_a diag(e^{jθ_a}) h_a + G_b diag(e^{jθ_b}) h_b`.
pub fn combined_channel(set: &ChannelSet, phases: &PhaseConfig) -> Result<CVector> {
    if phases.theta_a().len() != set.n_a() {
        return Err(SwiptError::DimensionMismatch {
            what: "θ_a length",
            expected: set.n_a(),
            got: phases.theta_a().len(),
        });
    }
    if phases.theta_b().len() != set.n_b() {
        return Err(SwiptError::DimensionMismatch {
            what: "θ_b length",
            expected: set.n_b(),
            got: phases.theta_b().len(),
        });
    }
    let ra = CVector::from_iterator(
        set.n_a(),
        set.h_a.iter().zip(phases.theta_a()).map(|(h, t)| h * cis(*t)),
    );
    let rb = CVector::from_iterator(
        set.n_b(),
        set.h_b.iter().zip(phases.theta_b()).map(|(h, t)| h * cis(*t)),
    );
    Ok(&set.g_a * ra + &set.g_b * rb)
}

/// Near-field variant of [`combined_channel`]; rejects hybrid realizations.
pub fn combined_channel_near(set: &ChannelSet, phases: &PhaseConfig) -> Result<CVector> {
    if set.regime != Regime::NearField {
        return Err(SwiptError::InvalidParameter(
            "combined_channel_near needs a near-field channel set".into(),
        ));
    }
    combined_channel(set, phases)
}

/// Rayleigh interference channel from a single-antenna interferer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceModel {
    pub position: Point3,
    /// Linear gain at 1 m.
    pub reference_gain: f64,
    pub path_loss_exponent: f64,
}

impl InterferenceModel {
    pub fn stats_to(&self, user: &UserArraySpec) -> Result<FarFieldStats> {
        FarFieldStats::new(
            self.path_loss_exponent,
            self.reference_gain,
            self.position.distance_to(&user.centroid()),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, user: &UserArraySpec, rng: &mut R) -> Result<CVector> {
        let stats = self.stats_to(user)?;
        let m = user.antenna_count();
        Ok(CVector::from_iterator(
            m,
            (0..m).map(|_| sample_cn(stats.variance(), rng)),
        ))
    }
}
