//! Cartesian layout of the access point, the two reflecting panels and the
//! user's linear array.
//!
//! The AP sits at the origin. Both panels are parallel to the x–z plane with
//! their centres at `(l_x, l_y, 0)`; element `(n_x, n_z)` sits at
//! `(l_x + n_x ε, l_y, n_z ε)`. The user array runs along +y.
//!
//! Element order is row-major with `n_x` outer and `n_z` inner, ascending in
//! both. Every per-element vector in the crate (AP→panel responses, phase
//! vectors, columns of the panel→user matrices) uses this order.

use crate::error::{Result, SwiptError};

/// A point in 3D space, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance_to(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Offsets `k − (count−1)/2` for `k = 0..count`. Integers for odd counts.
pub fn centered_offsets(count: usize) -> impl Iterator<Item = f64> + Clone {
    let half = (count as f64 - 1.0) / 2.0;
    (0..count).map(move |k| k as f64 - half)
}

/// A uniform planar reflecting panel parallel to the x–z plane.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsPanelSpec {
    center: Point3,
    n_x: usize,
    n_z: usize,
    spacing: f64,
    element_area: f64,
}

impl IrsPanelSpec {
    /// Validates and builds a panel. Element counts must be odd, the panel
    /// centre must lie at z = 0 and off the x–z plane through the AP.
    pub fn new(
        center: Point3,
        n_x: usize,
        n_z: usize,
        spacing: f64,
        element_area: f64,
    ) -> Result<Self> {
        if n_x == 0 || n_z == 0 {
            return Err(SwiptError::InvalidPanel(format!(
                "element counts must be positive (n_x={n_x}, n_z={n_z})"
            )));
        }
        if n_x.is_multiple_of(2) || n_z.is_multiple_of(2) {
            return Err(SwiptError::InvalidPanel(format!(
                "element counts must be odd (n_x={n_x}, n_z={n_z})"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(SwiptError::InvalidPanel(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        if !(element_area > 0.0) || element_area.sqrt() > spacing * (1.0 + 1e-12) {
            return Err(SwiptError::InvalidPanel(format!(
                "element side sqrt(A)={} must lie in (0, spacing={spacing}]",
                element_area.sqrt()
            )));
        }
        if center.z != 0.0 {
            return Err(SwiptError::InvalidPanel(format!(
                "panel centre must have z = 0, got {}",
                center.z
            )));
        }
        if center.y == 0.0 || !center.y.is_finite() || !center.x.is_finite() {
            return Err(SwiptError::InvalidPanel(format!(
                "panel centre must have finite, nonzero y offset, got ({}, {})",
                center.x, center.y
            )));
        }
        Ok(Self {
            center,
            n_x,
            n_z,
            spacing,
            element_area,
        })
    }

    pub fn center(&self) -> Point3 {
        self.center
    }
    pub fn n_x(&self) -> usize {
        self.n_x
    }
    pub fn n_z(&self) -> usize {
        self.n_z
    }
    pub fn element_count(&self) -> usize {
        self.n_x * self.n_z
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn element_area(&self) -> f64 {
        self.element_area
    }

    /// Sign of the panel normal along y. The normal faces the AP, so a panel
    /// at positive `l_y` has normal `(0, −1, 0)`.
    pub fn normal_sign(&self) -> f64 {
        -self.center.y.signum()
    }

    /// Copy of this panel moved to a new centre.
    pub fn with_center(&self, center: Point3) -> Result<Self> {
        Self::new(center, self.n_x, self.n_z, self.spacing, self.element_area)
    }

    /// Copy of this panel with different element counts.
    pub fn with_counts(&self, n_x: usize, n_z: usize) -> Result<Self> {
        Self::new(self.center, n_x, n_z, self.spacing, self.element_area)
    }

    /// Integer element indices `(n_x, n_z)` in crate order.
    pub fn element_indices(&self) -> Vec<(i64, i64)> {
        let hx = (self.n_x as i64 - 1) / 2;
        let hz = (self.n_z as i64 - 1) / 2;
        let mut out = Vec::with_capacity(self.element_count());
        for ix in -hx..=hx {
            for iz in -hz..=hz {
                out.push((ix, iz));
            }
        }
        out
    }

    /// Aperture description used by the hybrid-field gain analysis.
    pub fn aperture(&self) -> Aperture {
        Aperture {
            l_x: self.center.x,
            l_y: self.center.y,
            n_x: self.n_x,
            n_z: self.n_z,
            spacing: self.spacing,
            element_area: self.element_area,
        }
    }
}

/// Element centres of `panel`, in crate order.
pub fn element_positions(panel: &IrsPanelSpec) -> Vec<Point3> {
    let c = panel.center;
    let eps = panel.spacing;
    panel
        .element_indices()
        .into_iter()
        .map(|(ix, iz)| Point3::new(c.x + ix as f64 * eps, c.y, iz as f64 * eps))
        .collect()
}

/// AP-to-element distances plus a flag telling whether the closed
/// parameterisation in `r̄ = l_y/l_x`, `ξ = ε/l_x` was usable.
#[derive(Debug, Clone, PartialEq)]
pub struct ApDistances {
    pub values: Vec<f64>,
    /// Set when `l_x = 0`; the values then come from the direct norm.
    pub euclidean_fallback: bool,
}

/// Distance from the AP at the origin to every element of `panel`.
pub fn ap_element_distances(panel: &IrsPanelSpec) -> ApDistances {
    let l_x = panel.center.x;
    if l_x == 0.0 {
        let values = element_positions(panel)
            .iter()
            .map(|p| p.distance_to(&Point3::ORIGIN))
            .collect();
        return ApDistances {
            values,
            euclidean_fallback: true,
        };
    }
    let r_bar = panel.center.y / l_x;
    let xi = panel.spacing / l_x;
    let values = panel
        .element_indices()
        .into_iter()
        .map(|(ix, iz)| {
            let (nx, nz) = (ix as f64, iz as f64);
            l_x.abs() * distance_factor(r_bar, xi, nx, nz).sqrt()
        })
        .collect();
    ApDistances {
        values,
        euclidean_fallback: false,
    }
}

/// `1 + r̄² + 2 n_x ξ + (n_x² + n_z²) ξ²`, the squared AP-element distance
/// normalised by `l_x²`.
#[inline]
pub fn distance_factor(r_bar: f64, xi: f64, nx: f64, nz: f64) -> f64 {
    1.0 + r_bar * r_bar + 2.0 * nx * xi + (nx * nx + nz * nz) * xi * xi
}

/// Linear array along +y; antenna `m` (1-based) sits at `start + (0, m d, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserArraySpec {
    start: Point3,
    antenna_count: usize,
    spacing: f64,
}

impl UserArraySpec {
    pub fn new(start: Point3, antenna_count: usize, spacing: f64) -> Result<Self> {
        if antenna_count == 0 {
            return Err(SwiptError::InvalidUserArray(
                "antenna count must be positive".into(),
            ));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(SwiptError::InvalidUserArray(format!(
                "antenna spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self {
            start,
            antenna_count,
            spacing,
        })
    }

    /// Array whose antenna centroid lies at `centroid`.
    pub fn centered_at(centroid: Point3, antenna_count: usize, spacing: f64) -> Result<Self> {
        let shift = (antenna_count as f64 + 1.0) / 2.0 * spacing;
        Self::new(
            Point3::new(centroid.x, centroid.y - shift, centroid.z),
            antenna_count,
            spacing,
        )
    }

    pub fn start(&self) -> Point3 {
        self.start
    }
    pub fn antenna_count(&self) -> usize {
        self.antenna_count
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn centroid(&self) -> Point3 {
        let mid = (self.antenna_count as f64 + 1.0) / 2.0;
        Point3::new(
            self.start.x,
            self.start.y + mid * self.spacing,
            self.start.z,
        )
    }
}

pub fn user_antenna_positions(user: &UserArraySpec) -> Vec<Point3> {
    (1..=user.antenna_count)
        .map(|m| {
            Point3::new(
                user.start.x,
                user.start.y + m as f64 * user.spacing,
                user.start.z,
            )
        })
        .collect()
}

/// Rayleigh distance `2 D² / λ0` of a panel with aperture diagonal `D`.
pub fn rayleigh_distance(panel: &IrsPanelSpec, wavelength: f64) -> f64 {
    let dx = (panel.n_x as f64 - 1.0) * panel.spacing;
    let dz = (panel.n_z as f64 - 1.0) * panel.spacing;
    2.0 * (dx * dx + dz * dz) / wavelength
}

/// Full deployment: AP at the origin, two panels and the user array.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGeometry {
    pub irs1: IrsPanelSpec,
    pub irs2: IrsPanelSpec,
    pub user: UserArraySpec,
}

impl SystemGeometry {
    pub const AP_POSITION: Point3 = Point3::ORIGIN;

    pub fn new(irs1: IrsPanelSpec, irs2: IrsPanelSpec, user: UserArraySpec) -> Result<Self> {
        let antennas = user_antenna_positions(&user);
        for (label, panel) in [("irs1", &irs1), ("irs2", &irs2)] {
            for p in element_positions(panel) {
                for a in &antennas {
                    if p.distance_to(a) < 1e-9 {
                        return Err(SwiptError::InvalidGeometry(format!(
                            "user antenna coincides with an element of {label}"
                        )));
                    }
                }
            }
        }
        Ok(Self { irs1, irs2, user })
    }

    pub fn ap_position(&self) -> Point3 {
        Self::AP_POSITION
    }
}

/// Panel footprint for the hybrid-field gain analysis. Unlike
/// [`IrsPanelSpec`] it accepts even element counts, placing elements at
/// centred half-integer offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aperture {
    pub l_x: f64,
    pub l_y: f64,
    pub n_x: usize,
    pub n_z: usize,
    pub spacing: f64,
    pub element_area: f64,
}

impl Aperture {
    pub fn validate(&self) -> Result<()> {
        if self.n_x == 0 || self.n_z == 0 {
            return Err(SwiptError::InvalidPanel("element counts must be positive".into()));
        }
        if !(self.spacing > 0.0) || !(self.element_area > 0.0) {
            return Err(SwiptError::InvalidPanel(
                "spacing and element area must be positive".into(),
            ));
        }
        if !(self.l_x > 0.0) {
            return Err(SwiptError::InvalidPanel(format!(
                "aperture analysis needs l_x > 0, got {}",
                self.l_x
            )));
        }
        Ok(())
    }

    /// `ξ = ε / l_x`.
    pub fn xi(&self) -> f64 {
        self.spacing / self.l_x
    }

    /// `r̄ = |l_y| / l_x`.
    pub fn r_bar(&self) -> f64 {
        self.l_y.abs() / self.l_x
    }

    pub fn with_counts(&self, n_x: usize, n_z: usize) -> Self {
        Self { n_x, n_z, ..*self }
    }
}
