//! Scenario description and its flat `key = value` config format.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::channel::{db_to_linear, FarFieldStats, InterferenceModel, Regime};
use crate::error::{Result, SwiptError};
use crate::geometry::{Aperture, IrsPanelSpec, Point3, SystemGeometry, UserArraySpec};
use crate::nearfield_opt::AoConfig;
use crate::receiver::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SchemeId {
    Proposed,
    EqualPs,
    RandomPhase,
    RandomPs,
    ComAlgorithm,
    SingleIrs,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::Proposed,
        SchemeId::EqualPs,
        SchemeId::RandomPhase,
        SchemeId::RandomPs,
        SchemeId::ComAlgorithm,
        SchemeId::SingleIrs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::EqualPs => "equal_ps",
            SchemeId::RandomPhase => "random_phase",
            SchemeId::RandomPs => "random_ps",
            SchemeId::ComAlgorithm => "com_algorithm",
            SchemeId::SingleIrs => "single_irs",
        }
    }

    pub fn valid_for(&self, regime: Regime) -> bool {
        *self != SchemeId::SingleIrs || regime == Regime::HybridField
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = SwiptError;
    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| SwiptError::InvalidParameter(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    None,
    QosRatio,
    SinrThresholdDb,
    InterferencePower,
    IrsApDistanceX,
    IrsApDistanceY,
    ElementsX,
    ElementsZ,
}

impl SweepVariable {
    const NAMES: [(SweepVariable, &'static str); 8] = [
        (SweepVariable::None, "none"),
        (SweepVariable::QosRatio, "qos_ratio"),
        (SweepVariable::SinrThresholdDb, "sinr_threshold_db"),
        (SweepVariable::InterferencePower, "interference_power"),
        (SweepVariable::IrsApDistanceX, "irs_ap_distance_x"),
        (SweepVariable::IrsApDistanceY, "irs_ap_distance_y"),
        (SweepVariable::ElementsX, "elements_x"),
        (SweepVariable::ElementsZ, "elements_z"),
    ];

    pub fn as_str(&self) -> &'static str {
        Self::NAMES.iter().find(|(v, _)| v == self).map(|(_, n)| *n).unwrap_or("none")
    }
}

impl FromStr for SweepVariable {
    type Err = SwiptError;
    fn from_str(s: &str) -> Result<Self> {
        Self::NAMES
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(v, _)| *v)
            .ok_or_else(|| SwiptError::InvalidParameter(format!("unknown sweep variable '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Everything needed to run a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub regime: Regime,
    pub wavelength: f64,
    pub element_spacing: f64,
    pub element_area: f64,
    /// Per-panel element counts.
    pub elements_x: usize,
    pub elements_z: usize,
    /// IRS1 sits at `(x, y, 0)`, IRS2 at `(x, −y, 0)`.
    pub irs_ap_distance_x: f64,
    pub irs_ap_distance_y: f64,
    pub user_center: Point3,
    /// Radius of the x–z disk the user centroid is drawn from.
    pub user_radius: f64,
    pub antennas: usize,
    pub antenna_spacing: f64,
    pub transmit_power: f64,
    pub interference_power: f64,
    pub antenna_noise: f64,
    pub id_noise: f64,
    pub efficiency: f64,
    /// Linear SINR threshold `γ0`.
    pub sinr_threshold: f64,
    /// Reference `γ̄0` for the QoS ratio `τ = γ0 / γ̄0`.
    pub sinr_reference: f64,
    pub irs_user_path_loss_exponent: f64,
    pub irs_user_reference_gain: f64,
    pub interference: InterferenceModel,
    pub sweep: Sweep,
    pub trials: usize,
    pub master_seed: u64,
    pub schemes: Vec<SchemeId>,
    pub ao: AoConfig,
    /// Tolerance of the equal-splitting bisection.
    pub equal_ps_tolerance: f64,
    /// Draws allowed for the random-splitting baseline.
    pub random_ps_attempts: usize,
}

impl Scenario {
    /// Defaults of the near-field experiments.
    pub fn near_field() -> Self {
        Self {
            regime: Regime::NearField,
            wavelength: 0.4,
            element_spacing: 0.2,
            element_area: 0.04,
            elements_x: 11,
            elements_z: 11,
            irs_ap_distance_x: 1.0,
            irs_ap_distance_y: 1.0,
            user_center: Point3::new(8.0, 0.0, -2.0),
            user_radius: 1.0,
            antennas: 5,
            antenna_spacing: 0.2,
            transmit_power: 1.0,
            interference_power: 1.0,
            antenna_noise: db_to_linear(-58.0),
            id_noise: db_to_linear(-58.0),
            efficiency: 0.9,
            sinr_threshold: 10.0,
            sinr_reference: 10.0,
            irs_user_path_loss_exponent: 1.6,
            irs_user_reference_gain: db_to_linear(-20.0),
            interference: InterferenceModel {
                position: Point3::new(100.0, 100.0, 0.0),
                reference_gain: db_to_linear(-20.0),
                path_loss_exponent: 2.0,
            },
            sweep: Sweep {
                variable: SweepVariable::None,
                values: vec![0.0],
            },
            trials: 50,
            master_seed: 0,
            schemes: vec![
                SchemeId::Proposed,
                SchemeId::EqualPs,
                SchemeId::RandomPhase,
                SchemeId::RandomPs,
                SchemeId::ComAlgorithm,
            ],
            ao: AoConfig::default(),
            equal_ps_tolerance: 1e-8,
            random_ps_attempts: 100,
        }
    }

    /// Defaults of the hybrid-field experiments.
    pub fn hybrid_field() -> Self {
        Self {
            regime: Regime::HybridField,
            user_center: Point3::new(45.0, 0.0, -2.0),
            transmit_power: 10.0,
            trials: 200,
            schemes: vec![
                SchemeId::Proposed,
                SchemeId::EqualPs,
                SchemeId::RandomPs,
                SchemeId::SingleIrs,
            ],
            ..Self::near_field()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.panels()?;
        UserArraySpec::centered_at(self.user_center, self.antennas, self.antenna_spacing)?;
        if !(self.wavelength > 0.0) || !(self.user_radius >= 0.0) {
            return Err(SwiptError::InvalidParameter(
                "wavelength must be positive and user radius non-negative".into(),
            ));
        }
        if self.trials == 0 {
            return Err(SwiptError::InvalidParameter("trials must be at least 1".into()));
        }
        if self.sweep.values.is_empty()
            || self.sweep.values.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(SwiptError::InvalidParameter(
                "sweep values must be non-empty and strictly increasing".into(),
            ));
        }
        if let Some(s) = self.schemes.iter().find(|s| !s.valid_for(self.regime)) {
            return Err(SwiptError::InvalidParameter(format!(
                "scheme {s} needs the hybrid-field regime"
            )));
        }
        for &v in &self.sweep.values {
            let at = self.at(v)?;
            at.params()?;
            at.panels()?;
        }
        self.ao.validate()
    }

    /// Copy with the sweep variable set to `value`.
    pub fn at(&self, value: f64) -> Result<Scenario> {
        let mut s = self.clone();
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(SwiptError::InvalidParameter(format!(
                    "element count must be a positive integer, got {v}"
                )))
            }
        };
        match self.sweep.variable {
            SweepVariable::None => {}
            SweepVariable::QosRatio => s.sinr_threshold = value * self.sinr_reference,
            SweepVariable::SinrThresholdDb => s.sinr_threshold = db_to_linear(value),
            SweepVariable::InterferencePower => s.interference_power = value,
            SweepVariable::IrsApDistanceX => s.irs_ap_distance_x = value,
            SweepVariable::IrsApDistanceY => s.irs_ap_distance_y = value,
            SweepVariable::ElementsX => s.elements_x = count(value)?,
            SweepVariable::ElementsZ => s.elements_z = count(value)?,
        }
        Ok(s)
    }

    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(
            self.transmit_power,
            self.interference_power,
            self.antenna_noise,
            self.id_noise,
            self.efficiency,
            self.sinr_threshold,
        )
    }

    fn panel_center(&self, sign: f64) -> Point3 {
        Point3::new(self.irs_ap_distance_x, sign * self.irs_ap_distance_y, 0.0)
    }

    /// Both panels. Only the near-field regime needs odd element counts.
    pub fn panels(&self) -> Result<(Aperture, Aperture)> {
        let ap = |sign: f64| -> Result<Aperture> {
            let a = Aperture {
                l_x: self.irs_ap_distance_x,
                l_y: sign * self.irs_ap_distance_y,
                n_x: self.elements_x,
                n_z: self.elements_z,
                spacing: self.element_spacing,
                element_area: self.element_area,
            };
            a.validate()?;
            Ok(a)
        };
        if self.regime == Regime::NearField {
            self.panel_spec(1.0)?;
            self.panel_spec(-1.0)?;
        }
        Ok((ap(1.0)?, ap(-1.0)?))
    }

    fn panel_spec(&self, sign: f64) -> Result<IrsPanelSpec> {
        IrsPanelSpec::new(
            self.panel_center(sign),
            self.elements_x,
            self.elements_z,
            self.element_spacing,
            self.element_area,
        )
    }

    /// Deployment with the user centroid at `centroid`.
    pub fn geometry(&self, centroid: Point3) -> Result<SystemGeometry> {
        SystemGeometry::new(
            self.panel_spec(1.0)?,
            self.panel_spec(-1.0)?,
            UserArraySpec::centered_at(centroid, self.antennas, self.antenna_spacing)?,
        )
    }

    /// Rayleigh statistics of the hop from a panel centred at `panel` to a
    /// user centred at `centroid`.
    pub fn far_stats(&self, panel: Point3, centroid: Point3) -> Result<FarFieldStats> {
        FarFieldStats::new(
            self.irs_user_path_loss_exponent,
            self.irs_user_reference_gain,
            panel.distance_to(&centroid),
        )
    }

    pub fn irs_centers(&self) -> (Point3, Point3) {
        (self.panel_center(1.0), self.panel_center(-1.0))
    }

    /// Parses a config file. The `regime` key selects the defaults that the
    /// remaining keys override.
    pub fn from_config(text: &str) -> Result<Scenario> {
        let entries = parse_pairs(text)?;
        let mut s = match entries.get("regime") {
            None => Scenario::near_field(),
            Some((line, v)) => match v.as_str() {
                "near" | "near_field" => Scenario::near_field(),
                "hybrid" | "hybrid_field" => Scenario::hybrid_field(),
                other => return Err(config_err(*line, format!("unknown regime '{other}'"))),
            },
        };
        if entries.contains_key("qos_ratio") && entries.contains_key("sinr_threshold_db") {
            return Err(config_err(
                entries["sinr_threshold_db"].0,
                "set either qos_ratio or sinr_threshold_db, not both".into(),
            ));
        }
        let mut qos_ratio = None;
        for (key, (line, value)) in &entries {
            let line = *line;
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| config_err(line, format!("'{key}' needs a number, got '{value}'")))
            };
            let int = || -> Result<u64> {
                value
                    .parse::<u64>()
                    .map_err(|_| config_err(line, format!("'{key}' needs an integer, got '{value}'")))
            };
            match key.as_str() {
                "regime" => {}
                "wavelength" => s.wavelength = num()?,
                "element_spacing" => s.element_spacing = num()?,
                "element_area" => s.element_area = num()?,
                "elements_x" => s.elements_x = int()? as usize,
                "elements_z" => s.elements_z = int()? as usize,
                "irs_ap_distance_x" => s.irs_ap_distance_x = num()?,
                "irs_ap_distance_y" => s.irs_ap_distance_y = num()?,
                "user_center_x" => s.user_center.x = num()?,
                "user_center_y" => s.user_center.y = num()?,
                "user_center_z" => s.user_center.z = num()?,
                "user_radius" => s.user_radius = num()?,
                "antennas" => s.antennas = int()? as usize,
                "antenna_spacing" => s.antenna_spacing = num()?,
                "transmit_power" => s.transmit_power = num()?,
                "transmit_power_db" => s.transmit_power = db_to_linear(num()?),
                "interference_power" => s.interference_power = num()?,
                "interference_power_db" => s.interference_power = db_to_linear(num()?),
                "antenna_noise" => s.antenna_noise = num()?,
                "antenna_noise_db" => s.antenna_noise = db_to_linear(num()?),
                "id_noise" => s.id_noise = num()?,
                "id_noise_db" => s.id_noise = db_to_linear(num()?),
                "efficiency" => s.efficiency = num()?,
                "qos_ratio" => qos_ratio = Some(num()?),
                "sinr_threshold_db" => s.sinr_threshold = db_to_linear(num()?),
                "sinr_reference_db" => s.sinr_reference = db_to_linear(num()?),
                "irs_user_path_loss_exponent" => s.irs_user_path_loss_exponent = num()?,
                "irs_user_reference_gain_db" => s.irs_user_reference_gain = db_to_linear(num()?),
                "interferer_x" => s.interference.position.x = num()?,
                "interferer_y" => s.interference.position.y = num()?,
                "interferer_z" => s.interference.position.z = num()?,
                "interference_reference_gain_db" => {
                    s.interference.reference_gain = db_to_linear(num()?)
                }
                "interference_path_loss_exponent" => s.interference.path_loss_exponent = num()?,
                "sweep_variable" => {
                    s.sweep.variable = value.parse().map_err(|e: SwiptError| config_err(line, e.to_string()))?
                }
                "sweep_values" => {
                    s.sweep.values = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| config_err(line, format!("bad sweep values '{value}'")))?
                }
                "trials" => s.trials = int()? as usize,
                "master_seed" => s.master_seed = int()?,
                "schemes" => {
                    s.schemes = value
                        .split(',')
                        .map(|v| v.trim().parse())
                        .collect::<Result<_>>()
                        .map_err(|e| config_err(line, e.to_string()))?
                }
                "ao_max_outer_iters" => s.ao.max_outer_iters = int()? as usize,
                "ao_convergence_threshold" => s.ao.convergence_threshold = num()?,
                "sdp_max_iters" => s.ao.sdp.max_iters = int()? as usize,
                "randomizations" => s.ao.penalty.randomizations = int()? as usize,
                "equal_ps_tolerance" => s.equal_ps_tolerance = num()?,
                "random_ps_attempts" => s.random_ps_attempts = int()? as usize,
                _ => return Err(config_err(line, format!("unknown key '{key}'"))),
            }
        }
        if let Some(tau) = qos_ratio {
            s.sinr_threshold = tau * s.sinr_reference;
        }
        if s.sweep.variable == SweepVariable::None && !entries.contains_key("sweep_values") {
            s.sweep.values = vec![0.0];
        }
        s.validate()?;
        Ok(s)
    }
}

fn config_err(line: usize, message: String) -> SwiptError {
    SwiptError::Config { line, message }
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(config_err(line, "empty key".into()));
        }
        if out.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(config_err(line, format!("duplicate key '{key}'")));
        }
    }
    Ok(out)
}
