//! Monte Carlo experiment driver.
//!
//! Every `(sweep point, trial)` cell draws one user position and one
//! interference channel, then runs each requested scheme on that same
//! realization. Environment draws depend on `(master seed, trial)` only, so
//! neighbouring sweep points see the same users and interference.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{hybrid_gain_numeric, near_field_channels, ChannelSet, Regime};
use crate::error::{Result, SwiptError};
use crate::geometry::{Aperture, Point3};
use crate::hybridfield::{equal_ps_hybrid, solve_hybrid_ps};
use crate::linalg::CVector;
use crate::nearfield_opt::{
    alternating_optimize, cophasing_init, equal_ps, single_pass, solve_ps_subproblem, PhaseConfig,
    SolveStatus,
};
use crate::receiver::{
    harvested_power_hybrid, harvested_power_near, hybrid_average_sinr, mmse_sinr, PsVector,
};
use crate::channel::combined_channel_near;
use crate::rng::{StreamTag, TrialKey};

pub mod gain;
pub mod output;
pub mod scenario;
pub mod validate;

pub use gain::{free_space_gain, gain_sweep, GainAxis, GainRow};
pub use output::{format_float, summarize, write_csv, write_summary, CellSummary, CSV_HEADER};
pub use scenario::{Scenario, SchemeId, Sweep, SweepVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Converged,
    MaxIters,
    Infeasible,
    /// The realization itself was unusable, e.g. a user behind a panel.
    Error,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Converged => "converged",
            RowStatus::MaxIters => "max_iters",
            RowStatus::Infeasible => "infeasible",
            RowStatus::Error => "error",
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, RowStatus::Converged | RowStatus::MaxIters)
    }
}

impl From<SolveStatus> for RowStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Converged => RowStatus::Converged,
            SolveStatus::MaxIters => RowStatus::MaxIters,
            SolveStatus::Infeasible => RowStatus::Infeasible,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: SchemeId,
    pub sweep_variable: SweepVariable,
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trial: usize,
    /// NaN unless the status is feasible.
    pub harvested_power_w: f64,
    pub sinr_linear: f64,
    pub status: RowStatus,
    /// `None` when timing is disabled, which keeps output reproducible.
    pub wall_ms: Option<f64>,
}

/// One channel draw shared by all schemes of a cell.
#[derive(Debug, Clone)]
pub enum Realization {
    Near {
        set: ChannelSet,
    },
    /// Average combined gains of both panels and of the single extended
    /// panel, plus the interference channel.
    Hybrid {
        gain_a: f64,
        gain_b: f64,
        gain_single: f64,
        f: CVector,
    },
}

/// Uniform draw from the x–z disk around the configured user centre.
pub fn user_centroid(scenario: &Scenario, key: TrialKey) -> Point3 {
    let mut rng = TrialKey::new(key.master_seed, 0, key.trial).rng(StreamTag::UserPosition);
    let r = scenario.user_radius * rng.random::<f64>().sqrt();
    let phi = TAU * rng.random::<f64>();
    let c = scenario.user_center;
    Point3::new(c.x + r * phi.cos(), c.y, c.z + r * phi.sin())
}

/// Builds the realization of one cell; `scenario` is already at the sweep
/// point.
pub fn realize(scenario: &Scenario, key: TrialKey) -> Result<Realization> {
    let centroid = user_centroid(scenario, key);
    let user = crate::geometry::UserArraySpec::centered_at(
        centroid,
        scenario.antennas,
        scenario.antenna_spacing,
    )?;
    let mut rng = TrialKey::new(key.master_seed, 0, key.trial).rng(StreamTag::Interference);
    let f = scenario.interference.sample(&user, &mut rng)?;
    match scenario.regime {
        Regime::NearField => {
            let geo = scenario.geometry(centroid)?;
            Ok(Realization::Near {
                set: near_field_channels(&geo, scenario.wavelength, f)?,
            })
        }
        Regime::HybridField => {
            let (ap_a, ap_b) = scenario.panels()?;
            let (ca, cb) = scenario.irs_centers();
            let gain = |ap: &Aperture, c: Point3| -> Result<f64> {
                Ok(hybrid_gain_numeric(ap, &scenario.far_stats(c, centroid)?))
            };
            let single = Aperture {
                n_x: 2 * ap_a.n_x,
                ..ap_a
            };
            Ok(Realization::Hybrid {
                gain_a: gain(&ap_a, ca)?,
                gain_b: gain(&ap_b, cb)?,
                gain_single: gain(&single, ca)?,
                f,
            })
        }
    }
}

#[derive(Clone, Copy)]
struct Outcome {
    harvested: f64,
    sinr: f64,
    status: RowStatus,
}

impl Outcome {
    fn infeasible(sinr: f64) -> Self {
        Self {
            harvested: f64::NAN,
            sinr,
            status: RowStatus::Infeasible,
        }
    }

    fn error() -> Self {
        Self {
            harvested: f64::NAN,
            sinr: f64::NAN,
            status: RowStatus::Error,
        }
    }
}

fn from_result(r: Result<Outcome>) -> Outcome {
    match r {
        Ok(o) => o,
        Err(SwiptError::Infeasible(_)) => Outcome::infeasible(f64::NAN),
        Err(_) => Outcome::error(),
    }
}

/// Per-cell state reused across schemes: the proposed design's phases.
#[derive(Default)]
struct CellCache {
    proposed: Option<(Outcome, PhaseConfig)>,
}

fn proposed_near(set: &ChannelSet, scenario: &Scenario, cache: &mut CellCache) -> Result<PhaseConfig> {
    if let Some((_, p)) = &cache.proposed {
        return Ok(p.clone());
    }
    let params = scenario.params()?;
    let init = cophasing_init(set)?;
    let (outcome, phases) = match alternating_optimize(set, &params, &scenario.ao, &init) {
        Ok(rep) => (
            Outcome {
                harvested: rep.harvested_power,
                sinr: rep.sinr_achieved,
                status: rep.status.into(),
            },
            rep.phases,
        ),
        Err(SwiptError::Infeasible(_)) => (Outcome::infeasible(f64::NAN), init),
        Err(e) => return Err(e),
    };
    cache.proposed = Some((outcome, phases.clone()));
    Ok(phases)
}

fn run_near(
    scheme: SchemeId,
    set: &ChannelSet,
    scenario: &Scenario,
    key: TrialKey,
    cache: &mut CellCache,
) -> Result<Outcome> {
    let params = scenario.params()?;
    let ps_outcome = |phases: &PhaseConfig| -> Result<Outcome> {
        let g = combined_channel_near(set, phases)?;
        let sol = solve_ps_subproblem(&g, &set.f, &params, &scenario.ao.fpi, &scenario.ao.multiplier)?;
        Ok(match sol.status {
            SolveStatus::Infeasible => Outcome::infeasible(sol.sinr),
            s => Outcome {
                harvested: sol.harvested_power,
                sinr: sol.sinr,
                status: s.into(),
            },
        })
    };
    match scheme {
        SchemeId::Proposed => {
            proposed_near(set, scenario, cache)?;
            let (o, _) = cache.proposed.as_ref().expect("cached above");
            Ok(*o)
        }
        SchemeId::EqualPs => {
            let phases = proposed_near(set, scenario, cache)?;
            let g = combined_channel_near(set, &phases)?;
            Ok(match equal_ps(&g, &set.f, &params, scenario.equal_ps_tolerance)? {
                Some(sol) => Outcome {
                    harvested: sol.harvested_power,
                    sinr: sol.sinr,
                    status: RowStatus::Converged,
                },
                None => Outcome::infeasible(mmse_sinr(&g, &set.f, &PsVector::ones(g.len()), &params)?),
            })
        }
        SchemeId::RandomPhase => {
            let mut rng = key.rng(StreamTag::RandomPhase);
            let theta_a = (0..set.n_a()).map(|_| TAU * rng.random::<f64>()).collect();
            let theta_b = (0..set.n_b()).map(|_| TAU * rng.random::<f64>()).collect();
            ps_outcome(&PhaseConfig::new(theta_a, theta_b)?)
        }
        SchemeId::RandomPs => {
            let phases = proposed_near(set, scenario, cache)?;
            let g = combined_channel_near(set, &phases)?;
            let mut rng = key.rng(StreamTag::RandomPs);
            let mut best = f64::NAN;
            for _ in 0..scenario.random_ps_attempts {
                let rho = PsVector::clamped((0..g.len()).map(|_| rng.random::<f64>()).collect());
                let sinr = mmse_sinr(&g, &set.f, &rho, &params)?;
                if sinr >= params.sinr_threshold {
                    return Ok(Outcome {
                        harvested: harvested_power_near(&g, &set.f, &rho, &params)?,
                        sinr,
                        status: RowStatus::Converged,
                    });
                }
                best = best.max(sinr);
            }
            Ok(Outcome::infeasible(best))
        }
        SchemeId::ComAlgorithm => {
            let init = cophasing_init(set)?;
            let rep = single_pass(set, &params, &scenario.ao, &init)?;
            Ok(Outcome {
                harvested: rep.harvested_power,
                sinr: rep.sinr_achieved,
                status: rep.status.into(),
            })
        }
        SchemeId::SingleIrs => Err(SwiptError::InvalidParameter(
            "single_irs needs the hybrid-field regime".into(),
        )),
    }
}

fn run_hybrid(
    scheme: SchemeId,
    gain_a: f64,
    gain_b: f64,
    gain_single: f64,
    f: &CVector,
    scenario: &Scenario,
    key: TrialKey,
) -> Result<Outcome> {
    let params = scenario.params()?;
    let solved = |ga: f64, gb: f64| -> Result<Outcome> {
        let sol = solve_hybrid_ps(ga, gb, f, &params)?;
        Ok(Outcome {
            harvested: sol.harvested_power,
            sinr: sol.sinr,
            status: RowStatus::Converged,
        })
    };
    match scheme {
        // Average gains do not depend on the phases.
        SchemeId::Proposed | SchemeId::RandomPhase | SchemeId::ComAlgorithm => solved(gain_a, gain_b),
        SchemeId::SingleIrs => solved(gain_single, 0.0),
        SchemeId::EqualPs => {
            let sol = equal_ps_hybrid(gain_a, gain_b, f, &params)?;
            Ok(Outcome {
                harvested: sol.harvested_power,
                sinr: sol.sinr,
                status: RowStatus::Converged,
            })
        }
        SchemeId::RandomPs => {
            let mut rng = key.rng(StreamTag::RandomPs);
            let mut best = f64::NAN;
            for _ in 0..scenario.random_ps_attempts {
                let rho = PsVector::clamped((0..f.len()).map(|_| rng.random::<f64>()).collect());
                let sinr = hybrid_average_sinr(gain_a, gain_b, f, &rho, &params)?;
                if sinr >= params.sinr_threshold {
                    return Ok(Outcome {
                        harvested: harvested_power_hybrid(gain_a, gain_b, f, &rho, &params)?,
                        sinr,
                        status: RowStatus::Converged,
                    });
                }
                best = best.max(sinr);
            }
            Ok(Outcome::infeasible(best))
        }
    }
}

fn run_one(
    scheme: SchemeId,
    realization: &Realization,
    scenario: &Scenario,
    key: TrialKey,
    cache: &mut CellCache,
) -> Outcome {
    from_result(match realization {
        Realization::Near { set } => run_near(scheme, set, scenario, key, cache),
        Realization::Hybrid {
            gain_a,
            gain_b,
            gain_single,
            f,
        } => run_hybrid(scheme, *gain_a, *gain_b, *gain_single, f, scenario, key),
    })
}

fn row(
    scheme: SchemeId,
    scenario: &Scenario,
    key: TrialKey,
    sweep_value: f64,
    o: Outcome,
    wall_ms: Option<f64>,
) -> ResultRow {
    let feasible = o.status.is_feasible();
    ResultRow {
        scheme,
        sweep_variable: scenario.sweep.variable,
        sweep_index: key.sweep_index as usize,
        sweep_value,
        trial: key.trial as usize,
        harvested_power_w: if feasible { o.harvested } else { f64::NAN },
        sinr_linear: o.sinr,
        status: o.status,
        wall_ms,
    }
}

/// Runs one scheme on one realization. `scenario` is already at the sweep
/// point `sweep_value`.
pub fn run_scheme(
    scheme: SchemeId,
    realization: &Realization,
    scenario: &Scenario,
    key: TrialKey,
    sweep_value: f64,
) -> ResultRow {
    let start = Instant::now();
    let o = run_one(scheme, realization, scenario, key, &mut CellCache::default());
    let ms = start.elapsed().as_secs_f64() * 1e3;
    row(scheme, scenario, key, sweep_value, o, Some(ms))
}

/// All schemes of one `(sweep point, trial)` cell on a shared realization.
pub fn run_cell(
    scenario: &Scenario,
    sweep_index: usize,
    trial: usize,
    timing: bool,
) -> Result<Vec<ResultRow>> {
    let value = scenario.sweep.values[sweep_index];
    let at = scenario.at(value)?;
    let key = TrialKey::new(scenario.master_seed, sweep_index as u64, trial as u64);
    let realization = realize(&at, key);
    let mut cache = CellCache::default();
    let mut rows = Vec::with_capacity(scenario.schemes.len());
    for &scheme in &scenario.schemes {
        let start = Instant::now();
        let o = match &realization {
            Ok(r) => run_one(scheme, r, &at, key, &mut cache),
            Err(_) => Outcome::error(),
        };
        let ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        rows.push(row(scheme, &at, key, value, o, ms));
    }
    Ok(rows)
}

/// Runs every cell of the sweep in parallel. Rows come back sorted by
/// sweep point, trial and scheme.
pub fn run_sweep(scenario: &Scenario, timing: bool) -> Result<Vec<ResultRow>> {
    scenario.validate()?;
    let cells: Vec<(usize, usize)> = (0..scenario.sweep.values.len())
        .flat_map(|s| (0..scenario.trials).map(move |t| (s, t)))
        .collect();
    let mut rows: Vec<ResultRow> = cells
        .par_iter()
        .map(|&(s, t)| run_cell(scenario, s, t, timing))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        (a.sweep_index, a.trial, a.scheme).cmp(&(b.sweep_index, b.trial, b.scheme))
    });
    Ok(rows)
}

/// [`run_sweep`] on a dedicated pool of `jobs` workers.
pub fn run_sweep_with_jobs(scenario: &Scenario, timing: bool, jobs: usize) -> Result<Vec<ResultRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SwiptError::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(scenario, timing))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_near() -> Scenario {
        let mut s = Scenario::near_field();
        s.elements_x = 3;
        s.elements_z = 3;
        s.sinr_threshold = 0.5;
        s.trials = 3;
        s
    }

    #[test]
    fn centroids_stay_in_disk() {
        let s = Scenario::near_field();
        for t in 0..200 {
            let c = user_centroid(&s, TrialKey::new(9, 0, t));
            let d = ((c.x - 8.0).powi(2) + (c.z + 2.0).powi(2)).sqrt();
            assert!(d <= 1.0 && c.y == 0.0);
        }
    }

    #[test]
    fn environment_shared_across_sweep_points() {
        let s = Scenario::hybrid_field();
        let a = user_centroid(&s, TrialKey::new(3, 0, 5));
        let b = user_centroid(&s, TrialKey::new(3, 4, 5));
        assert_eq!(a, b);
    }

    #[test]
    fn near_cell_runs_all_schemes() {
        let s = desk_near();
        let rows = run_cell(&s, 0, 0, false).unwrap();
        assert_eq!(rows.len(), 5);
        let q = |id: SchemeId| rows.iter().find(|r| r.scheme == id).unwrap().harvested_power_w;
        for r in &rows {
            assert!(r.status.is_feasible(), "{r:?}");
            assert!(r.wall_ms.is_none());
        }
        assert!(q(SchemeId::Proposed) >= q(SchemeId::EqualPs));
        assert!(q(SchemeId::Proposed) >= q(SchemeId::RandomPs));
    }

    #[test]
    fn hybrid_cell_orders_schemes() {
        let mut s = Scenario::hybrid_field();
        s.trials = 1;
        let rows = run_cell(&s, 0, 0, true).unwrap();
        let q = |id: SchemeId| rows.iter().find(|r| r.scheme == id).unwrap().harvested_power_w;
        assert!(q(SchemeId::Proposed) >= q(SchemeId::EqualPs));
        assert!(q(SchemeId::Proposed) >= q(SchemeId::SingleIrs));
        assert!(rows.iter().all(|r| r.wall_ms.is_some()));
    }

    #[test]
    fn infeasible_rows_not_errors() {
        let mut s = desk_near();
        s.sinr_threshold = 1e9;
        let rows = run_cell(&s, 0, 0, false).unwrap();
        assert!(rows.iter().all(|r| r.status == RowStatus::Infeasible));
        assert!(rows.iter().all(|r| r.harvested_power_w.is_nan()));
    }

    #[test]
    fn sweep_is_sorted_and_deterministic() {
        let mut s = desk_near();
        s.sweep = Sweep {
            variable: SweepVariable::QosRatio,
            values: vec![0.02, 0.05],
        };
        s.schemes = vec![SchemeId::RandomPs, SchemeId::Proposed];
        let a = run_sweep(&s, false).unwrap();
        let b = run_sweep_with_jobs(&s, false, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 3 * 2);
        assert_eq!(a[0].scheme, SchemeId::Proposed);
        assert!(a.windows(2).all(|w| (w[0].sweep_index, w[0].trial) <= (w[1].sweep_index, w[1].trial)));
    }
}
