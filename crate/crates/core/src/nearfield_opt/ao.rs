//! Alternating optimization over (splitting, combiner) and phases.

use crate::channel::{combined_channel_near, ChannelSet, Regime};
use crate::error::{Result, SwiptError};
use crate::linalg::CVector;
use crate::receiver::{mmse_beamformer, mmse_sinr, PsVector, SystemParams};

use super::phase::{optimize_phases, PhaseProblem};
use super::ps::{solve_ps_subproblem, PsSolution};
use super::{AoConfig, PhaseConfig, SolveReport, SolveStatus};

/// Phases that co-phase every reflected path at the user antenna with the
/// strongest coherent combined channel.
pub fn cophasing_init(set: &ChannelSet) -> Result<PhaseConfig> {
    set.validate()?;
    let m = set.antenna_count();
    let strength = |row: usize| -> f64 {
        (0..set.n_a())
            .map(|k| (set.g_a[(row, k)] * set.h_a[k]).norm())
            .chain((0..set.n_b()).map(|k| (set.g_b[(row, k)] * set.h_b[k]).norm()))
            .sum()
    };
    let best = (0..m)
        .map(|row| (row, strength(row)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
        .0;
    PhaseConfig::new(
        (0..set.n_a())
            .map(|k| -(set.g_a[(best, k)] * set.h_a[k]).arg())
            .collect(),
        (0..set.n_b())
            .map(|k| -(set.g_b[(best, k)] * set.h_b[k]).arg())
            .collect(),
    )
}

fn check_near(set: &ChannelSet, params: &SystemParams, cfg: &AoConfig) -> Result<()> {
    if set.regime != Regime::NearField {
        return Err(SwiptError::InvalidParameter(
            "alternating optimization needs a near-field channel set".into(),
        ));
    }
    set.validate()?;
    params.validate()?;
    cfg.validate()
}

fn ps_at(
    set: &ChannelSet,
    phases: &PhaseConfig,
    params: &SystemParams,
    cfg: &AoConfig,
) -> Result<(CVector, PsSolution)> {
    let g = combined_channel_near(set, phases)?;
    let sol = solve_ps_subproblem(&g, &set.f, params, &cfg.fpi, &cfg.multiplier)?;
    Ok((g, sol))
}

fn infeasible(sol: &PsSolution) -> SwiptError {
    SwiptError::Infeasible(format!(
        "SINR {:.4e} at full splitting is below the threshold",
        sol.sinr
    ))
}

#[allow(clippy::too_many_arguments)]
fn report(
    g: &CVector,
    f: &CVector,
    sol: PsSolution,
    phases: PhaseConfig,
    params: &SystemParams,
    trace: Vec<f64>,
    status: SolveStatus,
    rejected: usize,
) -> Result<SolveReport> {
    let beamformer = mmse_beamformer(g, f, &sol.rho, params)?;
    Ok(SolveReport {
        harvested_power: sol.harvested_power,
        rho: sol.rho,
        beamformer,
        phases,
        sinr_achieved: sol.sinr,
        iterate_trace: trace,
        status,
        rejected_phase_steps: rejected,
    })
}

/// Alternates the splitting subproblem and the DC phase step until the
/// fractional gain in harvested power drops below the threshold. Phase
/// updates that would lower the objective are rejected.
pub fn alternating_optimize(
    set: &ChannelSet,
    params: &SystemParams,
    cfg: &AoConfig,
    init: &PhaseConfig,
) -> Result<SolveReport> {
    check_near(set, params, cfg)?;
    let mut phases = init.clone();
    let (mut g, mut sol) = ps_at(set, &phases, params, cfg)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(infeasible(&sol));
    }
    let mut trace = vec![sol.harvested_power];
    let mut status = SolveStatus::MaxIters;
    let mut rejected = 0;
    for _ in 0..cfg.max_outer_iters {
        let q_old = sol.harvested_power;
        let w = mmse_beamformer(&g, &set.f, &sol.rho, params)?;
        let problem = PhaseProblem::new(set, &sol.rho, &w, params)?;
        let candidate = match optimize_phases(&problem, &cfg.penalty, &cfg.sdp) {
            Ok(step) if step.feasible => Some(step.phases),
            Ok(_) | Err(SwiptError::Infeasible(_)) => None,
            Err(e) => return Err(e),
        };
        let mut improved = false;
        if let Some(p) = candidate {
            let (g_new, sol_new) = ps_at(set, &p, params, cfg)?;
            if sol_new.status != SolveStatus::Infeasible && sol_new.harvested_power >= q_old {
                phases = p;
                g = g_new;
                sol = sol_new;
                improved = true;
            }
        }
        if !improved {
            rejected += 1;
        }
        trace.push(sol.harvested_power);
        if (sol.harvested_power - q_old) / q_old.abs().max(f64::MIN_POSITIVE)
            < cfg.convergence_threshold
        {
            status = SolveStatus::Converged;
            break;
        }
    }
    if sol.status == SolveStatus::MaxIters {
        status = SolveStatus::MaxIters;
    }
    report(&g, &set.f, sol, phases, params, trace, status, rejected)
}

/// One splitting step followed by one phase step; the objective is
/// evaluated at the new phases with the first splitting vector kept.
pub fn single_pass(
    set: &ChannelSet,
    params: &SystemParams,
    cfg: &AoConfig,
    init: &PhaseConfig,
) -> Result<SolveReport> {
    check_near(set, params, cfg)?;
    let (g0, sol) = ps_at(set, init, params, cfg)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(infeasible(&sol));
    }
    let q0 = sol.harvested_power;
    let w = mmse_beamformer(&g0, &set.f, &sol.rho, params)?;
    let problem = PhaseProblem::new(set, &sol.rho, &w, params)?;
    let mut phases = init.clone();
    let mut rejected = 0;
    match optimize_phases(&problem, &cfg.penalty, &cfg.sdp) {
        Ok(step) if step.feasible && step.objective >= q0 => phases = step.phases,
        Ok(_) | Err(SwiptError::Infeasible(_)) => rejected = 1,
        Err(e) => return Err(e),
    }
    let g = combined_channel_near(set, &phases)?;
    let rho: PsVector = sol.rho.clone();
    let harvested = crate::receiver::harvested_power_near(&g, &set.f, &rho, params)?;
    let sinr = mmse_sinr(&g, &set.f, &rho, params)?;
    let sol = PsSolution {
        harvested_power: harvested,
        sinr,
        ..sol
    };
    let status = if sol.status == SolveStatus::MaxIters {
        SolveStatus::MaxIters
    } else {
        SolveStatus::Converged
    };
    report(&g, &set.f, sol, phases, params, vec![q0, harvested], status, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{combined_channel, near_field_channels};
    use crate::geometry::{IrsPanelSpec, Point3, SystemGeometry, UserArraySpec};
    use num_complex::Complex64;

    fn small_set(n: usize) -> ChannelSet {
        let irs1 = IrsPanelSpec::new(Point3::new(1.0, 1.0, 0.0), n, n, 0.2, 0.04).unwrap();
        let irs2 = IrsPanelSpec::new(Point3::new(1.0, -1.0, 0.0), n, n, 0.2, 0.04).unwrap();
        let user = UserArraySpec::centered_at(Point3::new(8.0, 0.0, -2.0), 5, 0.2).unwrap();
        let geo = SystemGeometry::new(irs1, irs2, user).unwrap();
        let f = CVector::from_fn(5, |i, _| Complex64::new(4e-4 * (i as f64 + 1.0), -3e-4));
        near_field_channels(&geo, 0.4, f).unwrap()
    }

    fn params() -> SystemParams {
        SystemParams::new(1.0, 1.0, 1.585e-6, 1.585e-6, 0.9, 0.5).unwrap()
    }

    #[test]
    fn cophasing_aligns_strongest_antenna() {
        let set = small_set(3);
        let p = cophasing_init(&set).unwrap();
        let g = combined_channel(&set, &p).unwrap();
        let g0 = combined_channel(&set, &PhaseConfig::zeros(9, 9)).unwrap();
        assert!(g.norm() > g0.norm());
    }

    #[test]
    fn trace_is_monotone() {
        let set = small_set(3);
        let init = cophasing_init(&set).unwrap();
        let rep = alternating_optimize(&set, &params(), &AoConfig::default(), &init).unwrap();
        for w in rep.iterate_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
        assert!((rep.sinr_achieved - 0.5).abs() / 0.5 <= 1e-3);
        assert!(rep.iterate_trace.len() <= 11);
    }

    #[test]
    fn infeasible_threshold_is_reported() {
        let set = small_set(1);
        let p = params().with_sinr_threshold(1e12);
        let init = cophasing_init(&set).unwrap();
        assert!(matches!(
            alternating_optimize(&set, &p, &AoConfig::default(), &init),
            Err(SwiptError::Infeasible(_))
        ));
    }

    #[test]
    fn single_pass_not_above_full_run() {
        let set = small_set(3);
        let init = cophasing_init(&set).unwrap();
        let one = single_pass(&set, &params(), &AoConfig::default(), &init).unwrap();
        let full = alternating_optimize(&set, &params(), &AoConfig::default(), &init).unwrap();
        assert!(full.harvested_power >= one.iterate_trace[0]);
    }
}
