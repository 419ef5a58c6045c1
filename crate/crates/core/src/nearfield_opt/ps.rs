//! Power-splitting subproblem at fixed phases.
//!
//! For a multiplier `λ` the Lagrangian `η Σ (1−ρ_m) c_m + λ (SINR(ρ) − γ0)`
//! is maximized by a fixed-point iteration on its stationarity condition
//!
//! ```text
//! η c_m = λ δ² P_t |u_m|² / (σ_r² ρ_m + δ²)²
//! ```
//!
//! where `u_m = g_m − √P_in f_m χ` is the interference-cancelled channel seen
//! by the MMSE combiner. The multiplier itself follows a projected
//! subgradient search in `κ = ln(λ / λ_ref)`.

use crate::error::{Result, SwiptError};
use crate::linalg::CVector;
use crate::receiver::{harvested_power_near, mmse_sinr, received_powers, PsVector, SystemParams};

use super::{FpiConfig, MultiplierConfig, SolveStatus};

#[derive(Debug, Clone)]
pub struct PsSolution {
    pub rho: PsVector,
    /// Multiplier in watts per unit SINR; zero when not applicable.
    pub lambda: f64,
    pub sinr: f64,
    pub harvested_power: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

fn check(g: &CVector, f: &CVector) -> Result<()> {
    if g.len() != f.len() {
        return Err(SwiptError::DimensionMismatch {
            what: "f length",
            expected: g.len(),
            got: f.len(),
        });
    }
    if g.is_empty() {
        return Err(SwiptError::InvalidParameter("empty channel".into()));
    }
    Ok(())
}

/// Interference-cancelled channel `u` at splitting `ρ`.
fn cancelled_channel(rho: &[f64], g: &CVector, f: &CVector, params: &SystemParams) -> Vec<f64> {
    let sp = params.interference_power.sqrt();
    let mut num = num_complex::Complex64::new(0.0, 0.0);
    let mut den = 1.0;
    for ((r, gm), fm) in rho.iter().zip(g.iter()).zip(f.iter()) {
        let d = params.antenna_noise * r + params.id_noise;
        num += fm.conj() * gm * (r / d);
        den += params.interference_power * r * fm.norm_sqr() / d;
    }
    let chi = num * (sp / den);
    g.iter()
        .zip(f.iter())
        .map(|(gm, fm)| (gm - fm * chi * sp).norm())
        .collect()
}

fn kkt_target(
    rho: &[f64],
    g: &CVector,
    f: &CVector,
    params: &SystemParams,
    c: &[f64],
    lambda: f64,
) -> Vec<f64> {
    let u = cancelled_channel(rho, g, f, params);
    let scale = params.id_noise.sqrt() * (lambda * params.transmit_power).sqrt();
    u.iter()
        .zip(c)
        .map(|(um, cm)| {
            let d = scale * um / (params.efficiency * cm).sqrt();
            ((d - params.id_noise) / params.antenna_noise).clamp(0.0, 1.0)
        })
        .collect()
}

/// One (damped) fixed-point update of the splitting vector at multiplier
/// `λ` (W per unit SINR).
pub fn ps_fixed_point_step(
    rho: &PsVector,
    g: &CVector,
    f: &CVector,
    params: &SystemParams,
    lambda: f64,
    damping: f64,
) -> Result<PsVector> {
    check(g, f)?;
    if rho.len() != g.len() {
        return Err(SwiptError::DimensionMismatch {
            what: "ρ length",
            expected: g.len(),
            got: rho.len(),
        });
    }
    if !(lambda >= 0.0) {
        return Err(SwiptError::InvalidParameter(format!(
            "multiplier must be non-negative, got {lambda}"
        )));
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(SwiptError::InvalidParameter(format!(
            "damping must lie in (0, 1], got {damping}"
        )));
    }
    let c = received_powers(g, f, params);
    let target = kkt_target(rho.as_slice(), g, f, params, &c, lambda);
    Ok(PsVector::clamped(
        rho.as_slice()
            .iter()
            .zip(&target)
            .map(|(r, t)| (1.0 - damping) * r + damping * t)
            .collect(),
    ))
}

/// Fixed point at one multiplier; returns `(ρ, iterations, converged)`.
fn fixed_point(
    start: &[f64],
    g: &CVector,
    f: &CVector,
    params: &SystemParams,
    c: &[f64],
    lambda: f64,
    cfg: &FpiConfig,
) -> (Vec<f64>, usize, bool) {
    let mut rho = start.to_vec();
    let mut damping = cfg.damping;
    let mut prev_res = f64::INFINITY;
    let mut rising = 0;
    for it in 1..=cfg.max_iters {
        let target = kkt_target(&rho, g, f, params, c, lambda);
        let next: Vec<f64> = rho
            .iter()
            .zip(&target)
            .map(|(r, t)| (1.0 - damping) * r + damping * t)
            .collect();
        let res = next
            .iter()
            .zip(&rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rho = next;
        if res <= cfg.tolerance {
            return (rho, it, true);
        }
        if res >= prev_res {
            rising += 1;
            if rising >= 3 {
                damping *= 0.5;
                rising = 0;
            }
        } else {
            rising = 0;
        }
        prev_res = res;
    }
    (rho, cfg.max_iters, false)
}

/// Brackets the multiplier around `kappa` and bisects until the SINR
/// constraint is tight; returns the feasible end of the final bracket.
#[allow(clippy::too_many_arguments)]
fn refine(
    kappa: f64,
    start: &[f64],
    lambda_ref: f64,
    g: &CVector,
    f: &CVector,
    params: &SystemParams,
    c: &[f64],
    fpi: &FpiConfig,
) -> Result<Option<(Vec<f64>, f64, f64)>> {
    let gamma = params.sinr_threshold;
    let solve_at = |k: f64, from: &[f64]| -> Result<(Vec<f64>, f64)> {
        let (rho, _, _) = fixed_point(from, g, f, params, c, lambda_ref * k.exp(), fpi);
        let sinr = mmse_sinr(g, f, &PsVector::clamped(rho.clone()), params)?;
        Ok((rho, sinr))
    };
    let (rho0, sinr0) = solve_at(kappa, start)?;
    let mut lo = (kappa, rho0.clone(), sinr0);
    let mut hi = (kappa, rho0, sinr0);
    let mut width = 1e-3;
    for _ in 0..60 {
        if lo.2 < gamma && hi.2 >= gamma {
            break;
        }
        if hi.2 < gamma {
            let k = (hi.0 + width).min(300.0);
            let (r, s) = solve_at(k, &hi.1)?;
            lo = hi;
            hi = (k, r, s);
        } else {
            let k = (lo.0 - width).max(-300.0);
            let (r, s) = solve_at(k, &lo.1)?;
            hi = lo;
            lo = (k, r, s);
        }
        width *= 2.0;
    }
    if !(lo.2 < gamma && hi.2 >= gamma) {
        return Ok(None);
    }
    for _ in 0..100 {
        if hi.2 / gamma - 1.0 <= 1e-12 || hi.0 - lo.0 <= 1e-15 {
            break;
        }
        let k = 0.5 * (lo.0 + hi.0);
        let (r, s) = solve_at(k, &hi.1)?;
        if s >= gamma {
            hi = (k, r, s);
        } else {
            lo = (k, r, s);
        }
    }
    Ok(Some((hi.1, hi.2, hi.0)))
}

/// Optimal splitting at fixed `g`, maximizing harvested power subject to
/// `SINR ≥ γ0` with the MMSE combiner.
pub fn solve_ps_subproblem(
    g: &CVector,
    f: &CVector,
    params: &SystemParams,
    fpi: &FpiConfig,
    mult: &MultiplierConfig,
) -> Result<PsSolution> {
    check(g, f)?;
    let m = g.len();
    let gamma = params.sinr_threshold;
    let ones = PsVector::ones(m);
    let sinr_max = mmse_sinr(g, f, &ones, params)?;
    if sinr_max < gamma {
        return Ok(PsSolution {
            harvested_power: harvested_power_near(g, f, &ones, params)?,
            rho: ones,
            lambda: 0.0,
            sinr: sinr_max,
            status: SolveStatus::Infeasible,
            iterations: 0,
        });
    }
    let c = received_powers(g, f, params);
    let lambda_ref = params.efficiency * c.iter().sum::<f64>() / gamma;

    let eval = |rho: &[f64]| -> Result<f64> { mmse_sinr(g, f, &PsVector::clamped(rho.to_vec()), params) };

    let mut kappa = 0.0_f64;
    let mut rho = vec![0.5; m];
    let mut step = mult.step;
    let mut last_sign = 0.0_f64;
    let mut best_feasible: Option<(Vec<f64>, f64, f64)> = None;
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    let mut sinr = 0.0;
    let mut lambda = lambda_ref;
    for t in 1..=mult.max_iters {
        iterations = t;
        lambda = lambda_ref * kappa.exp();
        let (next, _, _) = fixed_point(&rho, g, f, params, &c, lambda, fpi);
        rho = next;
        sinr = eval(&rho)?;
        let residual = 1.0 - sinr / gamma;
        if residual <= 0.0 {
            let better = best_feasible.as_ref().is_none_or(|(_, s, _)| sinr < *s);
            if better {
                best_feasible = Some((rho.clone(), sinr, lambda));
            }
        }
        if residual.abs() <= mult.tolerance {
            status = SolveStatus::Converged;
            break;
        }
        let sign = residual.signum();
        if last_sign != 0.0 && sign != last_sign {
            step *= 0.5;
        }
        last_sign = sign;
        let s_t = step / (t as f64).sqrt();
        kappa = (kappa + s_t * residual.clamp(-1.0, 1.0)).clamp(-300.0, 300.0);
    }
    if let Some((r, s, k)) = refine(kappa, &rho, lambda_ref, g, f, params, &c, fpi)? {
        rho = r;
        sinr = s;
        lambda = lambda_ref * k.exp();
        best_feasible = None;
    }
    if sinr < gamma {
        if let Some((r, s, l)) = best_feasible {
            if (s / gamma - 1.0) <= 10.0 * mult.tolerance || status != SolveStatus::Converged {
                rho = r;
                sinr = s;
                lambda = l;
            }
        }
    }
    let rho = PsVector::clamped(rho);
    Ok(PsSolution {
        harvested_power: harvested_power_near(g, f, &rho, params)?,
        rho,
        lambda,
        sinr,
        status,
        iterations,
    })
}

/// Common splitting ratio meeting `SINR = γ0`, found by bisection; `None`
/// when even `ρ = 1` falls short.
pub fn equal_ps(
    g: &CVector,
    f: &CVector,
    params: &SystemParams,
    tolerance: f64,
) -> Result<Option<PsSolution>> {
    check(g, f)?;
    let m = g.len();
    let gamma = params.sinr_threshold;
    let at = |r: f64| mmse_sinr(g, f, &PsVector::clamped(vec![r; m]), params);
    if at(1.0)? < gamma {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let s = at(mid)?;
        if s >= gamma {
            hi = mid;
            if (s / gamma - 1.0) <= tolerance {
                break;
            }
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    let rho = PsVector::clamped(vec![hi; m]);
    Ok(Some(PsSolution {
        harvested_power: harvested_power_near(g, f, &rho, params)?,
        sinr: at(hi)?,
        rho,
        lambda: 0.0,
        status: SolveStatus::Converged,
        iterations,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(gamma: f64) -> SystemParams {
        SystemParams::new(1.0, 1.0, 1.585e-6, 1.585e-6, 0.9, gamma).unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, m: usize) -> (CVector, CVector) {
        let mut cn = |s: f64| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * s;
        let g = CVector::from_iterator(m, (0..m).map(|_| cn(0.04)));
        let f = CVector::from_iterator(m, (0..m).map(|_| cn(1.5e-3)));
        (g, f)
    }

    #[test]
    fn zero_and_huge_multiplier() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, f) = random_instance(&mut rng, 5);
        let p = params(10.0);
        let r0 = PsVector::uniform(5, 0.5).unwrap();
        let z = ps_fixed_point_step(&r0, &g, &f, &p, 0.0, 1.0).unwrap();
        assert!(z.as_slice().iter().all(|r| *r == 0.0));
        let o = ps_fixed_point_step(&r0, &g, &f, &p, 1e12, 1.0).unwrap();
        assert!(o.as_slice().iter().all(|r| *r == 1.0));
    }

    #[test]
    fn scalar_fixed_point_matches_bisection() {
        let p = params(10.0);
        let g = CVector::from_element(1, Complex64::new(0.02, 0.01));
        let f = CVector::from_element(1, Complex64::new(0.0, 0.0));
        let c = p.transmit_power * g[0].norm_sqr() + p.antenna_noise;
        for lambda in [1e-7, 1e-6, 3e-6] {
            let (rho, _, ok) = fixed_point(&[0.5], &g, &f, &p, &[c], lambda, &FpiConfig::default());
            assert!(ok);
            // Root of η c (ρσ²+δ²)² = λ δ² P_t |g|² on [0, 1].
            let h = |r: f64| {
                p.efficiency * c * (r * p.antenna_noise + p.id_noise).powi(2)
                    - lambda * p.id_noise * p.transmit_power * g[0].norm_sqr()
            };
            let expected = if h(0.0) >= 0.0 {
                0.0
            } else if h(1.0) <= 0.0 {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if h(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            assert!((rho[0] - expected).abs() < 1e-8, "λ={lambda}: {} vs {expected}", rho[0]);
        }
    }

    #[test]
    fn scalar_closed_form() {
        let p = params(10.0);
        let g = CVector::from_element(1, Complex64::new(0.01, 0.0));
        let f = CVector::from_element(1, Complex64::new(0.0, 0.0));
        let sol = solve_ps_subproblem(&g, &f, &p, &FpiConfig::default(), &MultiplierConfig::default())
            .unwrap();
        let expected = p.sinr_threshold * p.id_noise
            / (p.transmit_power * g[0].norm_sqr() - p.sinr_threshold * p.antenna_noise);
        assert!(expected > 0.0 && expected < 1.0);
        assert_eq!(sol.status, SolveStatus::Converged);
        assert!((sol.rho.as_slice()[0] - expected).abs() / expected < 1e-4);
    }

    #[test]
    fn infeasible_when_full_split_short() {
        let p = params(1e9);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (g, f) = random_instance(&mut rng, 5);
        let sol = solve_ps_subproblem(&g, &f, &p, &FpiConfig::default(), &MultiplierConfig::default())
            .unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(equal_ps(&g, &f, &p, 1e-8).unwrap().is_none());
    }

    #[test]
    fn active_constraint_and_beats_equal_split() {
        let p = params(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (g, f) = random_instance(&mut rng, 5);
            let sol =
                solve_ps_subproblem(&g, &f, &p, &FpiConfig::default(), &MultiplierConfig::default())
                    .unwrap();
            if sol.status == SolveStatus::Infeasible {
                continue;
            }
            assert_eq!(sol.status, SolveStatus::Converged);
            assert!((sol.sinr - p.sinr_threshold).abs() / p.sinr_threshold <= 1e-3);
            assert!(sol.lambda > 0.0);
            let eq = equal_ps(&g, &f, &p, 1e-8).unwrap().unwrap();
            assert!(sol.harvested_power >= eq.harvested_power * (1.0 - 1e-6), "{:?} {:?} eq {:?}", sol.rho, sol.harvested_power, eq);
        }
    }

    #[test]
    fn multiplier_matches_bisection_oracle() {
        let p = params(10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (g, f) = random_instance(&mut rng, 5);
        let sol = solve_ps_subproblem(&g, &f, &p, &FpiConfig::default(), &MultiplierConfig::default())
            .unwrap();
        let c = received_powers(&g, &f, &p);
        let sinr_at = |l: f64| {
            let (r, _, _) = fixed_point(&[0.5; 5], &g, &f, &p, &c, l, &FpiConfig::default());
            mmse_sinr(&g, &f, &PsVector::clamped(r), &p).unwrap()
        };
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while sinr_at(hi) < p.sinr_threshold {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sinr_at(mid) < p.sinr_threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (r_or, _, _) = fixed_point(&[0.5; 5], &g, &f, &p, &c, hi, &FpiConfig::default());
        let q_or = harvested_power_near(&g, &f, &PsVector::clamped(r_or), &p).unwrap();
        assert!((sol.harvested_power - q_or).abs() / q_or < 1e-4);
    }
}
