//! Fast self-checks run by `swipt validate`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{output::write_csv, run_sweep, Scenario, SchemeId, Sweep, SweepVariable};
use crate::channel::{ap_irs_link, hybrid_gain_numeric, sample_cn, sample_far_field, FarFieldStats};
use crate::geometry::{Aperture, IrsPanelSpec, Point3};
use crate::hybridfield::{asymptotic_gain, closed_form_gain, mirror_bound, solve_hybrid_ps, AsymptoticCondition};
use crate::linalg::{cis, CVector};
use crate::nearfield_opt::{solve_ps_subproblem, FpiConfig, MultiplierConfig, SolveStatus};
use crate::receiver::SystemParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn stats() -> FarFieldStats {
    FarFieldStats::new(1.6, 0.01, 45.0).expect("valid stats")
}

fn aperture(l_x: f64, l_y: f64, n_x: usize, n_z: usize, spacing: f64) -> Aperture {
    Aperture {
        l_x,
        l_y,
        n_x,
        n_z,
        spacing,
        element_area: spacing * spacing,
    }
}

fn closed_form_grid() -> Check {
    let mut worst = (0.0, String::new());
    for &n_x in &[5, 11, 21, 51] {
        for &n_z in &[5, 11, 21, 51] {
            for &xi in &[0.01, 0.02, 0.05] {
                for &r in &[0.5, 1.0, 2.0] {
                    let ap = aperture(0.2 / xi, r * 0.2 / xi, n_x, n_z, 0.2);
                    let e = rel(closed_form_gain(&ap, &stats()).unwrap_or(f64::NAN), hybrid_gain_numeric(&ap, &stats()));
                    if !(e <= worst.0) {
                        worst = (e, format!("N_x={n_x} N_z={n_z} ξ={xi} r̄={r}"));
                    }
                }
            }
        }
    }
    check("closed-form gain", worst.0 <= 1e-3, format!("worst relative error {:.3e} at {}", worst.0, worst.1))
}

fn asymptotics() -> Check {
    let s = stats();
    let cases = [
        (aperture(1.0, 1.0, 200, 10, 0.2), AsymptoticCondition::A),
        (aperture(1.0, 1.0, 10, 200, 0.2), AsymptoticCondition::B),
        (aperture(1.0, 1.0, 50, 400, 0.2), AsymptoticCondition::C),
    ];
    let errs: Vec<f64> = cases
        .iter()
        .map(|(ap, c)| rel(hybrid_gain_numeric(ap, &s), asymptotic_gain(ap, &s, *c).unwrap_or(f64::NAN)))
        .collect();
    check(
        "asymptotic limits",
        errs.iter().all(|e| *e <= 0.02),
        format!("relative errors a/b/c = {:.3e}/{:.3e}/{:.3e}", errs[0], errs[1], errs[2]),
    )
}

fn mirror() -> Check {
    let s = stats();
    let ap = aperture(1.0, 1.0, 1000, 1000, 0.2);
    let ratio = hybrid_gain_numeric(&ap, &s) / mirror_bound(&s, 0.2, 0.04);
    check("mirror bound", (0.99..=1.0).contains(&ratio), format!("1000×1000 panel reaches {ratio:.5} of the bound"))
}

fn phase_invariance() -> Check {
    let panel = IrsPanelSpec::new(Point3::new(1.0, 1.0, 0.0), 5, 5, 0.2, 0.04).expect("valid panel");
    let h = ap_irs_link(&panel, 0.4).expect("valid link").response;
    let s = stats();
    let expected = hybrid_gain_numeric(&panel.aperture(), &s);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = h.len();
    let theta1: Vec<f64> = (0..n).map(|_| std::f64::consts::TAU * rng.random::<f64>()).collect();
    let (m, samples) = (5, 4000);
    let (mut a, mut b) = (Vec::with_capacity(samples), Vec::with_capacity(samples));
    for _ in 0..samples {
        let g = sample_far_field(&s, m, n, &mut rng);
        let r0 = CVector::from_iterator(n, h.iter().copied());
        let r1 = CVector::from_iterator(n, h.iter().zip(&theta1).map(|(x, t)| x * cis(*t)));
        a.push((&g * r0).norm_squared() / m as f64);
        b.push((&g * r1).norm_squared() / m as f64);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let se = |v: &[f64]| {
        let mu = mean(v);
        (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64 / v.len() as f64).sqrt()
    };
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let ok = mean(&d).abs() < 3.0 * se(&d)
        && (mean(&a) - expected).abs() < 3.0 * se(&a)
        && (mean(&b) - expected).abs() < 3.0 * se(&b);
    check("hybrid phase invariance", ok, format!("means {:.4e}, {:.4e} vs {:.4e}", mean(&a), mean(&b), expected))
}

fn hybrid_ps() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = SystemParams::new(10.0, 1.0, 1.585e-6, 1.585e-6, 0.9, 1.0 + 20.0 * rng.random::<f64>())
            .expect("valid params");
        let f = CVector::from_fn(2, |_, _| sample_cn(1e-6, &mut rng));
        let g = 1e-6 + 4e-6 * rng.random::<f64>();
        let Ok(sol) = solve_hybrid_ps(g, g, &f, &p) else { continue };
        let mut best = f64::NEG_INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let rho = crate::receiver::PsVector::clamped(vec![i as f64 / 200.0, j as f64 / 200.0]);
                let sinr = crate::receiver::hybrid_average_sinr(g, g, &f, &rho, &p).unwrap_or(0.0);
                if sinr >= p.sinr_threshold {
                    best = best.max(crate::receiver::harvested_power_hybrid(g, g, &f, &rho, &p).unwrap_or(0.0));
                }
            }
        }
        worst = worst.max((best - sol.harvested_power) / best);
    }
    check("hybrid splitting optimality", worst <= 1e-9, format!("largest grid advantage {worst:.3e}"))
}

fn scalar_ps() -> Check {
    let p = SystemParams::new(1.0, 1.0, 1.585e-6, 1.585e-6, 0.9, 1.0).expect("valid params");
    let g = CVector::from_element(1, Complex64::new(3e-3, 1e-3));
    let f = CVector::from_element(1, Complex64::new(5e-4, 0.0));
    let expected = p.sinr_threshold * p.id_noise
        / (p.transmit_power * g[0].norm_sqr()
            - p.sinr_threshold * (p.interference_power * f[0].norm_sqr() + p.antenna_noise));
    match solve_ps_subproblem(&g, &f, &p, &FpiConfig::default(), &MultiplierConfig::default()) {
        Ok(sol) if sol.status != SolveStatus::Infeasible => {
            let e = rel(sol.rho.as_slice()[0], expected);
            check("scalar splitting", e <= 1e-6, format!("ρ = {:.8e}, closed form {expected:.8e}", sol.rho.as_slice()[0]))
        }
        other => check("scalar splitting", false, format!("solver returned {other:?}")),
    }
}

fn determinism() -> Check {
    let mut s = Scenario::hybrid_field();
    s.trials = 4;
    s.sweep = Sweep {
        variable: SweepVariable::IrsApDistanceY,
        values: vec![0.5, 1.0],
    };
    s.schemes = vec![SchemeId::Proposed, SchemeId::RandomPs];
    let render = || -> Option<Vec<u8>> {
        let mut buf = Vec::new();
        write_csv(&run_sweep(&s, false).ok()?, &mut buf).ok()?;
        Some(buf)
    };
    let (a, b) = (render(), render());
    check("reproducible output", a.is_some() && a == b, "two identical sweeps compared byte for byte".into())
}

/// Runs all checks in order.
pub fn run_checks() -> Vec<Check> {
    vec![
        closed_form_grid(),
        asymptotics(),
        mirror(),
        phase_invariance(),
        hybrid_ps(),
        scalar_ps(),
        determinism(),
    ]
}
