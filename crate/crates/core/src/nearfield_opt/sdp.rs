//! Primal-dual interior-point method for complex semidefinite programs of
//! the form
//!
//! ```text
//! maximize   Re Tr(C X)
//! subject to X_ii = 1,  a_kᴴ X a_k ≥ b_k,  X ⪰ 0
//! ```
//!
//! with a handful of rank-one inequality rows. Search directions are HKM
//! with a Mehrotra predictor-corrector; the Schur complement is dense and
//! real. Step lengths come from a Lanczos estimate of the extreme
//! generalized eigenvalue, confirmed by a Cholesky factorization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SwiptError};
use crate::linalg::{cmul, hermitian_part, re_trace_product, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpConfig {
    pub max_iters: usize,
    /// Relative tolerance on primal/dual residuals and duality gap.
    pub tolerance: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            max_iters: 80,
            tolerance: 1e-9,
            step_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub objective: CMatrix,
    /// `(a_k, b_k)` for `a_kᴴ X a_k ≥ b_k`.
    pub inequalities: Vec<(CVector, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    /// Residuals small but the gap stalled above tolerance.
    Inaccurate,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Hermitian, unit diagonal.
    pub x: CMatrix,
    pub objective: f64,
    pub primal_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: SdpStatus,
}

fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Smallest eigenvalue of `L⁻¹ D L⁻ᴴ` estimated by Lanczos with full
/// reorthogonalization.
fn lanczos_min(l: &CMatrix, d: &CMatrix) -> f64 {
    let n = l.nrows();
    let steps = if n <= 64 { n } else { 40 };
    let apply = |v: &CVector| -> CVector {
        let t = l.ad_solve_lower_triangular(v).unwrap_or_else(|| v.clone());
        let u = d * t;
        l.solve_lower_triangular(&u).unwrap_or(u)
    };
    let mut q = CVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.37 * (i as f64 * 1.3).sin(), 0.21 * (i as f64 * 0.7).cos())
    });
    q /= Complex64::new(q.norm(), 0.0);
    let mut basis: Vec<CVector> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut w = apply(&q);
        let a = q.dotc(&w).re;
        alpha.push(a);
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let nb = w.norm();
        if nb <= 1e-12 * (a.abs() + beta.last().copied().unwrap_or(0.0)).max(1e-300) {
            break;
        }
        beta.push(nb);
        q = w / Complex64::new(nb, 0.0);
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(*v))
}

/// Step `α ≤ 1` keeping `X + α ΔX ≻ 0`, a `fraction` of the way to the
/// boundary.
fn cone_step(x: &CMatrix, l: &CMatrix, dx: &CMatrix, fraction: f64) -> f64 {
    let theta = lanczos_min(l, dx);
    let mut alpha = if theta >= 0.0 {
        1.0
    } else {
        (fraction / -theta).min(1.0)
    };
    for _ in 0..40 {
        if (x + dx.scale(alpha)).cholesky().is_some() {
            return alpha;
        }
        alpha *= 0.7;
    }
    0.0
}

fn scalar_step(v: &[f64], dv: &[f64], fraction: f64) -> f64 {
    v.iter().zip(dv).fold(1.0_f64, |a, (x, d)| {
        if *d < 0.0 {
            a.min(fraction * -x / d)
        } else {
            a
        }
    })
}

fn lower_factor(a: &CMatrix) -> Option<CMatrix> {
    a.clone().cholesky().map(|c| c.l())
}

struct Direction {
    dx: CMatrix,
    ds: Vec<f64>,
    dz: CMatrix,
    dzs: Vec<f64>,
    dy: Vec<f64>,
}

/// Solves the problem; the returned `X` is rescaled to an exact unit
/// diagonal.
pub fn solve(problem: &SdpProblem, cfg: &SdpConfig) -> Result<SdpSolution> {
    let n = problem.objective.nrows();
    if problem.objective.ncols() != n || n == 0 {
        return Err(SwiptError::InvalidParameter(
            "SDP objective must be a non-empty square matrix".into(),
        ));
    }
    for (a, b) in &problem.inequalities {
        if a.len() != n {
            return Err(SwiptError::DimensionMismatch {
                what: "SDP constraint vector",
                expected: n,
                got: a.len(),
            });
        }
        if !b.is_finite() {
            return Err(SwiptError::InvalidParameter("non-finite SDP bound".into()));
        }
    }
    let kk = problem.inequalities.len();
    let dim = n + kk;

    // Minimization form with scaled data.
    let c_scale = max_abs(&problem.objective).max(f64::MIN_POSITIVE);
    let cbar = hermitian_part(&problem.objective).scale(-1.0 / c_scale);
    let mut a_vecs: Vec<CVector> = Vec::with_capacity(kk);
    let mut b_vec = Vec::with_capacity(kk);
    for (a, b) in &problem.inequalities {
        let s = a
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm_sqr()))
            .max(b.abs())
            .max(f64::MIN_POSITIVE);
        a_vecs.push(a / Complex64::new(s.sqrt(), 0.0));
        b_vec.push(b / s);
    }

    let ident = CMatrix::identity(n, n);
    let mut x = ident.clone();
    let mut s: Vec<f64> = a_vecs
        .iter()
        .zip(&b_vec)
        .map(|(a, b)| (a.norm_squared() - b).max(1.0))
        .collect();
    let zeta = 1.0 + cbar.norm().max(a_vecs.iter().fold(0.0, |m, a| m.max(a.norm_squared())));
    let mut z = ident.scale(zeta);
    let mut zs = vec![1.0; kk];
    let mut y = vec![0.0; dim];

    let c_norm = 1.0 + cbar.norm();
    let b_norm = 1.0 + ((n as f64) + b_vec.iter().map(|b| b * b).sum::<f64>()).sqrt();

    let dual_op = |yv: &[f64]| -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(yv[i], 0.0);
        }
        for (k, a) in a_vecs.iter().enumerate() {
            m.ger(Complex64::new(yv[n + k], 0.0), a, &a.conjugate(), Complex64::new(1.0, 0.0));
        }
        m
    };
    let primal_op = |xm: &CMatrix, sv: &[f64]| -> Vec<f64> {
        let mut r: Vec<f64> = (0..n).map(|i| xm[(i, i)].re).collect();
        for (k, a) in a_vecs.iter().enumerate() {
            r.push(a.dotc(&(xm * a)).re - sv[k]);
        }
        r
    };

    let mut status = SdpStatus::Inaccurate;
    let mut iterations = 0;
    let mut pres = f64::INFINITY;
    let mut gap = f64::INFINITY;
    for it in 1..=cfg.max_iters {
        iterations = it;
        let (Some(lx), Some(lz)) = (lower_factor(&x), lower_factor(&z)) else {
            break;
        };
        let zinv = z.clone().cholesky().map(|c| c.inverse()).unwrap_or_else(|| ident.clone());
        let ax = primal_op(&x, &s);
        let mut rp = vec![0.0; dim];
        for i in 0..n {
            rp[i] = 1.0 - ax[i];
        }
        for k in 0..kk {
            rp[n + k] = b_vec[k] - ax[n + k];
        }
        let rd = &cbar - dual_op(&y) - &z;
        let rds: Vec<f64> = (0..kk).map(|k| y[n + k] - zs[k]).collect();
        let mu = (re_trace_product(&x, &z) + s.iter().zip(&zs).map(|(a, b)| a * b).sum::<f64>())
            / dim as f64;

        let pobj = re_trace_product(&cbar, &x);
        let dobj: f64 =
            y[..n].iter().sum::<f64>() + (0..kk).map(|k| b_vec[k] * y[n + k]).sum::<f64>();
        pres = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        let rd_norm = rd.norm();
        let dres = (rd_norm + rds.iter().map(|v| v * v).sum::<f64>().sqrt()) / c_norm;
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if pres <= cfg.tolerance && dres <= cfg.tolerance && gap <= cfg.tolerance {
            status = SdpStatus::Optimal;
            break;
        }
        if !mu.is_finite() || y.iter().any(|v| !v.is_finite() || v.abs() > 1e14) {
            status = SdpStatus::Infeasible;
            break;
        }

        // Schur complement.
        let xa: Vec<CVector> = a_vecs.iter().map(|a| &x * a).collect();
        let za: Vec<CVector> = a_vecs.iter().map(|a| &zinv * a).collect();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] = (x[(i, j)] * zinv[(j, i)]).re;
            }
        }
        for k in 0..kk {
            for i in 0..n {
                let v = (xa[k][i] * za[k][i].conj()).re;
                m[(i, n + k)] = v;
                m[(n + k, i)] = v;
            }
            for l in 0..kk {
                m[(n + k, n + l)] = (a_vecs[k].dotc(&xa[l]) * a_vecs[l].dotc(&za[k])).re;
            }
            m[(n + k, n + k)] += s[k] / zs[k];
        }
        let m = (&m + m.transpose()) * 0.5;
        let schur = match m.clone().cholesky() {
            Some(ch) => ch,
            None => {
                let reg = 1e-12 * m.diagonal().amax().max(1.0);
                let mut m2 = m.clone();
                for i in 0..dim {
                    m2[(i, i)] += reg;
                }
                match m2.cholesky() {
                    Some(ch) => ch,
                    None => break,
                }
            }
        };

        let xrd_zinv = if rd_norm > 0.0 {
            cmul(&cmul(&x, &rd), &zinv)
        } else {
            CMatrix::zeros(n, n)
        };
        // `t_zinv` is `T Z⁻¹` for the centering/corrector matrix `T`.
        let direction = |t_zinv: &CMatrix, ts: &[f64]| -> Direction {
            let dx0 = t_zinv - &x - &xrd_zinv;
            let ds0: Vec<f64> = (0..kk)
                .map(|k| ts[k] / zs[k] - s[k] - s[k] * rds[k] / zs[k])
                .collect();
            let a0 = primal_op(&dx0, &ds0);
            let rhs = DVector::from_iterator(dim, (0..dim).map(|i| rp[i] - a0[i]));
            let dy: Vec<f64> = schur.solve(&rhs).iter().copied().collect();
            let dz = &rd - dual_op(&dy);
            let dzs: Vec<f64> = (0..kk).map(|k| rds[k] + dy[n + k]).collect();
            // X A*(Δy) Z⁻¹ = X Diag(Δy) Z⁻¹ + Σ Δy_k (X a_k)(Z⁻¹ a_k)ᴴ
            let mut xd = x.clone();
            for (j, d) in dy.iter().take(n).enumerate() {
                xd.column_mut(j).scale_mut(*d);
            }
            let mut dx = dx0 + cmul(&xd, &zinv);
            for k in 0..kk {
                dx.ger(Complex64::new(dy[n + k], 0.0), &xa[k], &za[k].conjugate(), Complex64::new(1.0, 0.0));
            }
            let ds: Vec<f64> = (0..kk)
                .map(|k| ts[k] / zs[k] - s[k] - s[k] * dzs[k] / zs[k])
                .collect();
            Direction {
                dx: hermitian_part(&dx),
                ds,
                dz,
                dzs,
                dy,
            }
        };

        // Predictor.
        let zero = CMatrix::zeros(n, n);
        let pred = direction(&zero, &vec![0.0; kk]);
        let ap = cone_step(&x, &lx, &pred.dx, 1.0).min(scalar_step(&s, &pred.ds, 1.0));
        let ad = cone_step(&z, &lz, &pred.dz, 1.0).min(scalar_step(&zs, &pred.dzs, 1.0));
        let x_aff = &x + pred.dx.scale(ap);
        let z_aff = &z + pred.dz.scale(ad);
        let mu_aff = (re_trace_product(&x_aff, &z_aff)
            + (0..kk)
                .map(|k| (s[k] + ap * pred.ds[k]) * (zs[k] + ad * pred.dzs[k]))
                .sum::<f64>())
            / dim as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector: T = σμI − ΔX_aff ΔZ_aff.
        let t_zinv = zinv.scale(sigma * mu) - cmul(&cmul(&pred.dx, &pred.dz), &zinv);
        let ts: Vec<f64> = (0..kk).map(|k| sigma * mu - pred.ds[k] * pred.dzs[k]).collect();
        let corr = direction(&t_zinv, &ts);
        let ap = cone_step(&x, &lx, &corr.dx, cfg.step_fraction)
            .min(scalar_step(&s, &corr.ds, cfg.step_fraction));
        let ad = cone_step(&z, &lz, &corr.dz, cfg.step_fraction)
            .min(scalar_step(&zs, &corr.dzs, cfg.step_fraction));
        if ap == 0.0 && ad == 0.0 {
            break;
        }
        x = hermitian_part(&(&x + corr.dx.scale(ap)));
        for k in 0..kk {
            s[k] += ap * corr.ds[k];
            zs[k] += ad * corr.dzs[k];
        }
        z = hermitian_part(&(&z + corr.dz.scale(ad)));
        for (yi, d) in y.iter_mut().zip(&corr.dy) {
            *yi += ad * d;
        }
    }

    if status != SdpStatus::Optimal && pres > 1e-6 {
        status = SdpStatus::Infeasible;
    }

    let d: Vec<f64> = (0..n)
        .map(|i| x[(i, i)].re.max(f64::MIN_POSITIVE).sqrt().recip())
        .collect();
    let xs = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            x[(i, j)] * (d[i] * d[j])
        }
    });
    let objective = re_trace_product(&problem.objective, &xs);
    Ok(SdpSolution {
        x: xs,
        objective,
        primal_residual: pres,
        gap,
        iterations,
        status,
    })
}
