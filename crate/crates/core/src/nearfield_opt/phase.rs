//! Phase step at fixed combiner and splitting vector.
//!
//! With `ū = [u_a; u_b]` and `U = ūūᴴ`, harvested power and the decoder
//! constraint are both linear in `U`:
//!
//! ```text
//! Q(U)   = η P_t Tr((Ω − E) U) + η [P_in(‖f‖² − ‖Λ^{1/2} f‖²) + σ_r²(M − Σρ)]
//! SINR ≥ γ0  ⇔  P_t Tr(R U) ≥ γ0 (P_in |wᴴΛ^{1/2} f|² + σ_r² ‖Λ^{1/2} w‖² + δ² ‖w‖²)
//! ```
//!
//! The rank-one condition is replaced by the penalty `μ (Tr U − ‖U‖₂)`.
//! Since `Tr U = N` on the feasible set, each DC step linearizes `‖U‖₂`
//! at the previous iterate and solves `max Tr((C + μ u₁u₁ᴴ) U)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{sample_cn, ChannelSet, Regime};
use crate::error::{Result, SwiptError};
use crate::linalg::{hermitian_eig, leading_eigenpair, outer, quad_form, re_trace_product, CMatrix, CVector};
use crate::receiver::{PsVector, SystemParams};

use super::sdp::{self, SdpConfig, SdpProblem, SdpStatus};
use super::{PenaltyConfig, PhaseConfig};

/// Lifted phase matrix `U ≈ ūūᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix(CMatrix);

impl LiftedMatrix {
    /// Checks Hermitian symmetry and the unit diagonal.
    pub fn new(u: CMatrix) -> Result<Self> {
        let n = u.nrows();
        if u.ncols() != n || n == 0 {
            return Err(SwiptError::InvalidParameter(
                "lifted matrix must be square and non-empty".into(),
            ));
        }
        let scale = u.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        if (&u - u.adjoint()).norm() > 1e-10 * scale * n as f64 {
            return Err(SwiptError::InvalidParameter("lifted matrix is not Hermitian".into()));
        }
        if (0..n).any(|i| (u[(i, i)].re - 1.0).abs() > 1e-8) {
            return Err(SwiptError::InvalidParameter(
                "lifted matrix diagonal must be one".into(),
            ));
        }
        Ok(Self(u))
    }

    pub fn from_vector(u: &CVector) -> Self {
        Self(outer(u, u))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `(Tr U − ‖U‖₂) / Tr U`.
    pub fn rank_residual(&self) -> f64 {
        let tr = self.0.trace().re;
        let (top, _) = leading_eigenpair(&self.0);
        ((tr - top) / tr).max(0.0)
    }
}

/// Quadratic-form matrices of the phase subproblem.
#[derive(Debug, Clone)]
pub struct DcMatrices {
    /// Gram of `Φ = [G_a diag(h_a), G_b diag(h_b)]`.
    pub omega: CMatrix,
    /// `t tᴴ` with `tᴴ = wᴴ Λ^{1/2} Φ`.
    pub r: CMatrix,
    pub t: CVector,
    /// Gram of `Λ^{1/2} Φ`.
    pub e: CMatrix,
    pub n_a: usize,
}

/// Builds `Ω`, `R` and `E` for a near-field channel set.
pub fn build_dc_matrices(set: &ChannelSet, rho: &PsVector, w: &CVector) -> Result<DcMatrices> {
    if set.regime != Regime::NearField {
        return Err(SwiptError::InvalidParameter(
            "phase step needs a near-field channel set".into(),
        ));
    }
    set.validate()?;
    let m = set.antenna_count();
    for (what, got) in [("ρ length", rho.len()), ("w length", w.len())] {
        if got != m {
            return Err(SwiptError::DimensionMismatch { what, expected: m, got });
        }
    }
    let (n_a, n_b) = (set.n_a(), set.n_b());
    let mut phi = CMatrix::zeros(m, n_a + n_b);
    for k in 0..n_a {
        for row in 0..m {
            phi[(row, k)] = set.g_a[(row, k)] * set.h_a[k];
        }
    }
    for k in 0..n_b {
        for row in 0..m {
            phi[(row, n_a + k)] = set.g_b[(row, k)] * set.h_b[k];
        }
    }
    let sqrt_rho = rho.sqrt_diag();
    let mut upsilon = phi.clone();
    for (row, s) in sqrt_rho.iter().enumerate() {
        upsilon.row_mut(row).scale_mut(*s);
    }
    let wl = CVector::from_iterator(m, w.iter().zip(&sqrt_rho).map(|(z, s)| z * *s));
    // t = Φᴴ Λ^{1/2} w
    let t = phi.adjoint() * wl;
    Ok(DcMatrices {
        omega: phi.adjoint() * &phi,
        r: outer(&t, &t),
        t,
        e: upsilon.adjoint() * &upsilon,
        n_a,
    })
}

/// Harvested power and decoder constraint of one phase step.
#[derive(Debug, Clone)]
pub struct PhaseProblem {
    /// `η P_t (Ω − E)`.
    pub objective: CMatrix,
    /// Terms of harvested power independent of the phases, W.
    pub constant: f64,
    /// `√P_t t`, so that `P_t R = constraint · constraintᴴ`.
    pub constraint: CVector,
    /// Right-hand side of the decoder constraint.
    pub bound: f64,
    pub n_a: usize,
}

impl PhaseProblem {
    pub fn new(
        set: &ChannelSet,
        rho: &PsVector,
        w: &CVector,
        params: &SystemParams,
    ) -> Result<Self> {
        let mats = build_dc_matrices(set, rho, w)?;
        Ok(Self::from_matrices(&mats, &set.f, rho, w, params))
    }

    pub fn from_matrices(
        mats: &DcMatrices,
        f: &CVector,
        rho: &PsVector,
        w: &CVector,
        params: &SystemParams,
    ) -> Self {
        let m = rho.len() as f64;
        let r = rho.as_slice();
        let f_norm: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        let f_lambda: f64 = f.iter().zip(r).map(|(z, p)| p * z.norm_sqr()).sum();
        let constant = params.efficiency
            * (params.interference_power * (f_norm - f_lambda)
                + params.antenna_noise * (m - rho.sum()));
        let wf: Complex64 = w
            .iter()
            .zip(f.iter())
            .zip(r)
            .map(|((wi, fi), p)| wi.conj() * fi * p.sqrt())
            .sum();
        let w_lambda: f64 = w.iter().zip(r).map(|(z, p)| p * z.norm_sqr()).sum();
        let w_norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
        let bound = params.sinr_threshold
            * (params.interference_power * wf.norm_sqr()
                + params.antenna_noise * w_lambda
                + params.id_noise * w_norm);
        Self {
            objective: (&mats.omega - &mats.e).scale(params.efficiency * params.transmit_power),
            constant,
            constraint: mats.t.scale(params.transmit_power.sqrt()),
            bound,
            n_a: mats.n_a,
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.nrows()
    }

    pub fn value(&self, u: &CVector) -> f64 {
        quad_form(&self.objective, u) + self.constant
    }

    pub fn value_lifted(&self, u: &LiftedMatrix) -> f64 {
        re_trace_product(&self.objective, u.matrix()) + self.constant
    }

    /// `P_t ūᴴ R ū − bound`; non-negative when the decoder constraint holds.
    pub fn margin(&self, u: &CVector) -> f64 {
        self.constraint.dotc(u).norm_sqr() - self.bound
    }

    fn feasible(&self, u: &CVector) -> bool {
        self.margin(u) >= -1e-9 * self.bound.abs()
    }
}

/// `u₁u₁ᴴ` for a unit leading eigenvector `u₁` of `U`.
pub fn spectral_penalty_subgradient(u: &LiftedMatrix) -> CMatrix {
    let (_, v) = leading_eigenpair(u.matrix());
    outer(&v, &v)
}

/// One DC step: maximize `Q(U) + μ Re Tr(G U)` over the lifted feasible
/// set, where `G` is a subgradient of `‖·‖₂` at the previous iterate.
pub fn solve_penalized_sdp(
    problem: &PhaseProblem,
    subgradient: &CMatrix,
    mu: f64,
    cfg: &SdpConfig,
) -> Result<LiftedMatrix> {
    if !(mu >= 0.0) {
        return Err(SwiptError::InvalidParameter(format!(
            "penalty must be non-negative, got {mu}"
        )));
    }
    let sdp_problem = SdpProblem {
        objective: &problem.objective + subgradient.scale(mu),
        inequalities: vec![(problem.constraint.clone(), problem.bound)],
    };
    let sol = sdp::solve(&sdp_problem, cfg)?;
    if sol.status == SdpStatus::Infeasible {
        return Err(SwiptError::Infeasible(format!(
            "phase SDP stalled with primal residual {:.3e}",
            sol.primal_residual
        )));
    }
    LiftedMatrix::new(sol.x)
}

fn project_unit(v: &CVector) -> CVector {
    v.map(|z| {
        let r = z.norm();
        if r < 1e-12 {
            Complex64::new(1.0, 0.0)
        } else {
            z / r
        }
    })
}

/// Rank-one phase configuration from a lifted matrix: the projected
/// leading eigenvector plus `randomizations` Gaussian draws with
/// covariance `U`. Returns the best candidate meeting the decoder
/// constraint and `true`, or the least-violating one and `false`.
pub fn extract_phase_config(
    u: &LiftedMatrix,
    problem: &PhaseProblem,
    randomizations: usize,
    seed: u64,
) -> Result<(PhaseConfig, bool)> {
    let n = u.dim();
    let (values, vectors) = hermitian_eig(u.matrix());
    let mut candidates = vec![project_unit(&vectors.column(0).into_owned())];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales: Vec<f64> = values.iter().map(|v| v.max(0.0).sqrt()).collect();
    for _ in 0..randomizations {
        let z = CVector::from_iterator(n, (0..n).map(|k| sample_cn(1.0, &mut rng) * scales[k]));
        candidates.push(project_unit(&(&vectors * z)));
    }
    let mut best_feasible: Option<(f64, usize)> = None;
    let mut least_violation: (f64, usize) = (f64::INFINITY, 0);
    for (i, c) in candidates.iter().enumerate() {
        if problem.feasible(c) {
            let v = problem.value(c);
            if best_feasible.is_none_or(|(b, _)| v > b) {
                best_feasible = Some((v, i));
            }
        } else {
            let viol = -problem.margin(c);
            if viol < least_violation.0 {
                least_violation = (viol, i);
            }
        }
    }
    let (idx, ok) = match best_feasible {
        Some((_, i)) => (i, true),
        None => (least_violation.1, false),
    };
    let phases = PhaseConfig::from_stacked(&candidates[idx], problem.n_a)?;
    debug_assert!(super::is_unit_modulus(&phases.stacked(), 1e-12));
    Ok((phases, ok))
}

/// Result of the DC phase step.
#[derive(Debug, Clone)]
pub struct PhaseStep {
    pub phases: PhaseConfig,
    /// Harvested power at the extracted phases with `(w, ρ)` held fixed.
    pub objective: f64,
    pub feasible: bool,
    pub lifted: LiftedMatrix,
    pub rank_residual: f64,
    pub dc_iterations: usize,
}

/// Relaxation followed by the DC penalty loop and phase extraction.
pub fn optimize_phases(
    problem: &PhaseProblem,
    penalty: &PenaltyConfig,
    sdp_cfg: &SdpConfig,
) -> Result<PhaseStep> {
    let n = problem.dim();
    let zero = CMatrix::zeros(n, n);
    let mut u = solve_penalized_sdp(problem, &zero, 0.0, sdp_cfg)?;
    let mut mu = 0.0;
    let mut dc_iterations = 0;
    let mut rank_residual = u.rank_residual();
    for t in 0..penalty.max_dc_iters {
        if rank_residual <= penalty.rank_residual_tol {
            break;
        }
        mu = if t == 0 {
            penalty.mu_scale * problem.value_lifted(&u).abs() / n as f64
        } else {
            mu * penalty.growth
        };
        let g = spectral_penalty_subgradient(&u);
        u = solve_penalized_sdp(problem, &g, mu, sdp_cfg)?;
        rank_residual = u.rank_residual();
        dc_iterations += 1;
    }
    let (phases, feasible) =
        extract_phase_config(&u, problem, penalty.randomizations, penalty.seed)?;
    Ok(PhaseStep {
        objective: problem.value(&phases.stacked()),
        phases,
        feasible,
        lifted: u,
        rank_residual,
        dc_iterations,
    })
}
