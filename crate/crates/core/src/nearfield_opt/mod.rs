//! Near-field joint optimization of per-antenna power splitting, MMSE
//! combining and the phase shifts of both panels.
//!
//! The outer loop alternates two blocks:
//!
//! 1. with the phases fixed, the MMSE combiner and the splitting vector are
//!    obtained from the dual of the (convex) splitting subproblem ([`ps`]);
//! 2. with the combiner and the splitting vector fixed, the phases come from
//!    a lifted semidefinite problem where the rank-one requirement is handled
//!    as a DC penalty `μ(Tr U − ‖U‖₂)` and linearized around the previous
//!    iterate ([`phase`], solved by [`sdp`]).

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Result, SwiptError};
use crate::linalg::{cis, CVector};
use crate::receiver::PsVector;

pub mod ao;
pub mod phase;
pub mod ps;
pub mod sdp;

pub use ao::{alternating_optimize, cophasing_init, single_pass};
pub use phase::{
    build_dc_matrices, extract_phase_config, optimize_phases, solve_penalized_sdp,
    spectral_penalty_subgradient, DcMatrices, LiftedMatrix, PhaseProblem, PhaseStep,
};
pub use ps::{equal_ps, ps_fixed_point_step, solve_ps_subproblem, PsSolution};

/// Phase shifts of both panels, each wrapped into `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    theta_a: Vec<f64>,
    theta_b: Vec<f64>,
}

fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

impl PhaseConfig {
    pub fn new(theta_a: Vec<f64>, theta_b: Vec<f64>) -> Result<Self> {
        if theta_a.iter().chain(&theta_b).any(|t| !t.is_finite()) {
            return Err(SwiptError::InvalidParameter("non-finite phase".into()));
        }
        Ok(Self {
            theta_a: theta_a.into_iter().map(wrap).collect(),
            theta_b: theta_b.into_iter().map(wrap).collect(),
        })
    }

    pub fn zeros(n_a: usize, n_b: usize) -> Self {
        Self {
            theta_a: vec![0.0; n_a],
            theta_b: vec![0.0; n_b],
        }
    }

    /// Phases of a stacked vector `ū = [u_a; u_b]`; only the arguments of
    /// the entries are used.
    pub fn from_stacked(u: &CVector, n_a: usize) -> Result<Self> {
        if n_a > u.len() {
            return Err(SwiptError::DimensionMismatch {
                what: "stacked phase vector",
                expected: n_a,
                got: u.len(),
            });
        }
        let args: Vec<f64> = u.iter().map(|z| z.arg()).collect();
        Self::new(args[..n_a].to_vec(), args[n_a..].to_vec())
    }

    pub fn theta_a(&self) -> &[f64] {
        &self.theta_a
    }
    pub fn theta_b(&self) -> &[f64] {
        &self.theta_b
    }
    pub fn n_a(&self) -> usize {
        self.theta_a.len()
    }
    pub fn n_b(&self) -> usize {
        self.theta_b.len()
    }
    pub fn len(&self) -> usize {
        self.theta_a.len() + self.theta_b.len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unit-modulus stacked vector `ū = [e^{jθ_a}; e^{jθ_b}]`.
    pub fn stacked(&self) -> CVector {
        CVector::from_iterator(
            self.len(),
            self.theta_a.iter().chain(&self.theta_b).map(|t| cis(*t)),
        )
    }
}

/// Fixed-point iteration settings for the splitting update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpiConfig {
    pub tolerance: f64,
    pub max_iters: usize,
    /// Initial damping in `(0, 1]`; halved whenever the residual grows for
    /// three consecutive steps.
    pub damping: f64,
}

impl Default for FpiConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iters: 200,
            damping: 1.0,
        }
    }
}

/// Projected-subgradient search over the Lagrange multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierConfig {
    /// Initial step `s0`; iteration `t` uses `s0 / √t`.
    pub step: f64,
    pub max_iters: usize,
    /// Tolerance on `|SINR − γ0| / γ0`.
    pub tolerance: f64,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        Self {
            step: 1.0,
            max_iters: 2000,
            tolerance: 1e-6,
        }
    }
}

/// DC penalty schedule and phase extraction settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    /// `μ0 = mu_scale · |f(U_prev)| / N`.
    pub mu_scale: f64,
    pub growth: f64,
    pub max_dc_iters: usize,
    /// Stop once `(Tr U − ‖U‖₂) / Tr U` falls below this.
    pub rank_residual_tol: f64,
    /// Gaussian randomization candidates drawn during extraction.
    pub randomizations: usize,
    pub seed: u64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            mu_scale: 10.0,
            growth: 5.0,
            max_dc_iters: 10,
            rank_residual_tol: 1e-4,
            randomizations: 50,
            seed: 0x5eed,
        }
    }
}

/// All settings of the alternating optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoConfig {
    /// Stop when the fractional objective increase drops below this.
    pub convergence_threshold: f64,
    pub max_outer_iters: usize,
    pub fpi: FpiConfig,
    pub multiplier: MultiplierConfig,
    pub penalty: PenaltyConfig,
    pub sdp: sdp::SdpConfig,
}

impl Default for AoConfig {
    fn default() -> Self {
        Self {
            convergence_threshold: 1e-5,
            max_outer_iters: 30,
            fpi: FpiConfig::default(),
            multiplier: MultiplierConfig::default(),
            penalty: PenaltyConfig::default(),
            sdp: sdp::SdpConfig::default(),
        }
    }
}

impl AoConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.convergence_threshold,
            self.fpi.tolerance,
            self.multiplier.step,
            self.multiplier.tolerance,
            self.penalty.mu_scale,
            self.penalty.rank_residual_tol,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(SwiptError::InvalidParameter(
                "optimizer tolerances and steps must be positive".into(),
            ));
        }
        if !(self.fpi.damping > 0.0 && self.fpi.damping <= 1.0) {
            return Err(SwiptError::InvalidParameter(format!(
                "damping must lie in (0, 1], got {}",
                self.fpi.damping
            )));
        }
        if self.penalty.growth < 1.0 {
            return Err(SwiptError::InvalidParameter(
                "penalty growth factor must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

/// Outcome of a near-field solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Harvested power at the returned point, W.
    pub harvested_power: f64,
    pub rho: PsVector,
    pub beamformer: CVector,
    pub phases: PhaseConfig,
    pub sinr_achieved: f64,
    /// Harvested power after each outer iteration.
    pub iterate_trace: Vec<f64>,
    pub status: SolveStatus,
    /// Phase steps rejected by the monotonicity guard.
    pub rejected_phase_steps: usize,
}

/// Unit-modulus check used by debug assertions and tests.
pub fn is_unit_modulus(u: &CVector, tol: f64) -> bool {
    u.iter().all(|z: &Complex64| (z.norm() - 1.0).abs() <= tol)
}
