//! Receiver-side quantities: MMSE combining, SINR and harvested power under
//! per-antenna power splitting.

use num_complex::Complex64;

use crate::error::{Result, SwiptError};
use crate::linalg::{CMatrix, CVector};

/// Powers, efficiencies and QoS target of one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// AP transmit power `P_t`, W.
    pub transmit_power: f64,
    /// Interferer transmit power `P_in`, W.
    pub interference_power: f64,
    /// Antenna noise `σ_r²`, W.
    pub antenna_noise: f64,
    /// Information-decoder noise `δ²`, W.
    pub id_noise: f64,
    /// Energy conversion efficiency `η ∈ (0, 1]`.
    pub efficiency: f64,
    /// SINR threshold `γ0 > 0`, linear.
    pub sinr_threshold: f64,
}

impl SystemParams {
    pub fn new(
        transmit_power: f64,
        interference_power: f64,
        antenna_noise: f64,
        id_noise: f64,
        efficiency: f64,
        sinr_threshold: f64,
    ) -> Result<Self> {
        let p = Self {
            transmit_power,
            interference_power,
            antenna_noise,
            id_noise,
            efficiency,
            sinr_threshold,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("transmit_power", self.transmit_power),
            ("interference_power", self.interference_power),
            ("antenna_noise", self.antenna_noise),
            ("id_noise", self.id_noise),
            ("sinr_threshold", self.sinr_threshold),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SwiptError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(SwiptError::InvalidParameter(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        Ok(())
    }

    pub fn with_sinr_threshold(&self, sinr_threshold: f64) -> Self {
        Self {
            sinr_threshold,
            ..*self
        }
    }
}

/// Per-antenna power-splitting ratios; `ρ_m` goes to the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct PsVector(Vec<f64>);

impl PsVector {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if let Some((m, r)) = ratios
            .iter()
            .enumerate()
            .find(|(_, r)| !(**r >= 0.0 && **r <= 1.0))
        {
            return Err(SwiptError::InvalidParameter(format!(
                "ρ[{m}] = {r} outside [0, 1]"
            )));
        }
        Ok(Self(ratios))
    }

    /// Clamps every entry into [0, 1].
    pub fn clamped(ratios: Vec<f64>) -> Self {
        Self(ratios.into_iter().map(|r| r.clamp(0.0, 1.0)).collect())
    }

    pub fn uniform(m: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; m])
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![1.0; m])
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sqrt_diag(&self) -> Vec<f64> {
        self.0.iter().map(|r| r.sqrt()).collect()
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(SwiptError::DimensionMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

/// `S = P_in Λ^{1/2} f fᴴ Λ^{1/2} + σ_r² Λ + δ² I`, stored as diagonal plus
/// rank one and inverted with Sherman–Morrison.
#[derive(Debug, Clone)]
pub struct DecoderCovariance {
    diag: Vec<f64>,
    v: CVector,
    denom: f64,
}

impl DecoderCovariance {
    pub fn new(f: &CVector, rho: &PsVector, params: &SystemParams) -> Result<Self> {
        check_len("f length", rho.len(), f.len())?;
        let diag: Vec<f64> = rho
            .as_slice()
            .iter()
            .map(|r| params.antenna_noise * r + params.id_noise)
            .collect();
        let scale = params.interference_power.sqrt();
        let v = CVector::from_iterator(
            f.len(),
            f.iter()
                .zip(rho.as_slice())
                .map(|(fm, r)| fm * (scale * r.sqrt())),
        );
        let denom = 1.0
            + v.iter()
                .zip(&diag)
                .map(|(vm, d)| vm.norm_sqr() / d)
                .sum::<f64>();
        Ok(Self { diag, v, denom })
    }

    /// `S⁻¹ x`.
    pub fn solve(&self, x: &CVector) -> CVector {
        let dx = CVector::from_iterator(x.len(), x.iter().zip(&self.diag).map(|(xi, d)| xi / d));
        let coef: Complex64 = self.v.dotc(&dx) / self.denom;
        CVector::from_iterator(
            x.len(),
            dx.iter()
                .zip(self.v.iter().zip(&self.diag))
                .map(|(dxi, (vi, d))| dxi - vi / d * coef),
        )
    }

    pub fn dense(&self) -> CMatrix {
        let n = self.diag.len();
        let mut s = &self.v * self.v.adjoint();
        for i in 0..n {
            s[(i, i)] += Complex64::new(self.diag[i], 0.0);
        }
        s
    }

    /// Diagonal part `σ_r² ρ_m + δ²`.
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Rank-one factor `√P_in Λ^{1/2} f`.
    pub fn rank_one_factor(&self) -> &CVector {
        &self.v
    }

    /// `1 + vᴴ D⁻¹ v`.
    pub fn sherman_morrison_denominator(&self) -> f64 {
        self.denom
    }
}

fn scale_by_sqrt_rho(x: &CVector, rho: &PsVector) -> CVector {
    CVector::from_iterator(
        x.len(),
        x.iter().zip(rho.as_slice()).map(|(xi, r)| xi * r.sqrt()),
    )
}

/// MMSE combiner `w = S⁻¹ Λ^{1/2} g`.
pub fn mmse_beamformer(
    g: &CVector,
    f: &CVector,
    rho: &PsVector,
    params: &SystemParams,
) -> Result<CVector> {
    check_len("g length", rho.len(), g.len())?;
    let s = DecoderCovariance::new(f, rho, params)?;
    Ok(s.solve(&scale_by_sqrt_rho(g, rho)))
}

/// SINR of an arbitrary combiner `w`.
pub fn sinr(
    w: &CVector,
    g: &CVector,
    f: &CVector,
    rho: &PsVector,
    params: &SystemParams,
) -> Result<f64> {
    let m = rho.len();
    check_len("w length", m, w.len())?;
    check_len("g length", m, g.len())?;
    check_len("f length", m, f.len())?;
    let w_norm2: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    if w_norm2 == 0.0 {
        return Err(SwiptError::ZeroBeamformer);
    }
    let wl = scale_by_sqrt_rho(w, rho);
    let signal = params.transmit_power * wl.dotc(g).norm_sqr();
    let interference = params.interference_power * wl.dotc(f).norm_sqr();
    let antenna_noise = params.antenna_noise * wl.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(signal / (interference + antenna_noise + params.id_noise * w_norm2))
}

/// SINR reached by the MMSE combiner, `P_t gᴴ Λ^{1/2} S⁻¹ Λ^{1/2} g`.
/// Finite for every `ρ ∈ [0,1]^M`.
pub fn mmse_sinr(g: &CVector, f: &CVector, rho: &PsVector, params: &SystemParams) -> Result<f64> {
    check_len("g length", rho.len(), g.len())?;
    let s = DecoderCovariance::new(f, rho, params)?;
    let x = scale_by_sqrt_rho(g, rho);
    Ok(params.transmit_power * x.dotc(&s.solve(&x)).re)
}

/// Per-antenna received power `P_t|g_m|² + P_in|f_m|² + σ_r²`.
pub fn received_powers(g: &CVector, f: &CVector, params: &SystemParams) -> Vec<f64> {
    g.iter()
        .zip(f.iter())
        .map(|(gm, fm)| {
            params.transmit_power * gm.norm_sqr()
                + params.interference_power * fm.norm_sqr()
                + params.antenna_noise
        })
        .collect()
}

/// Harvested power `η Σ (1−ρ_m)(P_t|g_m|² + P_in|f_m|² + σ_r²)`.
pub fn harvested_power_near(
    g: &CVector,
    f: &CVector,
    rho: &PsVector,
    params: &SystemParams,
) -> Result<f64> {
    let m = rho.len();
    check_len("g length", m, g.len())?;
    check_len("f length", m, f.len())?;
    Ok(params.efficiency
        * received_powers(g, f, params)
            .iter()
            .zip(rho.as_slice())
            .map(|(c, r)| (1.0 - r) * c)
            .sum::<f64>())
}

/// Average SINR under hybrid-field Rayleigh panel→user hops.
pub fn hybrid_average_sinr(
    gain_a: f64,
    gain_b: f64,
    f: &CVector,
    rho: &PsVector,
    params: &SystemParams,
) -> Result<f64> {
    check_len("f length", rho.len(), f.len())?;
    let total = gain_a + gain_b;
    let rho_sum = rho.sum();
    let interference: f64 = f
        .iter()
        .zip(rho.as_slice())
        .map(|(fm, r)| r * fm.norm_sqr())
        .sum();
    Ok(params.transmit_power * rho_sum * total
        / (params.interference_power * interference
            + params.antenna_noise * rho_sum
            + params.id_noise))
}

/// Harvested power with average combined gains in place of `|g_m|²`.
pub fn harvested_power_hybrid(
    gain_a: f64,
    gain_b: f64,
    f: &CVector,
    rho: &PsVector,
    params: &SystemParams,
) -> Result<f64> {
    check_len("f length", rho.len(), f.len())?;
    let total = gain_a + gain_b;
    Ok(params.efficiency
        * f.iter()
            .zip(rho.as_slice())
            .map(|(fm, r)| {
                (1.0 - r)
                    * (params.transmit_power * total
                        + params.interference_power * fm.norm_sqr()
                        + params.antenna_noise)
            })
            .sum::<f64>())
}
