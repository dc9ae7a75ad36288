//! Uplink channel: log-distance path loss with log-normal shadowing and
//! Rayleigh small-scale fading on an interference-free subcarrier.
//!
//! With `|h|² ~ Exp(φ)` the ergodic rate has the closed form
//! `C = -(B0/ln2)·e^{a}·Ei(-a)` with `a = B0·N0/(p·φ)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::exp_e1_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Subcarrier bandwidth in Hz.
    pub b0_hz: f64,
    /// Noise power spectral density in W/Hz.
    pub n0_w_per_hz: f64,
}

impl ChannelParams {
    pub fn new(b0_hz: f64, n0_w_per_hz: f64) -> Result<Self> {
        let ch = Self { b0_hz, n0_w_per_hz };
        ch.validate()?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b0_hz > 0.0 && self.b0_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!("B0 must be > 0, got {}", self.b0_hz)));
        }
        if !(self.n0_w_per_hz > 0.0 && self.n0_w_per_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "N0 must be > 0, got {}",
                self.n0_w_per_hz
            )));
        }
        Ok(())
    }

    /// Noise power over one subcarrier, `B0·N0`.
    pub fn noise_power(&self) -> f64 {
        self.b0_hz * self.n0_w_per_hz
    }
}

/// Per-device link and power limits. `phi` is derived from distance and
/// shadowing at construction and stored so scenarios replay exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub id: usize,
    pub dist_km: f64,
    pub shadowing_db: f64,
    pub phi: f64,
    pub p_c_max_w: f64,
    pub p_s_min_w: f64,
    pub p_s_max_w: f64,
}

impl DeviceProfile {
    pub fn new(
        id: usize,
        dist_km: f64,
        shadowing_db: f64,
        p_c_max_w: f64,
        p_s_min_w: f64,
        p_s_max_w: f64,
    ) -> Result<Self> {
        let dev = Self {
            id,
            dist_km,
            shadowing_db,
            phi: large_scale_gain(dist_km, shadowing_db)?,
            p_c_max_w,
            p_s_min_w,
            p_s_max_w,
        };
        dev.validate()?;
        Ok(dev)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "device {}: phi must be > 0, got {}",
                self.id, self.phi
            )));
        }
        if !(self.p_c_max_w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "device {}: P_c_max must be > 0",
                self.id
            )));
        }
        if !(self.p_s_min_w > 0.0 && self.p_s_min_w <= self.p_s_max_w) {
            return Err(Error::InvalidParameter(format!(
                "device {}: need 0 < P_s_min <= P_s_max, got {} and {}",
                self.id, self.p_s_min_w, self.p_s_max_w
            )));
        }
        Ok(())
    }
}

/// Linear large-scale power gain for `PL = 128.1 + 37.6·log10(d_km)` dB plus
/// shadowing in dB.
pub fn large_scale_gain(dist_km: f64, shadowing_db: f64) -> Result<f64> {
    if !(dist_km > 0.0 && dist_km.is_finite()) {
        return Err(Error::Domain(format!("distance must be > 0 km, got {dist_km}")));
    }
    let loss_db = 128.1 + 37.6 * dist_km.log10() + shadowing_db;
    Ok(10f64.powf(-loss_db / 10.0))
}

/// Ergodic capacity in bit/s for transmit power `p_c` and gain `phi`.
pub fn capacity_from_gain(p_c: f64, phi: f64, ch: &ChannelParams) -> Result<f64> {
    if !(p_c >= 0.0) || !p_c.is_finite() {
        return Err(Error::Domain(format!("transmit power must be >= 0, got {p_c}")));
    }
    if !(phi > 0.0) {
        return Err(Error::Domain(format!("gain must be > 0, got {phi}")));
    }
    if p_c == 0.0 {
        return Ok(0.0);
    }
    let a = ch.noise_power() / (p_c * phi);
    if !a.is_finite() {
        return Ok(0.0);
    }
    Ok(ch.b0_hz / std::f64::consts::LN_2 * exp_e1_scaled(a)?)
}

pub fn ergodic_capacity(p_c: f64, dev: &DeviceProfile, ch: &ChannelParams) -> Result<f64> {
    capacity_from_gain(p_c, dev.phi, ch)
}

/// `B0·log2(1 + p·φ·|h|²/(B0·N0))` for one channel-power realisation.
pub fn instantaneous_rate(p_c: f64, phi: f64, h2: f64, ch: &ChannelParams) -> f64 {
    ch.b0_hz * (p_c * phi * h2 / ch.noise_power()).ln_1p() / std::f64::consts::LN_2
}

/// Monte-Carlo mean of the instantaneous rate over i.i.d. unit-mean
/// exponential `|h|²` draws. Deterministic in `seed`.
pub fn mc_capacity_oracle(
    p_c: f64,
    dev: &DeviceProfile,
    ch: &ChannelParams,
    n_draws: usize,
    seed: u64,
) -> Result<f64> {
    if n_draws == 0 {
        return Err(Error::InvalidParameter("n_draws must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..n_draws).map(|_| -> f64 { Exp1.sample(&mut rng) });
    Ok(mc_capacity_from_draws(p_c, dev.phi, ch, draws))
}

/// Mean rate over caller-supplied `|h|²` values.
pub fn mc_capacity_from_draws<I>(p_c: f64, phi: f64, ch: &ChannelParams, draws: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let (mut sum, mut n) = (0.0, 0usize);
    for h2 in draws {
        sum += instantaneous_rate(p_c, phi, h2, ch);
        n += 1;
    }
    sum / n as f64
}
