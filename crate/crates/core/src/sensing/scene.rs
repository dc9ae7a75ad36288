//! Scene description and raw frame synthesis.
//!
//! A scene is a set of point scatterers whose range follows
//! `r(t) = r0 + v·t + a·sin(2π·f_m·t)`. Each contributes
//! `√p_s · √G / r² · exp(−j·4π·f_c·r/c)` to the de-chirped baseband sample at
//! time `t = m·T_rep + ℓ/f_s`, where `m` is the chirp (slow time) index, `ℓ`
//! the fast-time index and `T_rep = T0/M` the chirp repetition interval.
//! First-order returns carry the useful micro-Doppler; higher-order
//! (multi-bounce) returns and the clutter/noise term corrupt it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Hann,
    Rectangular,
}

/// How STFT outputs are combined over range bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integration {
    /// Complex sum over range bins, magnitude taken last.
    Coherent,
    /// Sum of per-bin squared magnitudes.
    Noncoherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChirpParams {
    /// Sensing bandwidth B_s (Hz).
    #[serde(rename = "bandwidth", with = "crate::units::frequency")]
    pub bandwidth_hz: f64,
    /// Chirp duration T_p (s).
    #[serde(rename = "chirp_duration", with = "crate::units::time")]
    pub chirp_s: f64,
    /// Chirps per frame M.
    pub chirps: usize,
    /// Sampling rate f_s (Hz).
    #[serde(rename = "sample_rate", with = "crate::units::frequency")]
    pub sample_rate_hz: f64,
    /// Carrier f_c (Hz).
    #[serde(rename = "carrier", with = "crate::units::frequency")]
    pub carrier_hz: f64,
    /// Unit sensing time T0 (s).
    #[serde(rename = "unit_time", with = "crate::units::time")]
    pub unit_time_s: f64,
    /// STFT window length W.
    pub window: usize,
    /// STFT overlap Q.
    pub overlap: usize,
    /// First kept singular component (1-based).
    pub band_lo: usize,
    /// Last kept singular component (1-based, inclusive).
    pub band_hi: usize,
    pub window_kind: WindowKind,
    pub integration: Integration,
}

impl Default for ChirpParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 10e6,
            chirp_s: 10e-6,
            chirps: 25,
            sample_rate_hz: 10e6,
            carrier_hz: 60e9,
            unit_time_s: 0.5,
            window: 16,
            overlap: 15,
            band_lo: 1,
            band_hi: 1,
            window_kind: WindowKind::Hann,
            integration: Integration::Coherent,
        }
    }
}

impl ChirpParams {
    /// Fast-time samples per chirp, `f_s·T_p`.
    pub fn fast_samples(&self) -> usize {
        (self.sample_rate_hz * self.chirp_s).round() as usize
    }

    /// Slow-time sampling period `T0/M`.
    pub fn chirp_interval(&self) -> f64 {
        self.unit_time_s / self.chirps as f64
    }

    pub fn hop(&self) -> usize {
        self.window - self.overlap
    }

    /// Number of STFT frames `⌊(M−Q)/(W−Q)⌋`; a partial last frame is dropped.
    pub fn frames(&self) -> usize {
        (self.chirps - self.overlap) / self.hop()
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn validate(&self) -> Result<()> {
        let spc = self.sample_rate_hz * self.chirp_s;
        if !(spc >= 1.0) || (spc - spc.round()).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "f_s·T_p must be a positive integer, got {spc}"
            )));
        }
        for (name, v) in [
            ("B_s", self.bandwidth_hz),
            ("f_c", self.carrier_hz),
            ("T0", self.unit_time_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0")));
            }
        }
        if self.chirps == 0 || self.chirps as f64 * self.chirp_s > self.unit_time_s {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= M and M·T_p <= T0, got M = {}",
                self.chirps
            )));
        }
        if self.window == 0 || self.overlap >= self.window || self.window > self.chirps {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= Q < W <= M, got W = {}, Q = {}",
                self.window, self.overlap
            )));
        }
        let rank = self.fast_samples().min(self.chirps);
        if !(1 <= self.band_lo && self.band_lo <= self.band_hi && self.band_hi <= rank) {
            return Err(Error::InvalidParameter(format!(
                "SVD band [{}, {}] outside [1, {rank}]",
                self.band_lo, self.band_hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterOrder {
    First,
    Higher,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    /// Relative RCS gain (antenna constant folded in).
    pub rcs_gain: f64,
    #[serde(rename = "range", with = "crate::units::distance")]
    pub range_m: f64,
    #[serde(rename = "velocity", with = "crate::units::velocity")]
    pub velocity_mps: f64,
    /// Amplitude of the sinusoidal range modulation (m).
    #[serde(rename = "sway", with = "crate::units::distance")]
    pub sway_m: f64,
    /// Frequency of the range modulation (Hz).
    #[serde(rename = "sway_rate", with = "crate::units::frequency")]
    pub sway_hz: f64,
    pub order: ScatterOrder,
}

impl Primitive {
    pub fn range_at(&self, t: f64) -> f64 {
        self.range_m
            + self.velocity_mps * t
            + self.sway_m * (2.0 * std::f64::consts::PI * self.sway_hz * t).sin()
    }

    /// `dr/dt` at time `t`.
    pub fn range_rate_at(&self, t: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * self.sway_hz;
        self.velocity_mps + self.sway_m * w * (w * t).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSet {
    pub primitives: Vec<Primitive>,
}

impl PrimitiveSet {
    pub fn validate(&self) -> Result<()> {
        if !self.primitives.iter().any(|p| p.order == ScatterOrder::First) {
            return Err(Error::InvalidParameter(
                "scene needs at least one first-order primitive".into(),
            ));
        }
        Ok(())
    }

    pub fn first_order_only(&self) -> PrimitiveSet {
        PrimitiveSet {
            primitives: self
                .primitives
                .iter()
                .filter(|p| p.order == ScatterOrder::First)
                .cloned()
                .collect(),
        }
    }
}

/// Desk-scale person: a torso and two swinging limbs drifting slowly
/// away from the radar, plus one wall-bounce return.
pub fn default_scene() -> PrimitiveSet {
    let first = |g: f64, r: f64, sway: f64, hz: f64| Primitive {
        rcs_gain: g,
        range_m: r,
        velocity_mps: 0.01,
        sway_m: sway,
        sway_hz: hz,
        order: ScatterOrder::First,
    };
    PrimitiveSet {
        primitives: vec![
            first(1.0, 1.5, 0.0, 0.0),
            first(0.4, 1.45, 0.002, 1.5),
            first(0.4, 1.55, 0.003, 1.0),
            Primitive {
                rcs_gain: 0.3,
                range_m: 2.8,
                velocity_mps: -0.015,
                sway_m: 0.002,
                sway_hz: 1.5,
                order: ScatterOrder::Higher,
            },
        ],
    }
}

/// Complex frame, rows = fast time, columns = slow time (chirps).
#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub data: DMatrix<Complex64>,
}

impl RawFrame {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            data: DMatrix::zeros(rows, cols),
        }
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Add for &RawFrame {
    type Output = RawFrame;
    fn add(self, rhs: &RawFrame) -> RawFrame {
        RawFrame {
            data: &self.data + &rhs.data,
        }
    }
}

/// Received frame split into its three additive parts, each already
/// scaled by the sensing power.
#[derive(Debug, Clone)]
pub struct SynthesizedFrame {
    pub first_order: RawFrame,
    pub higher_order: RawFrame,
    pub clutter: RawFrame,
}

impl SynthesizedFrame {
    pub fn received(&self) -> RawFrame {
        &(&self.first_order + &self.higher_order) + &self.clutter
    }

    /// Noise-free first-order-only frame.
    pub fn reference(&self) -> &RawFrame {
        &self.first_order
    }
}

fn echo_frame(
    prims: &[&Primitive],
    cp: &ChirpParams,
    p_s: f64,
) -> Result<RawFrame> {
    let (rows, cols) = (cp.fast_samples(), cp.chirps);
    let t_rep = cp.chirp_interval();
    let k = 4.0 * std::f64::consts::PI * cp.carrier_hz / SPEED_OF_LIGHT;
    let amp = p_s.sqrt();
    let mut frame = RawFrame::zeros(rows, cols);
    for m in 0..cols {
        for l in 0..rows {
            let t = m as f64 * t_rep + l as f64 / cp.sample_rate_hz;
            let mut acc = Complex64::new(0.0, 0.0);
            for p in prims {
                let r = p.range_at(t);
                if !(r > 0.0) {
                    return Err(Error::Geometry(format!(
                        "primitive range {r} m at t = {t} s is not positive"
                    )));
                }
                acc += Complex64::from_polar(p.rcs_gain.sqrt() / (r * r), -k * r);
            }
            frame.data[(l, m)] = acc * amp;
        }
    }
    Ok(frame)
}

/// Synthesises one unit-sensing-time frame. Clutter and receiver noise are
/// circular complex Gaussian with variance `clutter_psd·f_s` per sample,
/// drawn from a generator seeded with `seed`.
pub fn synthesize_frame(
    prims: &PrimitiveSet,
    cp: &ChirpParams,
    p_s: f64,
    clutter_psd: f64,
    seed: u64,
) -> Result<SynthesizedFrame> {
    cp.validate()?;
    prims.validate()?;
    if !(p_s >= 0.0) || !(clutter_psd >= 0.0) {
        return Err(Error::InvalidParameter(
            "sensing power and clutter PSD must be >= 0".into(),
        ));
    }
    let pick = |o: ScatterOrder| -> Vec<&Primitive> {
        prims.primitives.iter().filter(|p| p.order == o).collect()
    };
    let first_order = echo_frame(&pick(ScatterOrder::First), cp, p_s)?;
    let higher_order = echo_frame(&pick(ScatterOrder::Higher), cp, p_s)?;

    let (rows, cols) = (cp.fast_samples(), cp.chirps);
    let sigma = (clutter_psd * cp.sample_rate_hz / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clutter = RawFrame {
        data: DMatrix::from_fn(rows, cols, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * sigma, im * sigma)
        }),
    };
    Ok(SynthesizedFrame {
        first_order,
        higher_order,
        clutter,
    })
}
