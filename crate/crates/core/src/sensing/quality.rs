//! Spectrogram quality versus sensing power.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::{synthesize_frame, ChirpParams, PrimitiveSet, RawFrame};
use super::ssim::ssim;
use super::stft::{integrated_spectrogram, Spectrogram};
use super::svd::svd_band_filter;
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::units::w_to_dbm;

/// Clutter-plus-noise PSD (W/Hz) of the default scene.
pub const DEFAULT_CLUTTER_PSD: f64 = 3e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityOptions {
    /// Relative distance to the top-power SSIM that counts as saturated.
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for QualityOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.02,
            trials: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityPoint {
    pub p_s_w: f64,
    pub ssim_mean: f64,
    /// Sample standard deviation over trials (0 for a single trial).
    pub ssim_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityCurve {
    pub points: Vec<QualityPoint>,
    /// Smallest power whose mean SSIM reaches `(1−ε)` of the top-power value.
    pub threshold_w: f64,
    /// Mean SSIM at the highest power.
    pub saturation_ssim: f64,
}

impl QualityCurve {
    pub fn powers(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.p_s_w).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.ssim_mean).collect()
    }

    /// Isotonic (non-decreasing) fit of the mean SSIM column.
    pub fn fitted(&self) -> Vec<f64> {
        isotonic_fit(&self.means())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("power_dbm,ssim_mean,ssim_std\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_float(w_to_dbm(p.p_s_w)),
                fmt_float(p.ssim_mean),
                fmt_float(p.ssim_std)
            ));
        }
        out
    }
}

/// Least-squares non-decreasing fit by pool-adjacent-violators.
pub fn isotonic_fit(values: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s1, n1) = blocks[blocks.len() - 1];
            let (s0, n0) = blocks[blocks.len() - 2];
            if s0 / n0 as f64 > s1 / n1 as f64 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (s0 + s1, n0 + n1);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, n)| std::iter::repeat_n(s / n as f64, n))
        .collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for one (power, trial) cell, independent of evaluation order.
pub fn trial_seed(master: u64, p_s: f64, trial: usize) -> u64 {
    splitmix64(splitmix64(master ^ p_s.to_bits()) ^ trial as u64)
}

fn process(frame: &RawFrame, cp: &ChirpParams) -> Result<Spectrogram> {
    let filtered = svd_band_filter(frame, cp.band_lo, cp.band_hi)?;
    integrated_spectrogram(&filtered, cp)
}

/// Spectrogram of the filtered received frame and of the noise-free
/// first-order reference, both through the same SVD and STFT chain.
pub fn spectrogram_pair(
    prims: &PrimitiveSet,
    cp: &ChirpParams,
    p_s: f64,
    clutter_psd: f64,
    seed: u64,
) -> Result<(Spectrogram, Spectrogram)> {
    let frame = synthesize_frame(prims, cp, p_s, clutter_psd, seed)?;
    let received = process(&frame.received(), cp)?.with_provenance(p_s, seed);
    let reference = process(frame.reference(), cp)?.with_provenance(p_s, seed);
    Ok((received, reference))
}

pub fn quality_vs_power(
    prims: &PrimitiveSet,
    cp: &ChirpParams,
    powers: &[f64],
    clutter_psd: f64,
    opts: &QualityOptions,
) -> Result<QualityCurve> {
    cp.validate()?;
    prims.validate()?;
    if powers.is_empty() {
        return Err(Error::InvalidParameter("need at least one power".into()));
    }
    if powers.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter("sensing powers must be > 0".into()));
    }
    if powers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "sensing powers must be strictly increasing".into(),
        ));
    }
    if opts.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&opts.epsilon) {
        return Err(Error::InvalidParameter("epsilon must be in [0, 1)".into()));
    }

    let cells: Vec<(usize, usize)> = (0..powers.len())
        .flat_map(|i| (0..opts.trials).map(move |t| (i, t)))
        .collect();
    let scores = cells
        .par_iter()
        .map(|&(i, t)| {
            let p = powers[i];
            let (rx, reference) =
                spectrogram_pair(prims, cp, p, clutter_psd, trial_seed(opts.seed, p, t))?;
            ssim(&rx, &reference)
        })
        .collect::<Result<Vec<f64>>>()?;

    let points: Vec<QualityPoint> = scores
        .chunks(opts.trials)
        .zip(powers)
        .map(|(s, &p)| {
            let n = s.len() as f64;
            let mean = s.iter().sum::<f64>() / n;
            let std = if s.len() > 1 {
                (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            QualityPoint {
                p_s_w: p,
                ssim_mean: mean,
                ssim_std: std,
            }
        })
        .collect();

    let saturation_ssim = points.last().unwrap().ssim_mean;
    let target = (1.0 - opts.epsilon) * saturation_ssim;
    let threshold_w = points
        .iter()
        .find(|p| p.ssim_mean >= target)
        .map(|p| p.p_s_w)
        .unwrap_or(*powers.last().unwrap());
    Ok(QualityCurve {
        points,
        threshold_w,
        saturation_ssim,
    })
}
