//! Slow-time STFT with range-bin integration.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::scene::{ChirpParams, Integration, RawFrame, WindowKind};
use crate::error::{Error, Result};

/// Non-negative time-frequency map, `rows` Doppler bins by `cols` STFT
/// frames, stored row-major. Bins are in natural DFT order (bin 0 is DC,
/// bins above `rows/2` are negative frequencies). Entries are squared
/// magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Sensing power the frame was synthesised with (W), if known.
    pub power_w: Option<f64>,
    /// Clutter seed, if known.
    pub seed: Option<u64>,
}

impl Spectrogram {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} spectrogram",
                data.len()
            )));
        }
        if data.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain("spectrogram entries must be finite and >= 0".into()));
        }
        Ok(Self {
            rows,
            cols,
            data,
            power_w: None,
            seed: None,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |r| self.get(r, col))
    }

    /// Row index of the largest entry in `col` (first on ties).
    pub fn peak_bin(&self, col: usize) -> usize {
        let mut best = 0;
        for r in 1..self.rows {
            if self.get(r, col) > self.get(best, col) {
                best = r;
            }
        }
        best
    }

    pub fn with_provenance(mut self, power_w: f64, seed: u64) -> Self {
        self.power_w = Some(power_w);
        self.seed = Some(seed);
        self
    }
}

pub fn window_coefficients(kind: WindowKind, len: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; len],
        // periodic Hann
        WindowKind::Hann => (0..len)
            .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / len as f64).cos())
            .collect(),
    }
}

/// Windowed DFT over slow time (hop `W−Q`) for every fast-time row, then
/// integration over rows. Coherent integration sums the complex STFT values
/// and squares the magnitude last; non-coherent sums per-row squared
/// magnitudes. Output shape is `W × ⌊(M−Q)/(W−Q)⌋`.
pub fn integrated_spectrogram(frame: &RawFrame, cp: &ChirpParams) -> Result<Spectrogram> {
    let (w, q) = (cp.window, cp.overlap);
    if w == 0 || q >= w {
        return Err(Error::InvalidParameter(format!("need 0 <= Q < W, got W = {w}, Q = {q}")));
    }
    let m = frame.ncols();
    if w > m {
        return Err(Error::DimensionMismatch(format!("window {w} longer than {m} chirps")));
    }
    let hop = w - q;
    let frames = (m - q) / hop;
    let win = window_coefficients(cp.window_kind, w);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(w);

    let rows: Vec<Vec<Complex64>> = match cp.integration {
        Integration::Coherent => {
            let summed = (0..m).map(|c| frame.data.column(c).iter().sum()).collect();
            vec![summed]
        }
        Integration::Noncoherent => (0..frame.nrows())
            .map(|r| frame.data.row(r).iter().copied().collect())
            .collect(),
    };

    let mut out = vec![0.0; w * frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); w];
    for series in &rows {
        for n in 0..frames {
            let start = n * hop;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = series[start + i] * win[i];
            }
            fft.process(&mut buf);
            for (f, z) in buf.iter().enumerate() {
                out[f * frames + n] += z.norm_sqr();
            }
        }
    }
    Spectrogram::new(w, frames, out)
}
