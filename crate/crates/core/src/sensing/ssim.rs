//! Structural similarity between spectrograms.

use super::stft::Spectrogram;
use crate::error::{Error, Result};

/// Side of the square sliding window. Clamped to the image size when the
/// image is smaller.
pub const SSIM_WINDOW: usize = 8;

const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

/// Mean local SSIM over all `8×8` windows (stride 1, uniform weights) after
/// dividing both images by their shared maximum.
pub fn ssim(a: &Spectrogram, b: &Spectrogram) -> Result<f64> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::DimensionMismatch(format!(
            "ssim of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if a.data.is_empty() {
        return Err(Error::InvalidParameter("ssim of empty images".into()));
    }
    let peak = a.max().max(b.max());
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    let x: Vec<f64> = a.data.iter().map(|v| v * scale).collect();
    let y: Vec<f64> = b.data.iter().map(|v| v * scale).collect();

    let (rows, cols) = (a.rows, a.cols);
    let wr = SSIM_WINDOW.min(rows);
    let wc = SSIM_WINDOW.min(cols);
    let n = (wr * wc) as f64;
    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=rows - wr {
        for c0 in 0..=cols - wc {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in r0..r0 + wr {
                for c in c0..c0 + wc {
                    let (u, v) = (x[r * cols + c], y[r * cols + c]);
                    sx += u;
                    sy += v;
                    sxx += u * u;
                    syy += v * v;
                    sxy += u * v;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = sxx / n - mx * mx;
            let vy = syy / n - my * my;
            let cov = sxy / n - mx * my;
            total += ((2.0 * mx * my + C1) * (2.0 * cov + C2))
                / ((mx * mx + my * my + C1) * (vx + vy + C2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}
