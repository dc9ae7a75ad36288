//! Spectrogram quality against sensing power: mean SSIM per power, its
//! monotone fit, and the power at which quality saturates.

use feel_sc2::sensing::{default_scene, quality_vs_power, ChirpParams, QualityOptions, DEFAULT_CLUTTER_PSD};
use feel_sc2::units::{dbm_to_w, w_to_dbm};

fn main() -> feel_sc2::Result<()> {
    let dbm: Vec<f64> = (0..=15).map(|i| 2.0 * i as f64).collect();
    let powers: Vec<f64> = dbm.iter().map(|&d| dbm_to_w(d)).collect();
    let opts = QualityOptions::default();
    let curve = quality_vs_power(&default_scene(), &ChirpParams::default(), &powers, DEFAULT_CLUTTER_PSD, &opts)?;
    let fitted = curve.fitted();
    println!("{:>7} {:>8} {:>8} {:>8}", "dBm", "mean", "std", "fitted");
    for (p, f) in curve.points.iter().zip(&fitted) {
        println!("{:>7.1} {:>8.4} {:>8.4} {:>8.4}", w_to_dbm(p.p_s_w), p.ssim_mean, p.ssim_std, f);
    }
    println!(
        "saturates at {:.1} dBm (SSIM {:.4}, epsilon {})",
        w_to_dbm(curve.threshold_w),
        curve.saturation_ssim,
        opts.epsilon
    );
    Ok(())
}
