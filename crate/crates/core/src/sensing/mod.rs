//! Wireless sensing pipeline: FMCW echo synthesis from point primitives,
//! SVD band filtering, integrated STFT spectrograms and SSIM scoring.

mod quality;
mod scene;
mod ssim;
mod stft;
mod svd;

pub use quality::{
    isotonic_fit, quality_vs_power, spectrogram_pair, trial_seed, QualityCurve, QualityOptions,
    QualityPoint, DEFAULT_CLUTTER_PSD,
};
pub use scene::{
    default_scene, synthesize_frame, ChirpParams, Integration, Primitive, PrimitiveSet, RawFrame,
    ScatterOrder, SynthesizedFrame, WindowKind,
};
pub use ssim::{ssim, SSIM_WINDOW};
pub use stft::{integrated_spectrogram, window_coefficients, Spectrogram};
pub use svd::{svd_band_filter, SvdBandFilter};
