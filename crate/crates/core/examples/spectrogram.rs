//! One radar frame from synthesis to spectrogram: SVD band filtering,
//! integrated STFT, a text rendering, and a binary round-trip.

use feel_sc2::io::{read_spectrogram, write_spectrogram};
use feel_sc2::sensing::{
    default_scene, integrated_spectrogram, spectrogram_pair, ssim, svd_band_filter, synthesize_frame, ChirpParams,
    SvdBandFilter, DEFAULT_CLUTTER_PSD,
};

fn render(s: &feel_sc2::sensing::Spectrogram) {
    let peak = s.max();
    for r in 0..s.rows {
        let line: String = (0..s.cols)
            .map(|c| {
                let v = s.get(r, c) / peak;
                match v {
                    v if v > 0.5 => '#',
                    v if v > 0.1 => '+',
                    v if v > 0.01 => '.',
                    _ => ' ',
                }
            })
            .collect();
        println!("  bin {r:>2} |{line}|");
    }
}

fn main() -> feel_sc2::Result<()> {
    let cp = ChirpParams::default();
    let scene = default_scene();
    let frame = synthesize_frame(&scene, &cp, 0.1, DEFAULT_CLUTTER_PSD, 5)?;
    let rx = frame.received();

    let svd = SvdBandFilter::fit(&rx, cp.band_lo, cp.band_hi)?;
    let sv: Vec<String> = svd.singular_values.iter().take(5).map(|v| format!("{v:.3e}")).collect();
    println!("leading singular values: {}", sv.join(" "));

    let filtered = svd_band_filter(&rx, cp.band_lo, cp.band_hi)?;
    let spec = integrated_spectrogram(&filtered, &cp)?;
    println!("{}x{} spectrogram, peak {:.3e}", spec.rows, spec.cols, spec.max());
    render(&spec);

    let (received, reference) = spectrogram_pair(&scene, &cp, 0.1, DEFAULT_CLUTTER_PSD, 5)?;
    println!("SSIM against the first-order reference: {:.4}", ssim(&received, &reference)?);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("frame.spec");
    write_spectrogram(&path, &received)?;
    assert_eq!(read_spectrogram(&path)?, received);
    println!("round-trip through {} ok", path.display());
    Ok(())
}
