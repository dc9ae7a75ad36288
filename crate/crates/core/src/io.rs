//! Result emission: atomic file writes, replayable float formatting and a
//! small binary container for spectrograms.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sensing::Spectrogram;

/// 17 significant digits in scientific notation; parses back to the same
/// bits and never depends on locale.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes via a temporary file in the target directory and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct SpectrogramHeader {
    rows: usize,
    cols: usize,
    power_w: Option<f64>,
    seed: Option<u64>,
}

/// One JSON header line (`rows`, `cols`, `power_w`, `seed`), a newline, then
/// `rows·cols` little-endian f64 values in row-major order.
pub fn encode_spectrogram(s: &Spectrogram) -> Result<Vec<u8>> {
    let header = SpectrogramHeader {
        rows: s.rows,
        cols: s.cols,
        power_w: s.power_w,
        seed: s.seed,
    };
    let mut out = serde_json::to_vec(&header)?;
    out.push(b'\n');
    out.reserve(s.data.len() * 8);
    for v in &s.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_spectrogram(bytes: &[u8]) -> Result<Spectrogram> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Config("spectrogram file has no header line".into()))?;
    let header: SpectrogramHeader = serde_json::from_slice(&bytes[..nl])?;
    let body = &bytes[nl + 1..];
    if body.len() != header.rows * header.cols * 8 {
        return Err(Error::DimensionMismatch(format!(
            "{} payload bytes for a {}x{} spectrogram",
            body.len(),
            header.rows,
            header.cols
        )));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let mut s = Spectrogram::new(header.rows, header.cols, data)?;
    s.power_w = header.power_w;
    s.seed = header.seed;
    Ok(s)
}

pub fn write_spectrogram(path: &Path, s: &Spectrogram) -> Result<()> {
    write_atomic(path, &encode_spectrogram(s)?)
}

pub fn read_spectrogram(path: &Path) -> Result<Spectrogram> {
    decode_spectrogram(&std::fs::read(path)?)
}
