//! Singular-value band filter.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::scene::RawFrame;
use crate::error::{Error, Result};

/// Singular triplets `lo..=hi` (1-based, descending order) of a fitted frame.
///
/// [`SvdBandFilter::reconstruct`] rebuilds the fitted frame from the band;
/// [`SvdBandFilter::apply`] projects any same-shape frame onto the band's
/// left and right singular subspaces, `U_b·U_bᴴ·X·V_b·V_bᴴ`. The projector
/// form is idempotent for any band.
#[derive(Debug, Clone)]
pub struct SvdBandFilter {
    pub lo: usize,
    pub hi: usize,
    /// All singular values of the fitted frame, descending.
    pub singular_values: Vec<f64>,
    u_band: DMatrix<Complex64>,
    v_band: DMatrix<Complex64>,
}

impl SvdBandFilter {
    pub fn fit(frame: &RawFrame, lo: usize, hi: usize) -> Result<Self> {
        let (rows, cols) = frame.data.shape();
        let rank = rows.min(cols);
        if !(1 <= lo && lo <= hi && hi <= rank) {
            return Err(Error::InvalidParameter(format!(
                "SVD band [{lo}, {hi}] outside [1, {rank}]"
            )));
        }
        if frame.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("frame has non-finite entries".into()));
        }
        let svd = frame.data.clone().svd(true, true);
        let u = svd.u.expect("left vectors requested");
        let v_t = svd.v_t.expect("right vectors requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

        let band = &order[lo - 1..hi];
        let k = band.len();
        let mut u_band = DMatrix::zeros(rows, k);
        let mut v_band = DMatrix::zeros(cols, k);
        for (j, &i) in band.iter().enumerate() {
            u_band.set_column(j, &u.column(i));
            v_band.set_column(j, &v_t.row(i).adjoint());
        }
        Ok(Self {
            lo,
            hi,
            singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
            u_band,
            v_band,
        })
    }

    pub fn band_singular_values(&self) -> &[f64] {
        &self.singular_values[self.lo - 1..self.hi]
    }

    /// Rank-`(hi−lo+1)` reconstruction of the fitted frame.
    pub fn reconstruct(&self) -> RawFrame {
        let sigma = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.hi - self.lo + 1,
            self.band_singular_values().iter().map(|&s| Complex64::new(s, 0.0)),
        ));
        RawFrame {
            data: &self.u_band * sigma * self.v_band.adjoint(),
        }
    }

    pub fn apply(&self, frame: &RawFrame) -> Result<RawFrame> {
        if frame.data.nrows() != self.u_band.nrows() || frame.data.ncols() != self.v_band.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "filter fitted on {}x{}, got {}x{}",
                self.u_band.nrows(),
                self.v_band.nrows(),
                frame.data.nrows(),
                frame.data.ncols()
            )));
        }
        let left = &self.u_band * (self.u_band.adjoint() * &frame.data);
        Ok(RawFrame {
            data: (left * &self.v_band) * self.v_band.adjoint(),
        })
    }
}

/// Keeps singular components `r_a..=r_b` of `frame`.
pub fn svd_band_filter(frame: &RawFrame, r_a: usize, r_b: usize) -> Result<RawFrame> {
    Ok(SvdBandFilter::fit(frame, r_a, r_b)?.reconstruct())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rows: usize, cols: usize, seed: u64) -> RawFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RawFrame {
            data: DMatrix::from_fn(rows, cols, |_, _| {
                Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            }),
        }
    }

    fn rel(a: &RawFrame, b: &RawFrame) -> f64 {
        (&a.data - &b.data).norm() / b.data.norm()
    }

    /// Unitary Q from a QR of a random matrix.
    fn unitary(n: usize, k: usize, seed: u64) -> DMatrix<Complex64> {
        let q = random_frame(n, k, seed).data.qr().q();
        q.columns(0, k).into_owned()
    }

    #[test]
    fn full_band_is_identity() {
        let f = random_frame(30, 12, 1);
        let out = svd_band_filter(&f, 1, 12).unwrap();
        assert!(rel(&out, &f) < 1e-10);
    }

    #[test]
    fn rank_one_exact() {
        let u = random_frame(20, 1, 2).data;
        let v = random_frame(8, 1, 3).data;
        let f = RawFrame { data: &u * v.adjoint() };
        let out = svd_band_filter(&f, 1, 1).unwrap();
        assert!(rel(&out, &f) < 1e-12);
    }

    #[test]
    fn middle_component_norm() {
        let u = unitary(6, 3, 4);
        let v = unitary(5, 3, 5);
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(10.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.1, 0.0),
        ]));
        let f = RawFrame { data: &u * s * v.adjoint() };
        let out = svd_band_filter(&f, 2, 2).unwrap();
        assert!((out.frobenius() - 1.0).abs() < 1e-9);
        let filt = SvdBandFilter::fit(&f, 1, 3).unwrap();
        let sv = &filt.singular_values;
        assert!((sv[0] - 10.0).abs() < 1e-9 && (sv[1] - 1.0).abs() < 1e-9 && (sv[2] - 0.1).abs() < 1e-9);
    }

    #[test]
    fn output_rank_bounded() {
        let f = random_frame(25, 10, 6);
        let out = svd_band_filter(&f, 3, 5).unwrap();
        let sv = out.data.singular_values();
        let big = sv.iter().filter(|&&s| s > 1e-10 * sv.max()).count();
        assert_eq!(big, 3);
    }

    #[test]
    fn projector_idempotent_for_any_band() {
        let f = random_frame(25, 10, 7);
        for (lo, hi) in [(1, 1), (2, 4), (1, 10), (5, 10)] {
            let filt = SvdBandFilter::fit(&f, lo, hi).unwrap();
            let once = filt.apply(&f).unwrap();
            let twice = filt.apply(&once).unwrap();
            assert!(rel(&twice, &once) < 1e-10, "band {lo}..{hi}");
            assert!(rel(&once, &filt.reconstruct()) < 1e-10);
        }
    }

    #[test]
    fn refit_idempotent_for_leading_band() {
        let f = random_frame(25, 10, 8);
        let once = svd_band_filter(&f, 1, 1).unwrap();
        let twice = svd_band_filter(&once, 1, 1).unwrap();
        assert!(rel(&twice, &once) < 1e-10);
    }

    #[test]
    fn bad_band_rejected() {
        let f = random_frame(5, 4, 9);
        assert!(svd_band_filter(&f, 0, 1).is_err());
        assert!(svd_band_filter(&f, 2, 1).is_err());
        assert!(svd_band_filter(&f, 1, 5).is_err());
        let filt = SvdBandFilter::fit(&f, 1, 2).unwrap();
        assert!(filt.apply(&random_frame(4, 4, 1)).is_err());
    }
}
