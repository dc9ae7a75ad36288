//! Exponential integral on the negative real axis and a one-dimensional
//! grid search used by the power allocator.
//!
//! `Ei(x)` for `x < 0` equals `-E1(-x)`. Small arguments go through the
//! convergent power series around the origin; larger ones through the
//! continued fraction for `E1`, evaluated with the modified Lentz method.
//! The continued fraction naturally yields `e^z E1(z)`, which is what the
//! ergodic-capacity formula needs, so that scaled form is exposed as well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `|x|` at or below which the power series is used.
pub const SERIES_CUTOFF: f64 = 1.0;

const LENTZ_TINY: f64 = 1.0e-300;
const LENTZ_EPS: f64 = 1.0e-16;
const LENTZ_MAX_ITER: usize = 10_000;

/// Power series `γ + ln|x| + Σ xᵏ/(k·k!)`. Accurate for moderate `|x|`;
/// the alternating terms cancel badly once `|x|` grows past a few units.
pub(crate) fn ei_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    let head = EULER_GAMMA + x.abs().ln();
    for k in 1..500 {
        let kf = k as f64;
        term *= x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * 0.25 * (head + sum).abs().max(sum.abs()) {
            break;
        }
    }
    head + sum
}

/// `e^z E1(z)` for `z > 0` via the continued fraction
/// `1/(z+1- 1/(z+3- 4/(z+5- ...)))`.
pub(crate) fn e1_scaled_continued_fraction(z: f64) -> f64 {
    let mut b = z + 1.0;
    let mut c = 1.0 / LENTZ_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..LENTZ_MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.abs() < LENTZ_TINY {
            d = LENTZ_TINY;
        }
        c = b + an / c;
        if c.abs() < LENTZ_TINY {
            c = LENTZ_TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < LENTZ_EPS {
            break;
        }
    }
    h
}

/// Exponential integral `Ei(x) = ∫_{-∞}^{x} e^ρ/ρ dρ` for `x < 0`.
///
/// Returns `0` once `e^x` underflows.
pub fn expint_ei(x: f64) -> Result<f64> {
    if !x.is_finite() || x >= 0.0 {
        return Err(Error::Domain(format!(
            "Ei is only provided for finite negative arguments, got {x}"
        )));
    }
    let z = -x;
    if z <= SERIES_CUTOFF {
        Ok(ei_series(x))
    } else if z > 745.0 {
        Ok(0.0)
    } else {
        Ok(-e1_scaled_continued_fraction(z) * (-z).exp())
    }
}

/// `e^z E1(z) = -e^z Ei(-z)` for `z > 0`, without overflow for large `z`.
pub fn exp_e1_scaled(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Domain(format!(
            "scaled E1 needs a finite positive argument, got {z}"
        )));
    }
    if z <= SERIES_CUTOFF {
        Ok(-z.exp() * ei_series(-z))
    } else {
        Ok(e1_scaled_continued_fraction(z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Logarithmic,
}

/// Closed interval sampled at `points` locations, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Result<Self> {
        let grid = Self {
            lo,
            hi,
            points,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn linear(lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(lo, hi, points, Spacing::Linear)
    }

    pub fn logarithmic(lo: f64, hi: f64, points: usize) -> Result<Self> {
        Self::new(lo, hi, points, Spacing::Logarithmic)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo >= self.hi {
            return Err(Error::InvalidParameter(format!(
                "grid needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {}",
                self.points
            )));
        }
        if self.spacing == Spacing::Logarithmic && self.lo <= 0.0 {
            return Err(Error::InvalidParameter(
                "logarithmic grid needs lo > 0".into(),
            ));
        }
        Ok(())
    }

    /// Grid locations in ascending order; the last one is exactly `hi`.
    pub fn points(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut xs: Vec<f64> = match self.spacing {
            Spacing::Linear => {
                let step = (self.hi - self.lo) / last;
                (0..n).map(|i| self.lo + step * i as f64).collect()
            }
            Spacing::Logarithmic => {
                let (a, b) = (self.lo.ln(), self.hi.ln());
                let step = (b - a) / last;
                (0..n).map(|i| (a + step * i as f64).exp()).collect()
            }
        };
        xs[0] = self.lo;
        xs[n - 1] = self.hi;
        xs
    }
}

fn checked<F>(f: &mut F, x: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    match f(x) {
        Ok(v) if v.is_nan() => Err(Error::Evaluation {
            x,
            source: Box::new(Error::Domain("objective returned NaN".into())),
        }),
        Ok(v) => Ok(v),
        Err(e) => Err(Error::Evaluation {
            x,
            source: Box::new(e),
        }),
    }
}

fn argmax_points<F>(f: &mut F, xs: &[f64]) -> Result<(usize, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut best = (0, checked(f, xs[0])?);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        let v = checked(f, x)?;
        // strict: ties stay at the smaller x
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}

/// Grid point with the largest objective; ties go to the smallest `x`.
pub fn argmax_on_grid<F>(mut f: F, grid: &GridSpec) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    grid.validate()?;
    let xs = grid.points();
    let (i, v) = argmax_points(&mut f, &xs)?;
    Ok((xs[i], v))
}

/// Coarse grid search followed by one linear pass of `refine_points`
/// spanning the two neighbours of the coarse optimum.
pub fn argmax_refined<F>(mut f: F, grid: &GridSpec, refine_points: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    grid.validate()?;
    let xs = grid.points();
    let (i, v) = argmax_points(&mut f, &xs)?;
    if refine_points < 2 {
        return Ok((xs[i], v));
    }
    let lo = xs[i.saturating_sub(1)];
    let hi = xs[(i + 1).min(xs.len() - 1)];
    let fine = GridSpec::linear(lo, hi, refine_points)?.points();
    let (j, w) = argmax_points(&mut f, &fine)?;
    let (xf, xc) = (fine[j], xs[i]);
    if w > v || (w == v && xf < xc) {
        Ok((xf, w))
    } else {
        Ok((xc, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // reference values from a 60-digit evaluation of γ + ln|x| + Σ xᵏ/(k·k!)
    #[test]
    fn ei_reference_points() {
        let cases = [
            (-1.0, -0.219_383_934_395_520_273_677_163_8),
            (-0.001, -6.331_539_364_136_149_332_002_786),
            (-0.5, -0.559_773_594_776_160_811_746_795_9),
            (-5.0, -0.001_148_295_591_275_325_797_330_562),
            (-40.0, -1.036_773_261_451_656_972_150_642e-19),
            (-100.0, -3.683_597_761_682_032_180_235_193e-46),
            (-1e-6, -13.238_295_893_062_491_243_556_99),
            (-700.0, -1.406_518_766_234_032_922_774_411e-307),
        ];
        for (x, want) in cases {
            let got = expint_ei(x).unwrap();
            assert!(rel(got, want) < 1e-12, "Ei({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn ei_underflow_and_domain() {
        assert!(expint_ei(-745.0).unwrap().abs() < 1e-300);
        assert_eq!(expint_ei(-1e6).unwrap(), 0.0);
        assert!(expint_ei(0.0).is_err());
        assert!(expint_ei(1.0).is_err());
        assert!(expint_ei(f64::NAN).is_err());
        assert!(expint_ei(f64::NEG_INFINITY).is_err());
        let tiny = expint_ei(-1e-300).unwrap();
        assert!(rel(tiny, EULER_GAMMA + (1e-300f64).ln()) < 1e-15);
    }

    #[test]
    fn branches_agree_on_overlap() {
        // the series loses ~e^{2|x|} ulps to cancellation, so the usable
        // overlap with the continued fraction stops around |x| = 5
        let grid = GridSpec::logarithmic(0.5, 5.0, 400).unwrap();
        for z in grid.points() {
            let series = ei_series(-z);
            let cf = -e1_scaled_continued_fraction(z) * (-z).exp();
            assert!(rel(series, cf) < 1e-10, "z = {z}: {series} vs {cf}");
        }
    }

    #[test]
    fn scaled_e1_matches_unscaled() {
        for z in [0.01, 0.7, 1.0, 2.5, 30.0, 300.0] {
            let scaled = exp_e1_scaled(z).unwrap();
            let direct = -expint_ei(-z).unwrap() * z.exp();
            assert!(rel(scaled, direct) < 1e-12, "z = {z}");
        }
        // e^z E1(z) ~ 1/z for large z
        let z = 1e8;
        assert!(rel(exp_e1_scaled(z).unwrap(), 1.0 / z) < 1e-7);
    }

    proptest! {
        #[test]
        fn ei_strictly_decreasing_on_negative_axis(mut xs in proptest::collection::vec(-60.0f64..-1e-3, 2..40)) {
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            xs.dedup();
            for w in xs.windows(2) {
                // Ei'(x) = e^x/x < 0: Ei rises towards 0 as x -> -inf
                prop_assert!(expint_ei(w[0]).unwrap() > expint_ei(w[1]).unwrap());
            }
        }

        #[test]
        fn refinement_never_loses_much(c in 0.1f64..3.9, n in 5usize..200) {
            // f is 2-Lipschitz on [0, 4]
            let f = |x: f64| Ok(-(x - c).abs() * 2.0);
            let g1 = GridSpec::linear(0.0, 4.0, n).unwrap();
            let g2 = GridSpec::linear(0.0, 4.0, 2 * n).unwrap();
            let (_, v1) = argmax_on_grid(f, &g1).unwrap();
            let (_, v2) = argmax_on_grid(f, &g2).unwrap();
            let spacing = 4.0 / (2 * n - 1) as f64;
            prop_assert!(v2 >= v1 - 2.0 * spacing - 1e-12);
        }
    }

    #[test]
    fn quadratic_peak_on_grid() {
        let grid = GridSpec::linear(0.0, 4.0, 401).unwrap();
        let (x, v) = argmax_on_grid(|x| Ok(-(x - 2.0) * (x - 2.0)), &grid).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
        assert!(v.abs() < 1e-20);
    }

    #[test]
    fn constant_ties_to_lower_bound() {
        let grid = GridSpec::logarithmic(0.25, 8.0, 50).unwrap();
        let (x, _) = argmax_on_grid(|_| Ok(1.0), &grid).unwrap();
        assert_eq!(x, 0.25);
        let (x, _) = argmax_refined(|_| Ok(1.0), &grid, 20).unwrap();
        assert_eq!(x, 0.25);
    }

    #[test]
    fn evaluation_failure_names_point() {
        let grid = GridSpec::linear(0.0, 1.0, 11).unwrap();
        let err = argmax_on_grid(
            |x| {
                if x > 0.45 {
                    Err(Error::Domain("boom".into()))
                } else {
                    Ok(x)
                }
            },
            &grid,
        )
        .unwrap_err();
        match err {
            Error::Evaluation { x, .. } => assert!((x - 0.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::linear(1.0, 1.0, 10).is_err());
        assert!(GridSpec::linear(0.0, 1.0, 1).is_err());
        assert!(GridSpec::logarithmic(0.0, 1.0, 10).is_err());
        let g = GridSpec::logarithmic(1e-6, 0.1, 2000).unwrap().points();
        assert_eq!(g[0], 1e-6);
        assert_eq!(*g.last().unwrap(), 0.1);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refined_search_finds_interior_peak() {
        let grid = GridSpec::logarithmic(1e-6, 1.0, 2000).unwrap();
        let peak: f64 = 0.012_345_678;
        let (x, _) = argmax_refined(|x| Ok(-(x.ln() - peak.ln()).powi(2)), &grid, 200).unwrap();
        assert!(rel(x, peak) < 1e-4);
    }
}
