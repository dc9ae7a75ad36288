//! Step 2: splitting the sample budget `b_sum` across communication rounds.
//!
//! The fixed-batch convergence bound and its budget-constrained variant
//! give the best constant batch size. Since the loss decays roughly like
//! `1/r`, the per-round optimum grows like `√r`, which yields the planner
//! `b(r) = ⌊α·√r + b0⌋` with `α` chosen to spend the whole budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the SGD convergence bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundParams {
    pub eta: f64,
    pub l_smooth: f64,
    pub sigma2: f64,
    pub beta: f64,
    pub tau: u32,
    pub k: usize,
    pub f1: f64,
    pub f_inf: f64,
}

impl Default for BoundParams {
    /// `L`, `σ²` and `F1` are illustrative; they are never estimated.
    fn default() -> Self {
        Self {
            eta: 0.1,
            l_smooth: 1.0,
            sigma2: 1.0,
            beta: 0.0,
            tau: 10,
            k: 6,
            f1: 1.0,
            f_inf: 0.0,
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("L", self.l_smooth), ("sigma2", self.sigma2), ("F1", self.f1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.tau == 0 || self.k == 0 {
            return Err(Error::InvalidParameter("tau and K must be >= 1".into()));
        }
        if !(self.f_inf >= 0.0 && self.f1 > self.f_inf) {
            return Err(Error::InvalidParameter(format!(
                "need F1 > F_inf >= 0, got F1 = {}, F_inf = {}",
                self.f1, self.f_inf
            )));
        }
        Ok(())
    }

    /// `ηL + η²L²τ(τ−1) <= 1`, the step-size premise of the bound.
    pub fn learning_rate_condition(&self) -> bool {
        let el = self.eta * self.l_smooth;
        let tau = self.tau as f64;
        el + el * el * tau * (tau - 1.0) <= 1.0
    }

    fn gap(&self) -> f64 {
        self.f1 - self.f_inf
    }

    /// `ηLσ²/K + η²L²σ²τ`, the numerator of the `1/b` variance terms.
    fn variance_numerator(&self) -> f64 {
        let (e, l, s) = (self.eta, self.l_smooth, self.sigma2);
        e * l * s / self.k as f64 + e * e * l * l * s * self.tau as f64
    }
}

/// Average squared gradient norm bound after `rounds` rounds at batch `b`.
pub fn lemma1_bound(bp: &BoundParams, b: u64, rounds: u64) -> Result<f64> {
    if b == 0 || rounds == 0 {
        return Err(Error::InvalidParameter("b and R must be >= 1".into()));
    }
    let first = 2.0 * bp.gap() / (bp.eta * rounds as f64 * bp.tau as f64);
    Ok(first + bp.variance_numerator() / b as f64)
}

/// Same bound with `R = b_sum/b`, i.e. for a fixed total sample count.
pub fn prop2_bound(bp: &BoundParams, b: u64, b_sum: u64) -> Result<f64> {
    if b == 0 || b_sum == 0 {
        return Err(Error::InvalidParameter("b and b_sum must be >= 1".into()));
    }
    let first = 2.0 * bp.gap() * b as f64 / (bp.eta * bp.tau as f64 * b_sum as f64);
    Ok(first + bp.variance_numerator() / b as f64)
}

/// Continuous minimiser `√(η²Lσ²τ·b_sum·(1+ηKLτ) / (2K(F1−F_inf)))`.
pub fn optimal_batch_continuous(bp: &BoundParams, b_sum: u64) -> f64 {
    let (e, l, s, t, k) = (bp.eta, bp.l_smooth, bp.sigma2, bp.tau as f64, bp.k as f64);
    (e * e * l * s * t * b_sum as f64 * (1.0 + e * k * l * t) / (2.0 * k * bp.gap())).sqrt()
}

/// Best constant batch for a total of `b_sum` samples. The bound is convex
/// in `b`, so the integer optimum is the floor or the ceiling of the
/// continuous minimiser, whichever gives the smaller bound (ties go low).
pub fn optimal_fixed_batch(bp: &BoundParams, b_sum: u64) -> Result<u64> {
    bp.validate()?;
    if b_sum == 0 {
        return Err(Error::InvalidParameter("b_sum must be >= 1".into()));
    }
    let x = optimal_batch_continuous(bp, b_sum);
    let lo = (x.floor() as u64).clamp(1, b_sum);
    let hi = (x.ceil() as u64).clamp(1, b_sum);
    if lo == hi {
        return Ok(lo);
    }
    if prop2_bound(bp, hi, b_sum)? < prop2_bound(bp, lo, b_sum)? {
        Ok(hi)
    } else {
        Ok(lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleScheme {
    AdaptiveSqrt,
    Equal,
    DecreasingSqrt,
    LossRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSchedule {
    pub batches: Vec<u64>,
    pub b0: u64,
    pub alpha: f64,
    pub scheme: ScheduleScheme,
}

impl BatchSchedule {
    pub fn total(&self) -> u64 {
        self.batches.iter().sum()
    }

    pub fn rounds(&self) -> usize {
        self.batches.len()
    }

    /// `round,batch` lines, rounds counted from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,batch\n");
        for (r, b) in self.batches.iter().enumerate() {
            out.push_str(&format!("{},{}\n", r + 1, b));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Vec<u64>> {
        let mut lines = text.lines();
        match lines.next() {
            Some("round,batch") => {}
            other => return Err(Error::Config(format!("bad schedule header {other:?}"))),
        }
        lines
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.split(',')
                    .nth(1)
                    .and_then(|b| b.parse().ok())
                    .ok_or_else(|| Error::Config(format!("bad schedule line {l:?}")))
            })
            .collect()
    }
}

fn sqrt_weights(rounds: usize) -> (Vec<f64>, f64) {
    let w: Vec<f64> = (1..=rounds).map(|r| (r as f64).sqrt()).collect();
    let total = w.iter().sum();
    (w, total)
}

fn check_budget(b_sum: u64, rounds: usize, b0: u64) -> Result<()> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("R must be >= 1".into()));
    }
    if b0 == 0 || b0 * rounds as u64 > b_sum {
        return Err(Error::InvalidParameter(format!(
            "b0 = {b0} must satisfy 1 <= b0 <= b_sum/R = {}",
            b_sum as f64 / rounds as f64
        )));
    }
    Ok(())
}

/// The `√r` planner. After flooring, rounds with the largest fractional
/// parts (later rounds first on ties) each get one extra sample until the
/// budget is spent or every round has received one.
pub fn adaptive_sqrt_schedule(b_sum: u64, rounds: usize, b0: u64) -> Result<BatchSchedule> {
    check_budget(b_sum, rounds, b0)?;
    let (w, total) = sqrt_weights(rounds);
    let alpha = (b_sum - b0 * rounds as u64) as f64 / total;
    let raw: Vec<f64> = w.iter().map(|s| alpha * s + b0 as f64).collect();
    let mut batches: Vec<u64> = raw.iter().map(|x| x.floor() as u64).collect();

    let assigned: u64 = batches.iter().sum();
    let deficit = b_sum.saturating_sub(assigned).min(rounds as u64) as usize;
    let mut order: Vec<usize> = (0..rounds).collect();
    order.sort_by(|&i, &j| {
        let (fi, fj) = (raw[i] - raw[i].floor(), raw[j] - raw[j].floor());
        fj.partial_cmp(&fi).unwrap().then(j.cmp(&i))
    });
    for &i in order.iter().take(deficit) {
        batches[i] += 1;
    }
    Ok(BatchSchedule {
        batches,
        b0,
        alpha,
        scheme: ScheduleScheme::AdaptiveSqrt,
    })
}

/// Comparison schedules: constant `⌊b_sum/R⌋`, or the `√r` profile run
/// backwards. Both are floored without redistributing the remainder.
pub fn baseline_schedule(
    scheme: ScheduleScheme,
    b_sum: u64,
    rounds: usize,
    b0: u64,
) -> Result<BatchSchedule> {
    match scheme {
        ScheduleScheme::AdaptiveSqrt => adaptive_sqrt_schedule(b_sum, rounds, b0),
        ScheduleScheme::Equal => {
            if rounds == 0 || b_sum < rounds as u64 {
                return Err(Error::InvalidParameter(format!(
                    "b_sum = {b_sum} cannot give every one of {rounds} rounds a sample"
                )));
            }
            Ok(BatchSchedule {
                batches: vec![b_sum / rounds as u64; rounds],
                b0: b_sum / rounds as u64,
                alpha: 0.0,
                scheme,
            })
        }
        ScheduleScheme::DecreasingSqrt => {
            check_budget(b_sum, rounds, b0)?;
            let (w, total) = sqrt_weights(rounds);
            let alpha = (b_sum - b0 * rounds as u64) as f64 / total;
            let batches = w
                .iter()
                .rev()
                .map(|s| (alpha * s + b0 as f64).floor() as u64)
                .collect();
            Ok(BatchSchedule {
                batches,
                b0,
                alpha,
                scheme,
            })
        }
        ScheduleScheme::LossRatio => Err(Error::InvalidParameter(
            "the loss-ratio rule needs observed losses; use loss_ratio_next_batch".into(),
        )),
    }
}

/// Default initial batch: `b0_frac` of the average batch, at least one.
pub fn initial_batch(b_sum: u64, rounds: usize, b0_frac: f64) -> Result<u64> {
    if !(b0_frac > 0.0 && b0_frac.is_finite()) {
        return Err(Error::InvalidParameter(format!("b0_frac must be > 0, got {b0_frac}")));
    }
    if rounds == 0 {
        return Err(Error::InvalidParameter("R must be >= 1".into()));
    }
    Ok(((b0_frac * b_sum as f64 / rounds as f64).floor() as u64).max(1))
}

/// `round(√(F1/Fr)·b1)`, at least one.
pub fn loss_ratio_next_batch(b1: u64, f1: f64, fr: f64) -> Result<u64> {
    if !(f1 > 0.0 && fr > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "losses must be > 0, got F1 = {f1}, Fr = {fr}"
        )));
    }
    Ok((((f1 / fr).sqrt() * b1 as f64).round() as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_bp() -> BoundParams {
        BoundParams {
            eta: 0.1,
            l_smooth: 1.0,
            sigma2: 1.0,
            beta: 0.0,
            tau: 10,
            k: 6,
            f1: 1.0,
            f_inf: 0.0,
        }
    }

    #[test]
    fn lemma1_worked_value() {
        let v = lemma1_bound(&example_bp(), 8, 300).unwrap();
        let want = 2.0 / 300.0 + 0.1 / 48.0 + 0.1 / 8.0;
        assert!((v - want).abs() < 1e-15);
        assert!((v - 0.02125).abs() < 1e-5);
    }

    #[test]
    fn lemma1_large_batch_and_rounds() {
        let bp = example_bp();
        let limit = 2.0 / (0.1 * 300.0 * 10.0);
        let big = lemma1_bound(&bp, 1 << 40, 300).unwrap();
        assert!((big - limit).abs() < 1e-12);
        let var = lemma1_bound(&bp, 8, 300).unwrap() - limit;
        let doubled = lemma1_bound(&bp, 8, 600).unwrap();
        assert!((doubled - (limit / 2.0 + var)).abs() < 1e-15);
        assert!(lemma1_bound(&bp, 0, 1).is_err());
    }

    #[test]
    fn prop2_identities() {
        let bp = example_bp();
        for (b, r) in [(4u64, 25u64), (8, 300), (1, 7)] {
            let a = prop2_bound(&bp, b, b * r).unwrap();
            let l = lemma1_bound(&bp, b, r).unwrap();
            assert!((a - l).abs() < 1e-14);
        }
        for b in 2..999 {
            let (m, c, p) = (
                prop2_bound(&bp, b - 1, 1000).unwrap(),
                prop2_bound(&bp, b, 1000).unwrap(),
                prop2_bound(&bp, b + 1, 1000).unwrap(),
            );
            assert!(m + p >= 2.0 * c - 1e-15);
        }
    }

    fn brute_argmin(bp: &BoundParams, b_sum: u64) -> Vec<u64> {
        let vals: Vec<f64> = (1..=b_sum).map(|b| prop2_bound(bp, b, b_sum).unwrap()).collect();
        let best = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        (1..=b_sum).filter(|&b| vals[b as usize - 1] == best).collect()
    }

    #[test]
    fn optimal_batch_worked_example() {
        let bp = example_bp();
        assert!((optimal_batch_continuous(&bp, 1000) - (700.0f64 / 12.0).sqrt()).abs() < 1e-12);
        assert_eq!(optimal_fixed_batch(&bp, 1000).unwrap(), 8);
        assert_eq!(brute_argmin(&bp, 1000), vec![8]);
        let x1 = optimal_batch_continuous(&bp, 1000);
        let x4 = optimal_batch_continuous(&bp, 4000);
        assert!((x4 / x1 - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn optimal_batch_is_exhaustive_argmin(
            eta in 0.001f64..0.5, l in 0.1f64..5.0, s in 0.01f64..10.0,
            tau in 1u32..20, k in 1usize..20, gap in 0.01f64..5.0, b_sum in 1u64..800,
        ) {
            let bp = BoundParams { eta, l_smooth: l, sigma2: s, beta: 0.0, tau, k, f1: gap, f_inf: 0.0 };
            let got = optimal_fixed_batch(&bp, b_sum).unwrap();
            prop_assert!(brute_argmin(&bp, b_sum).contains(&got));
        }

        #[test]
        fn lemma1_decreasing(b in 1u64..1000, r in 1u64..1000, eta in 0.01f64..0.5) {
            let bp = BoundParams { eta, ..example_bp() };
            let base = lemma1_bound(&bp, b, r).unwrap();
            prop_assert!(lemma1_bound(&bp, b + 1, r).unwrap() < base);
            prop_assert!(lemma1_bound(&bp, b, r + 1).unwrap() < base);
        }

        #[test]
        fn schedules_respect_budget(rounds in 1usize..400, avg in 1u64..60, extra in 0u64..400, frac in 0.05f64..1.0) {
            let b_sum = avg * rounds as u64 + extra % rounds as u64;
            let b0 = initial_batch(b_sum, rounds, frac).unwrap();
            let ad = adaptive_sqrt_schedule(b_sum, rounds, b0).unwrap();
            prop_assert_eq!(ad.total(), b_sum);
            prop_assert!(ad.batches.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(ad.batches.iter().all(|&b| b >= 1));
            let dec = baseline_schedule(ScheduleScheme::DecreasingSqrt, b_sum, rounds, b0).unwrap();
            prop_assert!(dec.total() <= b_sum);
            prop_assert!(dec.batches.windows(2).all(|w| w[0] >= w[1]));
            let eq = baseline_schedule(ScheduleScheme::Equal, b_sum, rounds, b0).unwrap();
            prop_assert!(eq.total() <= b_sum);
        }
    }

    #[test]
    fn adaptive_worked_example() {
        // α = 20/Σ√r ≈ 3.254; raw ≈ [8.25, 9.60, 10.64, 11.51] -> floors sum to 38,
        // the two largest fractional parts are rounds 3 and 2
        let s = adaptive_sqrt_schedule(40, 4, 5).unwrap();
        assert_eq!(s.batches, vec![8, 10, 11, 11]);
        assert!((s.alpha - 20.0 / (1.0 + 2f64.sqrt() + 3f64.sqrt() + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn adaptive_degenerate_cases() {
        assert_eq!(adaptive_sqrt_schedule(40, 4, 10).unwrap().batches, vec![10; 4]);
        assert_eq!(adaptive_sqrt_schedule(37, 1, 5).unwrap().batches, vec![37]);
        assert!(matches!(
            adaptive_sqrt_schedule(40, 4, 11),
            Err(Error::InvalidParameter(_))
        ));
        assert!(adaptive_sqrt_schedule(40, 4, 0).is_err());
    }

    #[test]
    fn baseline_examples() {
        let eq = baseline_schedule(ScheduleScheme::Equal, 40, 4, 5).unwrap();
        assert_eq!(eq.batches, vec![10; 4]);
        let eq41 = baseline_schedule(ScheduleScheme::Equal, 41, 4, 5).unwrap();
        assert_eq!(eq41.batches, vec![10; 4]);
        let dec = baseline_schedule(ScheduleScheme::DecreasingSqrt, 40, 4, 5).unwrap();
        assert_eq!(dec.batches, vec![11, 10, 9, 8]);
        assert!(baseline_schedule(ScheduleScheme::LossRatio, 40, 4, 5).is_err());
    }

    #[test]
    fn loss_ratio_rule() {
        assert_eq!(loss_ratio_next_batch(8, 1.6, 1.6).unwrap(), 8);
        assert_eq!(loss_ratio_next_batch(8, 1.6, 0.4).unwrap(), 16);
        assert_eq!(loss_ratio_next_batch(8, 1.8, 1.8 / 9.0).unwrap(), 24);
        assert_eq!(loss_ratio_next_batch(1, 1.0, 100.0).unwrap(), 1);
        assert!(loss_ratio_next_batch(8, 0.0, 1.0).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let s = adaptive_sqrt_schedule(40, 4, 5).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("round,batch\n1,8\n"));
        assert_eq!(BatchSchedule::from_csv(&csv).unwrap(), s.batches);
    }

    #[test]
    fn learning_rate_condition() {
        let fast = BoundParams { eta: 0.2, ..example_bp() };
        assert!(!fast.learning_rate_condition());
        let ok = BoundParams { eta: 0.01, ..example_bp() };
        assert!(ok.learning_rate_condition());
        let bad = BoundParams { f1: 0.0, ..example_bp() };
        assert!(bad.validate().is_err());
    }
}
