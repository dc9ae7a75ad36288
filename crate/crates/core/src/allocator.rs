//! Step 1: maximise the total number of samples each device can sense over
//! the whole training run.
//!
//! The sample budget of device `k` at communication power `p` is
//! `Φ_k(p) = min(latency bound, energy bound)` once the upload time is tied
//! to the model size (`T_cm·C(p) = D_b`) and the sensing power is pinned to
//! its lower limit. Devices do not interact, so each `Φ_k` is maximised on
//! its own grid and `b_sum = ⌊min_k Φ_k(p_k*)⌋`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ergodic_capacity, DeviceProfile};
use crate::cost::SystemParams;
use crate::error::{Error, Result};
use crate::numerics::{argmax_refined, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    EnergyLimited,
    LatencyLimited,
    Mixed,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::EnergyLimited => "energy_limited",
            Regime::LatencyLimited => "latency_limited",
            Regime::Mixed => "mixed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceAllocation {
    pub id: usize,
    pub p_s_w: f64,
    pub p_c_w: f64,
    pub t_cm_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSolution {
    pub devices: Vec<DeviceAllocation>,
    pub b_sum: u64,
    pub regime: Regime,
}

/// Grid-search settings for the communication power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub grid_points: usize,
    pub refine_points: usize,
    /// Lower end of the search interval as a fraction of `P_c_max`.
    pub lower_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            refine_points: 200,
            lower_fraction: 1e-6,
        }
    }
}

/// The two sample bounds that make up `Φ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBounds {
    pub latency: f64,
    pub energy: f64,
}

impl SampleBounds {
    pub fn value(&self) -> f64 {
        self.latency.min(self.energy)
    }

    pub fn latency_binds(&self) -> bool {
        self.latency <= self.energy
    }

    pub fn binding(&self) -> &'static str {
        if self.latency_binds() {
            "latency (C2)"
        } else {
            "energy (C3)"
        }
    }
}

/// Optimal sensing power: the sensing-quality threshold.
pub fn optimal_sensing_power(dev: &DeviceProfile) -> f64 {
    dev.p_s_min_w
}

/// Latency- and energy-driven sample bounds at communication power `p_c`
/// and sensing power `p_s`, with the upload time eliminated through C1.
pub fn sample_bounds(
    p_c: f64,
    p_s: f64,
    dev: &DeviceProfile,
    sys: &SystemParams,
) -> Result<SampleBounds> {
    if !(p_c > 0.0) {
        return Err(Error::Domain(format!("Φ_k needs p_c > 0, got {p_c}")));
    }
    let rate = ergodic_capacity(p_c, dev, &sys.channel())?;
    let r = sys.rounds as f64;
    let upload = sys.d_bits / rate;
    Ok(SampleBounds {
        latency: (sys.t_max_s - r * upload) / sys.latency_per_sample(),
        energy: (sys.e_max_j - r * p_c * upload) / sys.energy_per_sample(p_s),
    })
}

/// `Φ_k(p_c)` with the sensing power at its optimum. Negative values mean
/// the budgets cannot even cover the uploads at that power.
pub fn phi_k(p_c: f64, dev: &DeviceProfile, sys: &SystemParams) -> Result<f64> {
    Ok(sample_bounds(p_c, optimal_sensing_power(dev), dev, sys)?.value())
}

/// Upload time meeting C1 with equality, rounded up so that
/// `t·C >= D_b` holds in floating point too.
pub fn upload_time(p_c: f64, dev: &DeviceProfile, sys: &SystemParams) -> Result<f64> {
    let rate = ergodic_capacity(p_c, dev, &sys.channel())?;
    if !(rate > 0.0) {
        return Err(Error::Domain(format!(
            "device {} has zero rate at p_c = {p_c}",
            dev.id
        )));
    }
    let mut t = sys.d_bits / rate;
    while t * rate < sys.d_bits {
        t = t.next_up();
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceOptimum {
    pub p_c: f64,
    pub bounds: SampleBounds,
}

impl DeviceOptimum {
    fn latency_bound_at_peak(&self, dev: &DeviceProfile) -> bool {
        self.p_c == dev.p_c_max_w && self.bounds.latency_binds()
    }
}

/// Per-device argmax of `Φ_k` over `[lower_fraction·P_c_max, P_c_max]`.
pub fn device_optimum(
    dev: &DeviceProfile,
    sys: &SystemParams,
    opts: &SolverOptions,
) -> Result<DeviceOptimum> {
    let grid = GridSpec::logarithmic(
        dev.p_c_max_w * opts.lower_fraction,
        dev.p_c_max_w,
        opts.grid_points,
    )?;
    let (p_c, _) = argmax_refined(|p| phi_k(p, dev, sys), &grid, opts.refine_points)?;
    let bounds = sample_bounds(p_c, optimal_sensing_power(dev), dev, sys)?;
    Ok(DeviceOptimum { p_c, bounds })
}

fn classify(optima: &[DeviceOptimum], devices: &[DeviceProfile]) -> Regime {
    let latency = optima
        .iter()
        .zip(devices)
        .filter(|(o, d)| o.latency_bound_at_peak(d))
        .count();
    if latency == devices.len() {
        Regime::LatencyLimited
    } else if latency == 0 {
        Regime::EnergyLimited
    } else {
        Regime::Mixed
    }
}

fn assemble(
    sys: &SystemParams,
    devices: &[DeviceProfile],
    optima: &[DeviceOptimum],
    budget_of: impl Fn(&SampleBounds) -> f64,
) -> Result<AllocationSolution> {
    let (worst, bound) = optima
        .iter()
        .enumerate()
        .map(|(i, o)| (i, budget_of(&o.bounds)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    if !(bound >= 1.0) {
        let b = optima[worst].bounds;
        return Err(Error::Infeasible {
            device: devices[worst].id,
            latency_bound: b.latency,
            energy_bound: b.energy,
            binding: b.binding(),
        });
    }
    let allocations = optima
        .iter()
        .zip(devices)
        .map(|(o, d)| {
            Ok(DeviceAllocation {
                id: d.id,
                p_s_w: optimal_sensing_power(d),
                p_c_w: o.p_c,
                t_cm_s: upload_time(o.p_c, d, sys)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AllocationSolution {
        devices: allocations,
        b_sum: bound.floor() as u64,
        regime: classify(optima, devices),
    })
}

fn check_inputs(sys: &SystemParams, devices: &[DeviceProfile]) -> Result<()> {
    sys.validate()?;
    if devices.is_empty() {
        return Err(Error::InvalidParameter("at least one device required".into()));
    }
    if devices.len() != sys.k {
        return Err(Error::DimensionMismatch(format!(
            "K = {} but {} device profiles",
            sys.k,
            devices.len()
        )));
    }
    devices.iter().try_for_each(DeviceProfile::validate)
}

pub fn solve_allocation(sys: &SystemParams, devices: &[DeviceProfile]) -> Result<AllocationSolution> {
    solve_allocation_with(sys, devices, &SolverOptions::default())
}

pub fn solve_allocation_with(
    sys: &SystemParams,
    devices: &[DeviceProfile],
    opts: &SolverOptions,
) -> Result<AllocationSolution> {
    check_inputs(sys, devices)?;
    let optima = devices
        .par_iter()
        .map(|d| device_optimum(d, sys, opts))
        .collect::<Result<Vec<_>>>()?;
    assemble(sys, devices, &optima, SampleBounds::value)
}

/// How the max-power baseline sizes its sample budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxPowerBudget {
    /// `min_k Φ_k(P_c_max)`: both budgets respected.
    Full,
    /// Latency bound only; the energy budget is not planned for.
    LatencyOnly,
}

/// Every device transmits at `P_c_max` instead of optimising its power.
pub fn max_power_allocation(
    sys: &SystemParams,
    devices: &[DeviceProfile],
    budget: MaxPowerBudget,
) -> Result<AllocationSolution> {
    check_inputs(sys, devices)?;
    let optima = devices
        .iter()
        .map(|d| {
            Ok(DeviceOptimum {
                p_c: d.p_c_max_w,
                bounds: sample_bounds(d.p_c_max_w, optimal_sensing_power(d), d, sys)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match budget {
        MaxPowerBudget::Full => assemble(sys, devices, &optima, SampleBounds::value),
        MaxPowerBudget::LatencyOnly => assemble(sys, devices, &optima, |b| b.latency),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Emax,
    Tmax,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emax" => Ok(SweepParam::Emax),
            "tmax" => Ok(SweepParam::Tmax),
            other => Err(Error::InvalidParameter(format!("unknown sweep parameter {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when the budgets are infeasible at this point.
    pub b_sum: Option<u64>,
    pub regime: Option<Regime>,
    pub p_c_w: Vec<f64>,
    /// Sample budget of the fixed max-power baseline.
    pub b_sum_max_power: Option<u64>,
}

/// Evenly spaced values from `from` to `to`; a single step yields `from`.
pub fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => Err(Error::InvalidParameter("sweep needs at least one step".into())),
        1 => Ok(vec![from]),
        n => Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    to
                } else {
                    from + (to - from) * i as f64 / (n - 1) as f64
                }
            })
            .collect()),
    }
}

/// Re-solves Step 1 for each budget value; points run concurrently.
pub fn sweep(
    sys: &SystemParams,
    devices: &[DeviceProfile],
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .map(|&v| {
            let mut s = sys.clone();
            match param {
                SweepParam::Emax => s.e_max_j = v,
                SweepParam::Tmax => s.t_max_s = v,
            }
            let baseline = match max_power_allocation(&s, devices, MaxPowerBudget::Full) {
                Ok(sol) => Some(sol.b_sum),
                Err(Error::Infeasible { .. }) => None,
                Err(e) => return Err(e),
            };
            match solve_allocation(&s, devices) {
                Ok(sol) => Ok(SweepRow {
                    value: v,
                    b_sum: Some(sol.b_sum),
                    regime: Some(sol.regime),
                    p_c_w: sol.devices.iter().map(|d| d.p_c_w).collect(),
                    b_sum_max_power: baseline,
                }),
                Err(Error::Infeasible { .. }) => Ok(SweepRow {
                    value: v,
                    b_sum: None,
                    regime: None,
                    p_c_w: Vec::new(),
                    b_sum_max_power: baseline,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_device(p_s_min: f64, p_s_max: f64) -> DeviceProfile {
        DeviceProfile::new(0, 0.1, 0.0, 0.1, p_s_min, p_s_max).unwrap()
    }

    fn one_device_system(t_max: f64, e_max: f64) -> SystemParams {
        SystemParams {
            k: 1,
            t_max_s: t_max,
            e_max_j: e_max,
            ..SystemParams::reference()
        }
    }

    #[test]
    fn sensing_power_is_lower_limit() {
        assert_eq!(optimal_sensing_power(&close_device(0.1, 1.0)), 0.1);
        assert_eq!(optimal_sensing_power(&close_device(0.3, 0.3)), 0.3);
        assert_eq!(optimal_sensing_power(&close_device(0.1, 5.0)), 0.1);
    }

    #[test]
    fn phi_latency_term_near_close_device() {
        let sys = one_device_system(20_000.0, 2_200.0);
        let dev = close_device(0.1, 1.0);
        let b = sample_bounds(0.1, 0.1, &dev, &sys).unwrap();
        // C ≈ 7.3 Mbit/s, T_cm ≈ 21.5 s, 300 rounds, 1 s per sample
        assert!((b.latency - 13_550.0).abs() < 60.0, "{}", b.latency);
        assert!(b.latency_binds());
    }

    #[test]
    fn phi_reduces_to_latency_term_without_energy_limit() {
        let sys = one_device_system(20_000.0, 1e12);
        let dev = close_device(0.1, 1.0);
        let ps = [0.001, 0.01, 0.05, 0.1];
        let vals: Vec<f64> = ps.iter().map(|&p| phi_k(p, &dev, &sys).unwrap()).collect();
        for (p, v) in ps.iter().zip(&vals) {
            let b = sample_bounds(*p, 0.1, &dev, &sys).unwrap();
            assert_eq!(*v, b.latency);
        }
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn phi_diverges_at_zero_power() {
        let sys = one_device_system(20_000.0, 2_200.0);
        let dev = close_device(0.1, 1.0);
        let v = phi_k(1e-12, &dev, &sys).unwrap();
        assert!(v < -1e6);
        assert!(phi_k(0.0, &dev, &sys).is_err());
    }

    #[test]
    fn higher_sensing_power_shrinks_energy_bound() {
        let sys = one_device_system(20_000.0, 2_200.0);
        let dev = close_device(0.1, 1.0);
        let base = sample_bounds(0.05, 0.1, &dev, &sys).unwrap();
        for p_s in [0.1000001, 0.2, 0.5, 1.0] {
            let b = sample_bounds(0.05, p_s, &dev, &sys).unwrap();
            assert!(b.energy < base.energy);
            assert_eq!(b.latency, base.latency);
        }
    }

    #[test]
    fn upload_time_satisfies_c1() {
        let sys = SystemParams::reference();
        let dev = close_device(0.1, 1.0);
        for p in [1e-4, 0.003, 0.1] {
            let t = upload_time(p, &dev, &sys).unwrap();
            let c = ergodic_capacity(p, &dev, &sys.channel()).unwrap();
            assert!(t * c >= sys.d_bits);
            assert!((t * c / sys.d_bits - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_budget_is_reported() {
        let sys = one_device_system(1.0, 2_200.0);
        let err = solve_allocation(&sys, &[close_device(0.1, 1.0)]).unwrap_err();
        match err {
            Error::Infeasible { device, latency_bound, binding, .. } => {
                assert_eq!(device, 0);
                assert!(latency_bound < 1.0);
                assert_eq!(binding, "latency (C2)");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn k_must_match_device_count() {
        let sys = SystemParams::reference();
        assert!(matches!(
            solve_allocation(&sys, &[close_device(0.1, 1.0)]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sweep_values_endpoints() {
        assert_eq!(sweep_values(1.0, 2.0, 1).unwrap(), vec![1.0]);
        let v = sweep_values(1000.0, 2600.0, 9).unwrap();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 1000.0);
        assert_eq!(v[8], 2600.0);
        assert!((v[1] - 1200.0).abs() < 1e-9);
        assert!(sweep_values(0.0, 1.0, 0).is_err());
    }
}
