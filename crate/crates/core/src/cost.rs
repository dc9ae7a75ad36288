//! Per-round latency and energy accounting, and the audit of the full
//! constraint system: upload completion (C1), total latency (C2), per-device
//! energy (C3), communication power (C4) and sensing power (C5), plus the
//! reduced forms of C2/C3 in terms of the total sample budget.

use serde::{Deserialize, Serialize};

use crate::allocator::AllocationSolution;
use crate::channel::{ergodic_capacity, ChannelParams, DeviceProfile};
use crate::error::{Error, Result};
use crate::schedule::BatchSchedule;

/// Absolute tolerance on seconds and joules in audit comparisons.
pub const AUDIT_TOL: f64 = 1e-9;

/// Parameters count of the classifier times 32-bit floats.
pub const DEFAULT_MODEL_BITS: f64 = 4_900_677.0 * 32.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of devices.
    pub k: usize,
    /// Subcarrier bandwidth (Hz).
    pub b0_hz: f64,
    /// Noise PSD (W/Hz).
    pub n0_w_per_hz: f64,
    /// Bits per model upload.
    pub d_bits: f64,
    /// Unit sensing time per sample (s).
    pub t0_s: f64,
    /// CPU cycles per sample.
    pub nu: f64,
    /// Local SGD steps per round.
    pub tau: u32,
    /// CPU frequency (cycles/s).
    pub f_cpu: f64,
    /// Effective switched capacitance.
    pub theta: f64,
    /// Communication rounds.
    pub rounds: usize,
    pub t_max_s: f64,
    pub e_max_j: f64,
}

impl SystemParams {
    /// Simulation parameters of the reference deployment, in the
    /// energy-limited budget setting (20000 s, 1500 J).
    pub fn reference() -> Self {
        Self {
            k: 6,
            b0_hz: 0.5e6,
            n0_w_per_hz: crate::units::dbm_per_hz_to_w_per_hz(-174.0),
            d_bits: DEFAULT_MODEL_BITS,
            t0_s: 0.5,
            nu: 2.5e7,
            tau: 10,
            f_cpu: 5e8,
            theta: 1e-27,
            rounds: 300,
            t_max_s: 20_000.0,
            e_max_j: 1_500.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("B0", self.b0_hz),
            ("N0", self.n0_w_per_hz),
            ("D_b", self.d_bits),
            ("T0", self.t0_s),
            ("nu", self.nu),
            ("f_cpu", self.f_cpu),
            ("theta", self.theta),
            ("T_max", self.t_max_s),
            ("E_max", self.e_max_j),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.k == 0 || self.rounds == 0 || self.tau == 0 {
            return Err(Error::InvalidParameter("K, R and tau must be >= 1".into()));
        }
        Ok(())
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            b0_hz: self.b0_hz,
            n0_w_per_hz: self.n0_w_per_hz,
        }
    }

    /// Sensing plus computation time per sample, `T0 + ν·τ/f_cpu`.
    pub fn latency_per_sample(&self) -> f64 {
        self.t0_s + self.nu * self.tau as f64 / self.f_cpu
    }

    /// Computation energy per sample, `τ·θ·ν·f_cpu²`.
    pub fn compute_energy_per_sample(&self) -> f64 {
        self.tau as f64 * self.theta * self.nu * self.f_cpu * self.f_cpu
    }

    /// Sensing plus computation energy per sample at sensing power `p_s`.
    pub fn energy_per_sample(&self, p_s: f64) -> f64 {
        self.t0_s * p_s + self.compute_energy_per_sample()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundCosts {
    pub t_sense: f64,
    pub t_compute: f64,
    pub t_upload: f64,
    pub e_sense: f64,
    pub e_compute: f64,
    pub e_upload: f64,
}

impl RoundCosts {
    pub fn energy(&self) -> f64 {
        self.e_sense + self.e_compute + self.e_upload
    }

    pub fn latency(&self) -> f64 {
        self.t_sense + self.t_compute + self.t_upload
    }
}

pub fn sensing_time(b: u64, sys: &SystemParams) -> f64 {
    sys.t0_s * b as f64
}

pub fn compute_time(b: u64, sys: &SystemParams) -> f64 {
    b as f64 * sys.nu * sys.tau as f64 / sys.f_cpu
}

/// Synchronous round: the slowest device's sense + compute + upload time.
pub fn round_latency(b: u64, t_upload: &[f64], sys: &SystemParams) -> Result<f64> {
    if t_upload.is_empty() {
        return Err(Error::DimensionMismatch("no upload times given".into()));
    }
    let local = sensing_time(b, sys) + compute_time(b, sys);
    Ok(t_upload
        .iter()
        .map(|t| local + t)
        .fold(f64::NEG_INFINITY, f64::max))
}

pub fn round_energy(b: u64, p_s: f64, p_c: f64, t_upload: f64, sys: &SystemParams) -> RoundCosts {
    RoundCosts {
        t_sense: sensing_time(b, sys),
        t_compute: compute_time(b, sys),
        t_upload,
        e_sense: sys.t0_s * b as f64 * p_s,
        e_compute: sys.compute_energy_per_sample() * b as f64,
        e_upload: t_upload * p_c,
    }
}

/// One audited inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub device: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl ConstraintCheck {
    fn new(name: &str, device: Option<usize>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            name: name.to_string(),
            device,
            lhs,
            rhs,
            slack,
            pass: slack >= -tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<ConstraintCheck>,
}

impl AuditReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn failed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && !c.pass)
    }
}

/// Checks an allocation and a batch schedule against every constraint.
pub fn audit_constraints(
    sol: &AllocationSolution,
    sched: &BatchSchedule,
    sys: &SystemParams,
    devices: &[DeviceProfile],
) -> Result<AuditReport> {
    if sol.devices.len() != devices.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} allocations for {} devices",
            sol.devices.len(),
            devices.len()
        )));
    }
    if sched.batches.len() != sys.rounds {
        return Err(Error::DimensionMismatch(format!(
            "schedule has {} rounds, system has {}",
            sched.batches.len(),
            sys.rounds
        )));
    }
    let ch = sys.channel();
    let r = sys.rounds as f64;
    let b_total: u64 = sched.batches.iter().sum();
    let t_uploads: Vec<f64> = sol.devices.iter().map(|d| d.t_cm_s).collect();
    let mut checks = Vec::new();

    checks.push(ConstraintCheck::new(
        "budget",
        None,
        b_total as f64,
        sol.b_sum as f64,
        0.0,
    ));
    let min_batch = sched.batches.iter().copied().min().unwrap_or(0);
    checks.push(ConstraintCheck::new("min_batch", None, 1.0, min_batch as f64, 0.0));

    let total_latency = sched
        .batches
        .iter()
        .map(|&b| round_latency(b, &t_uploads, sys))
        .sum::<Result<f64>>()?;
    checks.push(ConstraintCheck::new("C2", None, total_latency, sys.t_max_s, AUDIT_TOL));

    for (alloc, dev) in sol.devices.iter().zip(devices) {
        if alloc.id != dev.id {
            return Err(Error::DimensionMismatch(format!(
                "allocation for device {} paired with profile {}",
                alloc.id, dev.id
            )));
        }
        let id = Some(dev.id);
        let rate = ergodic_capacity(alloc.p_c_w, dev, &ch)?;
        checks.push(ConstraintCheck::new(
            "C1",
            id,
            sys.d_bits,
            alloc.t_cm_s * rate,
            sys.d_bits * 1e-12,
        ));

        let energy: f64 = sched
            .batches
            .iter()
            .map(|&b| round_energy(b, alloc.p_s_w, alloc.p_c_w, alloc.t_cm_s, sys).energy())
            .sum();
        checks.push(ConstraintCheck::new("C3", id, energy, sys.e_max_j, AUDIT_TOL));

        checks.push(ConstraintCheck::new("C4_lower", id, 0.0, alloc.p_c_w, 0.0));
        checks.push(ConstraintCheck::new("C4_upper", id, alloc.p_c_w, dev.p_c_max_w, 0.0));
        checks.push(ConstraintCheck::new("C5_lower", id, dev.p_s_min_w, alloc.p_s_w, 0.0));
        checks.push(ConstraintCheck::new("C5_upper", id, alloc.p_s_w, dev.p_s_max_w, 0.0));

        let bt = b_total as f64;
        checks.push(ConstraintCheck::new(
            "C2_reduced",
            id,
            bt * sys.latency_per_sample() + r * alloc.t_cm_s,
            sys.t_max_s,
            AUDIT_TOL,
        ));
        checks.push(ConstraintCheck::new(
            "C3_reduced",
            id,
            bt * sys.energy_per_sample(alloc.p_s_w) + r * alloc.t_cm_s * alloc.p_c_w,
            sys.e_max_j,
            AUDIT_TOL,
        ));
    }
    Ok(AuditReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sensing_time_examples() {
        let sys = SystemParams::reference();
        assert_eq!(sensing_time(0, &sys), 0.0);
        assert_eq!(sensing_time(46, &sys), 23.0);
        assert_eq!(sensing_time(1, &sys), sys.t0_s);
    }

    #[test]
    fn compute_time_examples() {
        let sys = SystemParams::reference();
        assert!((compute_time(1, &sys) - 0.5).abs() < 1e-15);
        assert_eq!(compute_time(0, &sys), 0.0);
        assert!((compute_time(14, &sys) - 2.0 * compute_time(7, &sys)).abs() < 1e-12);
    }

    #[test]
    fn round_latency_examples() {
        let sys = SystemParams::reference();
        assert!((round_latency(3, &[4.0], &sys).unwrap() - (1.5 + 1.5 + 4.0)).abs() < 1e-12);
        assert_eq!(round_latency(0, &[10.0, 20.0, 15.0], &sys).unwrap(), 20.0);
        let l = round_latency(46, &[21.5; 6], &sys).unwrap();
        assert!((l - 67.5).abs() < 1e-12);
        assert!(round_latency(1, &[], &sys).is_err());
    }

    #[test]
    fn round_energy_examples() {
        let sys = SystemParams::reference();
        let c = round_energy(1, 0.1, 0.0, 0.0, &sys);
        assert!((c.e_sense - 0.05).abs() < 1e-15);
        assert!((c.e_compute - 0.0625).abs() < 1e-15);
        let z = round_energy(0, 0.1, 0.1, 0.0, &sys);
        assert_eq!(z.energy(), 0.0);
        assert_eq!(z.latency(), 0.0);
        let u = round_energy(0, 0.1, 0.1, 20.0, &sys);
        assert!((u.e_upload - 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn costs_linear_in_batch(a in 0u64..5000, b in 0u64..5000, p in 0.01f64..1.0) {
            let sys = SystemParams::reference();
            let ca = round_energy(a, p, 0.0, 0.0, &sys);
            let cb = round_energy(b, p, 0.0, 0.0, &sys);
            let cab = round_energy(a + b, p, 0.0, 0.0, &sys);
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(1.0);
            prop_assert!(close(cab.e_sense, ca.e_sense + cb.e_sense));
            prop_assert!(close(cab.e_compute, ca.e_compute + cb.e_compute));
            prop_assert!(close(cab.t_sense, ca.t_sense + cb.t_sense));
            prop_assert!(close(cab.t_compute, ca.t_compute + cb.t_compute));
        }

        #[test]
        fn total_latency_matches_reduced_form(
            batches in proptest::collection::vec(0u64..200, 1..60),
            uploads in proptest::collection::vec(0.0f64..80.0, 1..8),
        ) {
            let sys = SystemParams::reference();
            let direct: f64 = batches.iter().map(|&b| round_latency(b, &uploads, &sys).unwrap()).sum();
            let b_sum: u64 = batches.iter().sum();
            let t_max = uploads.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let reduced = b_sum as f64 * sys.latency_per_sample() + batches.len() as f64 * t_max;
            prop_assert!((direct - reduced).abs() <= 1e-9 * reduced.max(1.0));
        }
    }
}
