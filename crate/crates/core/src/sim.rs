//! Round-by-round FEEL simulation on a surrogate loss.
//!
//! Training is replaced by the recursion
//! `F_{r+1} = max(F_floor, (1−γ)·F_r + β/b + σ·z/√(K·b))`: a contraction
//! towards zero plus a variance floor that shrinks with the batch size.
//! Each round is metered with the cost model and the run stops before a
//! round that would overrun any device's energy budget or the time budget.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{max_power_allocation, solve_allocation, AllocationSolution, MaxPowerBudget};
use crate::channel::DeviceProfile;
use crate::cost::{round_energy, round_latency, SystemParams, AUDIT_TOL};
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::schedule::{adaptive_sqrt_schedule, baseline_schedule, initial_batch, BatchSchedule, ScheduleScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateLossModel {
    pub gamma: f64,
    pub beta_noise: f64,
    pub sigma_sim: f64,
    pub f1: f64,
    pub f_floor: f64,
}

impl Default for SurrogateLossModel {
    fn default() -> Self {
        Self {
            gamma: 0.02,
            beta_noise: 0.5,
            sigma_sim: 0.1,
            f1: 1.6,
            f_floor: 0.0,
        }
    }
}

impl SurrogateLossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must be in (0, 1), got {}", self.gamma)));
        }
        if !(self.beta_noise >= 0.0) || !(self.sigma_sim >= 0.0) {
            return Err(Error::InvalidParameter("beta_noise and sigma_sim must be >= 0".into()));
        }
        if !(self.f_floor >= 0.0 && self.f1 > self.f_floor && self.f1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need F1 > F_floor >= 0, got {} and {}",
                self.f1, self.f_floor
            )));
        }
        Ok(())
    }

    /// Noiseless fixed point for a constant batch `b`.
    pub fn fixed_point(&self, b: u64) -> f64 {
        (self.beta_noise / (self.gamma * b as f64)).max(self.f_floor)
    }
}

/// One loss update. Always consumes exactly one normal draw so that runs
/// with different schedules stay paired under a shared seed.
pub fn step_loss<R: rand::Rng + ?Sized>(
    model: &SurrogateLossModel,
    f_r: f64,
    b: u64,
    k: usize,
    rng: &mut R,
) -> Result<f64> {
    if b == 0 || k == 0 {
        return Err(Error::InvalidParameter("batch and K must be >= 1".into()));
    }
    if !(f_r >= model.f_floor) {
        return Err(Error::InvalidParameter(format!(
            "loss {f_r} below the floor {}",
            model.f_floor
        )));
    }
    let z: f64 = StandardNormal.sample(rng);
    let b = b as f64;
    let next = (1.0 - model.gamma) * f_r
        + model.beta_noise / b
        + model.sigma_sim * z / (k as f64 * b).sqrt();
    Ok(next.max(model.f_floor))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    EnergyExhausted,
    TimeExhausted,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TerminationReason::EnergyExhausted => "energy_exhausted",
            TerminationReason::TimeExhausted => "time_exhausted",
        })
    }
}

/// One round. A terminal record describes the round that was refused: its
/// latency and energies are what it would have cost, the cumulative
/// fields and the loss are left at their pre-round values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub batch: u64,
    pub latency_s: f64,
    pub cum_time_s: f64,
    pub energy_j: Vec<f64>,
    pub cum_energy_j: Vec<f64>,
    pub loss: f64,
    pub terminated: Option<TerminationReason>,
}

impl RoundRecord {
    pub fn max_cum_energy(&self) -> f64 {
        self.cum_energy_j.iter().copied().fold(0.0, f64::max)
    }
}

pub fn run_simulation(
    sys: &SystemParams,
    devices: &[DeviceProfile],
    sol: &AllocationSolution,
    sched: &BatchSchedule,
    model: &SurrogateLossModel,
    seed: u64,
) -> Result<Vec<RoundRecord>> {
    sys.validate()?;
    model.validate()?;
    if sol.devices.len() != devices.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} allocations for {} devices",
            sol.devices.len(),
            devices.len()
        )));
    }
    let t_up: Vec<f64> = sol.devices.iter().map(|d| d.t_cm_s).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(sched.batches.len());
    let mut cum_time = 0.0;
    let mut cum_energy = vec![0.0; devices.len()];
    let mut loss = model.f1;

    for (i, &b) in sched.batches.iter().enumerate() {
        let latency = round_latency(b, &t_up, sys)?;
        let energy: Vec<f64> = sol
            .devices
            .iter()
            .map(|d| round_energy(b, d.p_s_w, d.p_c_w, d.t_cm_s, sys).energy())
            .collect();
        let over_energy = cum_energy
            .iter()
            .zip(&energy)
            .any(|(c, e)| c + e > sys.e_max_j + AUDIT_TOL);
        let reason = if over_energy {
            Some(TerminationReason::EnergyExhausted)
        } else if cum_time + latency > sys.t_max_s + AUDIT_TOL {
            Some(TerminationReason::TimeExhausted)
        } else {
            None
        };
        if let Some(reason) = reason {
            records.push(RoundRecord {
                round: i + 1,
                batch: b,
                latency_s: latency,
                cum_time_s: cum_time,
                energy_j: energy,
                cum_energy_j: cum_energy.clone(),
                loss,
                terminated: Some(reason),
            });
            break;
        }
        cum_time += latency;
        for (c, e) in cum_energy.iter_mut().zip(&energy) {
            *c += e;
        }
        loss = step_loss(model, loss, b, sys.k, &mut rng)?;
        records.push(RoundRecord {
            round: i + 1,
            batch: b,
            latency_s: latency,
            cum_time_s: cum_time,
            energy_j: energy,
            cum_energy_j: cum_energy.clone(),
            loss,
            terminated: None,
        });
    }
    Ok(records)
}

pub fn records_to_csv(records: &[RoundRecord]) -> String {
    let mut out =
        String::from("round,batch,latency_s,cum_time_s,max_cum_energy_j,loss,terminated,reason\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.round,
            r.batch,
            fmt_float(r.latency_s),
            fmt_float(r.cum_time_s),
            fmt_float(r.max_cum_energy()),
            fmt_float(r.loss),
            r.terminated.is_some(),
            r.terminated.map(|t| t.to_string()).unwrap_or_default()
        ));
    }
    out
}

/// Rounds actually executed.
pub fn rounds_completed(records: &[RoundRecord]) -> usize {
    records.iter().filter(|r| r.terminated.is_none()).count()
}

/// Loss after the last executed round (`F1` if none ran).
pub fn final_loss(records: &[RoundRecord], model: &SurrogateLossModel) -> f64 {
    records
        .iter()
        .rev()
        .find(|r| r.terminated.is_none())
        .map_or(model.f1, |r| r.loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Optimised powers with the increasing `√r` schedule.
    Proposed,
    /// Every device at peak transmit power, increasing schedule, sample
    /// budget planned against latency only.
    #[serde(rename = "maxpower")]
    MaxPower,
    /// Optimised powers, constant batches.
    Equal,
    /// Optimised powers, the `√r` profile reversed.
    Decreasing,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::MaxPower, Scheme::Equal, Scheme::Decreasing];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::MaxPower => "maxpower",
            Scheme::Equal => "equal",
            Scheme::Decreasing => "decreasing",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheme {s:?}")))
    }
}

/// Allocation and schedule a scheme would execute.
pub fn plan_scheme(
    scheme: Scheme,
    sys: &SystemParams,
    devices: &[DeviceProfile],
    b0_frac: f64,
) -> Result<(AllocationSolution, BatchSchedule)> {
    let sol = match scheme {
        Scheme::MaxPower => max_power_allocation(sys, devices, MaxPowerBudget::LatencyOnly)?,
        _ => solve_allocation(sys, devices)?,
    };
    let b0 = initial_batch(sol.b_sum, sys.rounds, b0_frac)?;
    let sched = match scheme {
        Scheme::Proposed | Scheme::MaxPower => adaptive_sqrt_schedule(sol.b_sum, sys.rounds, b0)?,
        Scheme::Equal => baseline_schedule(ScheduleScheme::Equal, sol.b_sum, sys.rounds, b0)?,
        Scheme::Decreasing => {
            baseline_schedule(ScheduleScheme::DecreasingSqrt, sol.b_sum, sys.rounds, b0)?
        }
    };
    Ok((sol, sched))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub scheme: Scheme,
    pub seed: u64,
    pub b_sum: u64,
    pub rounds_planned: usize,
    pub rounds_completed: usize,
    pub terminated: bool,
    pub reason: Option<TerminationReason>,
    pub final_loss: f64,
    pub total_time_s: f64,
    pub max_cum_energy_j: f64,
}

pub fn summarize(
    scheme: Scheme,
    seed: u64,
    sol: &AllocationSolution,
    sched: &BatchSchedule,
    records: &[RoundRecord],
    model: &SurrogateLossModel,
) -> SimulationSummary {
    let last_done = records.iter().rev().find(|r| r.terminated.is_none());
    let reason = records.last().and_then(|r| r.terminated);
    SimulationSummary {
        scheme,
        seed,
        b_sum: sol.b_sum,
        rounds_planned: sched.rounds(),
        rounds_completed: rounds_completed(records),
        terminated: reason.is_some(),
        reason,
        final_loss: final_loss(records, model),
        total_time_s: last_done.map_or(0.0, |r| r.cum_time_s),
        max_cum_energy_j: last_done.map_or(0.0, RoundRecord::max_cum_energy),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub round: usize,
    pub cum_time_s: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub b_sum: u64,
    pub mean_final_loss: f64,
    /// Sample standard deviation over seeds (0 for one seed).
    pub std_final_loss: f64,
    pub mean_rounds_completed: f64,
    pub final_losses: Vec<f64>,
    pub rounds_completed: Vec<usize>,
    /// Loss against wall-clock time for the first seed, every
    /// `trajectory_stride` rounds plus the last executed round.
    pub trajectory: Vec<TrajectorySample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub seeds: Vec<u64>,
    pub schemes: Vec<SchemeSummary>,
}

impl Comparison {
    pub fn get(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }
}

const TRAJECTORY_STRIDE: usize = 10;

fn trajectory(records: &[RoundRecord]) -> Vec<TrajectorySample> {
    let done: Vec<&RoundRecord> = records.iter().filter(|r| r.terminated.is_none()).collect();
    let mut out: Vec<TrajectorySample> = done
        .iter()
        .enumerate()
        .filter(|(i, _)| i % TRAJECTORY_STRIDE == 0 || *i + 1 == done.len())
        .map(|(_, r)| TrajectorySample {
            round: r.round,
            cum_time_s: r.cum_time_s,
            loss: r.loss,
        })
        .collect();
    out.dedup_by_key(|s| s.round);
    out
}

/// Runs every scheme under every seed. A seed drives the same noise stream
/// in every scheme, so differences are paired.
pub fn compare_schemes(
    sys: &SystemParams,
    devices: &[DeviceProfile],
    schemes: &[Scheme],
    model: &SurrogateLossModel,
    seeds: &[u64],
    b0_frac: f64,
) -> Result<Comparison> {
    if schemes.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one scheme and one seed".into()));
    }
    let summaries = schemes
        .par_iter()
        .map(|&scheme| {
            let (sol, sched) = plan_scheme(scheme, sys, devices, b0_frac)?;
            let runs = seeds
                .par_iter()
                .map(|&s| run_simulation(sys, devices, &sol, &sched, model, s))
                .collect::<Result<Vec<_>>>()?;
            let finals: Vec<f64> = runs.iter().map(|r| final_loss(r, model)).collect();
            let done: Vec<usize> = runs.iter().map(|r| rounds_completed(r)).collect();
            let n = finals.len() as f64;
            let mean = finals.iter().sum::<f64>() / n;
            let std = if finals.len() > 1 {
                (finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            Ok(SchemeSummary {
                scheme,
                b_sum: sol.b_sum,
                mean_final_loss: mean,
                std_final_loss: std,
                mean_rounds_completed: done.iter().sum::<usize>() as f64 / n,
                final_losses: finals,
                rounds_completed: done,
                trajectory: trajectory(&runs[0]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Comparison {
        seeds: seeds.to_vec(),
        schemes: summaries,
    })
}
