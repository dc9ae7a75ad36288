//! Command implementations behind the `feel-sc2` binary. Each reads a
//! scenario, runs one experiment and writes its artifacts atomically.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::allocator::{solve_allocation, sweep, sweep_values, AllocationSolution, SweepParam, SweepRow};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::io::{fmt_float, read_json, write_atomic, write_json};
use crate::schedule::{baseline_schedule, initial_batch, BatchSchedule};
use crate::sensing::{quality_vs_power, QualityCurve};
use crate::sim::{plan_scheme, records_to_csv, run_simulation, summarize, Scheme, SimulationSummary};
use crate::units::{dbm_to_w, w_to_dbm};

/// Process exit status for an error: 2 for infeasible budgets and invalid
/// parameters, 1 for everything else.
pub fn exit_code(err: &Error) -> u8 {
    if err.is_infeasible_or_invalid() {
        2
    } else {
        1
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default()),
    }
}

pub fn cmd_allocate(config: Option<&Path>, out: &Path) -> Result<AllocationSolution> {
    let cfg = load_config(config)?;
    let sol = solve_allocation(&cfg.system_params(), &cfg.device_profiles()?)?;
    write_json(out, &sol)?;
    Ok(sol)
}

pub fn build_schedule(cfg: &ScenarioConfig, sol: &AllocationSolution) -> Result<BatchSchedule> {
    let rounds = cfg.system.rounds;
    let b0 = initial_batch(sol.b_sum, rounds, cfg.schedule.b0_frac)?;
    let sched = baseline_schedule(cfg.schedule.scheme, sol.b_sum, rounds, b0)?;
    if sched.total() > sol.b_sum {
        return Err(Error::InvalidParameter(format!(
            "schedule spends {} samples, budget is {}",
            sched.total(),
            sol.b_sum
        )));
    }
    Ok(sched)
}

pub fn cmd_schedule(alloc: &Path, config: Option<&Path>, out: &Path) -> Result<BatchSchedule> {
    let cfg = load_config(config)?;
    let sol: AllocationSolution = read_json(alloc)?;
    let sched = build_schedule(&cfg, &sol)?;
    write_atomic(out, sched.to_csv().as_bytes())?;
    Ok(sched)
}

/// Summary JSON path next to a CSV output: `run.csv` becomes `run.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        out.with_extension("summary.json")
    } else {
        out.with_extension("json")
    }
}

pub fn cmd_simulate(
    config: Option<&Path>,
    scheme: Scheme,
    seed: u64,
    out: &Path,
) -> Result<SimulationSummary> {
    let cfg = load_config(config)?;
    let sys = cfg.system_params();
    let devices = cfg.device_profiles()?;
    let (sol, sched) = plan_scheme(scheme, &sys, &devices, cfg.schedule.b0_frac)?;
    let records = run_simulation(&sys, &devices, &sol, &sched, &cfg.model, seed)?;
    let summary = summarize(scheme, seed, &sol, &sched, &records, &cfg.model);
    write_atomic(out, records_to_csv(&records).as_bytes())?;
    write_json(&summary_path(out), &summary)?;
    Ok(summary)
}

pub fn sweep_to_csv(rows: &[SweepRow], devices: usize) -> String {
    let mut out = String::from("param_value,b_sum,regime");
    for k in 0..devices {
        out.push_str(&format!(",p_c_w_{k}"));
    }
    out.push_str(",b_sum_max_power\n");
    for r in rows {
        out.push_str(&fmt_float(r.value));
        out.push(',');
        out.push_str(&r.b_sum.map(|b| b.to_string()).unwrap_or_default());
        out.push(',');
        out.push_str(&r.regime.map_or("infeasible".to_string(), |g| g.to_string()));
        for k in 0..devices {
            out.push(',');
            if let Some(p) = r.p_c_w.get(k) {
                out.push_str(&fmt_float(*p));
            }
        }
        out.push(',');
        out.push_str(&r.b_sum_max_power.map(|b| b.to_string()).unwrap_or_default());
        out.push('\n');
    }
    out
}

pub fn cmd_sweep(
    config: Option<&Path>,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    out: &Path,
) -> Result<Vec<SweepRow>> {
    let cfg = load_config(config)?;
    let devices = cfg.device_profiles()?;
    let values = sweep_values(from, to, steps)?;
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("sweep values must be > 0".into()));
    }
    let rows = sweep(&cfg.system_params(), &devices, param, &values)?;
    write_atomic(out, sweep_to_csv(&rows, devices.len()).as_bytes())?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold_dbm: f64,
    pub threshold_w: f64,
    pub saturation_ssim: f64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

pub fn cmd_sense_quality(
    config: Option<&Path>,
    powers_dbm: Option<&[f64]>,
    seed: Option<u64>,
    out: &Path,
) -> Result<(QualityCurve, ThresholdReport)> {
    let cfg = load_config(config)?;
    let mut opts = cfg.sensing.quality_options();
    if let Some(s) = seed {
        opts.seed = s;
    }
    let dbm = powers_dbm.unwrap_or(&cfg.sensing.powers_dbm);
    let powers: Vec<f64> = dbm.iter().map(|&d| dbm_to_w(d)).collect();
    let curve = quality_vs_power(&cfg.sensing.scene, &cfg.chirp, &powers, cfg.sensing.clutter_psd, &opts)?;
    let report = ThresholdReport {
        threshold_dbm: w_to_dbm(curve.threshold_w),
        threshold_w: curve.threshold_w,
        saturation_ssim: curve.saturation_ssim,
        epsilon: opts.epsilon,
        trials: opts.trials,
        seed: opts.seed,
    };
    write_atomic(out, curve.to_csv().as_bytes())?;
    write_json(&summary_path(out), &report)?;
    Ok((curve, report))
}
