//! How the sample budget grows with the energy budget until latency takes
//! over, against a baseline that always transmits at peak power.

use feel_sc2::allocator::{sweep, sweep_values, SweepParam};
use feel_sc2::config::ScenarioConfig;

fn main() -> feel_sc2::Result<()> {
    let cfg = ScenarioConfig::default();
    let devices = cfg.device_profiles()?;
    let rows = sweep(&cfg.system_params(), &devices, SweepParam::Emax, &sweep_values(600.0, 2600.0, 11)?)?;
    println!("{:>8} {:>7} {:>16} {:>10} {:>9}", "E_max[J]", "b_sum", "regime", "max-power", "mean p_c");
    for r in &rows {
        let fmt = |b: Option<u64>| b.map_or("-".to_string(), |b| b.to_string());
        let mean_pc = if r.p_c_w.is_empty() { f64::NAN } else { r.p_c_w.iter().sum::<f64>() / r.p_c_w.len() as f64 };
        println!(
            "{:>8.0} {:>7} {:>16} {:>10} {:>9.4}",
            r.value,
            fmt(r.b_sum),
            r.regime.map_or("infeasible".to_string(), |g| g.to_string()),
            fmt(r.b_sum_max_power),
            mean_pc
        );
    }
    Ok(())
}
