//! Round-by-round training under the energy and time budgets, comparing the
//! planned schemes over a handful of seeds.

use feel_sc2::config::ScenarioConfig;
use feel_sc2::sim::{compare_schemes, plan_scheme, run_simulation, Scheme};

fn main() -> feel_sc2::Result<()> {
    let cfg = ScenarioConfig::default();
    let sys = cfg.system_params();
    let devices = cfg.device_profiles()?;

    let seeds: Vec<u64> = (0..10).collect();
    let cmp = compare_schemes(&sys, &devices, &Scheme::ALL, &cfg.model, &seeds, cfg.schedule.b0_frac)?;
    println!("{:>10} {:>6} {:>12} {:>8} {:>8}", "scheme", "b_sum", "final loss", "std", "rounds");
    for s in &cmp.schemes {
        println!(
            "{:>10} {:>6} {:>12.4} {:>8.4} {:>8.1}",
            s.scheme.to_string(), s.b_sum, s.mean_final_loss, s.std_final_loss, s.mean_rounds_completed
        );
    }

    let (sol, sched) = plan_scheme(Scheme::MaxPower, &sys, &devices, cfg.schedule.b0_frac)?;
    let records = run_simulation(&sys, &devices, &sol, &sched, &cfg.model, 0)?;
    if let Some(last) = records.last() {
        println!(
            "max-power run stops at round {} after {:.1} s, max device energy {:.1} J ({})",
            last.round,
            last.cum_time_s,
            last.max_cum_energy(),
            last.terminated.map_or("completed".to_string(), |r| r.to_string())
        );
    }
    Ok(())
}
