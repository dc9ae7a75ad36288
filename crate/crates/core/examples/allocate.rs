//! Solve the power and upload-time allocation for the default six-device
//! scenario and check every constraint of the resulting plan.

use feel_sc2::allocator::solve_allocation;
use feel_sc2::config::ScenarioConfig;
use feel_sc2::cost::audit_constraints;
use feel_sc2::schedule::{adaptive_sqrt_schedule, initial_batch};
use feel_sc2::units::w_to_dbm;

fn main() -> feel_sc2::Result<()> {
    let cfg = ScenarioConfig::default();
    let sys = cfg.system_params();
    let devices = cfg.device_profiles()?;
    let sol = solve_allocation(&sys, &devices)?;

    println!("b_sum = {} samples ({})", sol.b_sum, sol.regime);
    println!("{:>3} {:>8} {:>9} {:>9} {:>10}", "k", "d [m]", "p_s[dBm]", "p_c[dBm]", "t_up [s]");
    for (a, d) in sol.devices.iter().zip(&devices) {
        println!(
            "{:>3} {:>8.1} {:>9.2} {:>9.2} {:>10.4}",
            a.id,
            d.dist_km * 1e3,
            w_to_dbm(a.p_s_w),
            w_to_dbm(a.p_c_w),
            a.t_cm_s
        );
    }

    let b0 = initial_batch(sol.b_sum, sys.rounds, cfg.schedule.b0_frac)?;
    let sched = adaptive_sqrt_schedule(sol.b_sum, sys.rounds, b0)?;
    let report = audit_constraints(&sol, &sched, &sys, &devices)?;
    let tightest = report
        .checks
        .iter()
        .min_by(|a, b| (a.slack / a.rhs.abs().max(1e-300)).total_cmp(&(b.slack / b.rhs.abs().max(1e-300))))
        .unwrap();
    println!(
        "audit: {} checks, all pass = {}, tightest {} (slack {:.3e})",
        report.checks.len(),
        report.all_pass(),
        tightest.name,
        tightest.slack
    );
    Ok(())
}
