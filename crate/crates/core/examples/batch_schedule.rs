//! Batch schedules for one sample budget: the growing square-root schedule,
//! the two baselines, and the best fixed batch under the convergence bound.

use feel_sc2::schedule::{
    adaptive_sqrt_schedule, baseline_schedule, initial_batch, optimal_batch_continuous, optimal_fixed_batch,
    prop2_bound, BoundParams, ScheduleScheme,
};

fn main() -> feel_sc2::Result<()> {
    let (b_sum, rounds) = (4185, 300);
    let b0 = initial_batch(b_sum, rounds, 0.5)?;
    let adaptive = adaptive_sqrt_schedule(b_sum, rounds, b0)?;
    println!("b0 = {b0}, alpha = {:.4}", adaptive.alpha);
    for scheme in [ScheduleScheme::Equal, ScheduleScheme::DecreasingSqrt] {
        let s = baseline_schedule(scheme, b_sum, rounds, b0)?;
        println!("{scheme:?}: first {:?}, last {:?}, total {}", &s.batches[..4], &s.batches[rounds - 3..], s.total());
    }
    println!(
        "AdaptiveSqrt: first {:?}, last {:?}, total {}",
        &adaptive.batches[..4],
        &adaptive.batches[rounds - 3..],
        adaptive.total()
    );

    let small = adaptive_sqrt_schedule(40, 4, 5)?;
    println!("40 samples over 4 rounds from b0 = 5: {:?}", small.batches);

    let bp = BoundParams::default();
    let b = optimal_fixed_batch(&bp, b_sum)?;
    println!(
        "fixed batch: continuous {:.2}, integer {b} ({} rounds), bound {:.4}",
        optimal_batch_continuous(&bp, b_sum),
        b_sum / b,
        prop2_bound(&bp, b, b_sum)?
    );
    Ok(())
}
