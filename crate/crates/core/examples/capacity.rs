//! Ergodic Rayleigh capacity in closed form next to a Monte-Carlo estimate,
//! for one device at a few transmit powers.

use feel_sc2::channel::{ergodic_capacity, mc_capacity_oracle, ChannelParams, DeviceProfile};
use feel_sc2::numerics::expint_ei;
use feel_sc2::units::{dbm_to_w, dbm_per_hz_to_w_per_hz};

fn main() -> feel_sc2::Result<()> {
    let ch = ChannelParams::new(0.5e6, dbm_per_hz_to_w_per_hz(-174.0))?;
    // 200 m away, 3 dB of shadowing
    let dev = DeviceProfile::new(0, 0.2, 3.0, 0.1, 0.1, 1.0)?;
    println!("large-scale gain {:.3e}", dev.phi);
    println!("{:>8} {:>8} {:>14} {:>14}", "p [dBm]", "SNR [dB]", "closed [b/s]", "MC [b/s]");
    for dbm in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let p = dbm_to_w(dbm);
        let snr = p * dev.phi / ch.noise_power();
        let c = ergodic_capacity(p, &dev, &ch)?;
        let mc = mc_capacity_oracle(p, &dev, &ch, 200_000, 1)?;
        println!("{dbm:>8.1} {:>8.2} {c:>14.1} {mc:>14.1}", 10.0 * snr.log10());
    }
    println!("Ei(-1) = {:.15}", expint_ei(-1.0)?);
    Ok(())
}
