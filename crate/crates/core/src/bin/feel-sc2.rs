use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use feel_sc2::allocator::SweepParam;
use feel_sc2::cli;
use feel_sc2::sim::Scheme;

#[derive(Parser)]
#[command(name = "feel-sc2", version, about = "Sensing, computation and communication planning for federated edge learning")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for powers, upload times and the total sample budget (JSON).
    Allocate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-round batch sizes from an allocation (CSV).
    Schedule {
        #[arg(long)]
        alloc: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scheme round by round (CSV records plus a JSON summary).
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "proposed")]
        scheme: Scheme,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-solve the allocation across an energy or time budget range (CSV).
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectrogram SSIM versus sensing power (CSV plus a JSON threshold report).
    SenseQuality {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        powers_dbm: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cmd: Command) -> feel_sc2::Result<()> {
    match cmd {
        Command::Allocate { config, out } => {
            let sol = cli::cmd_allocate(config.as_deref(), &out)?;
            println!("b_sum = {} ({})", sol.b_sum, sol.regime);
        }
        Command::Schedule { alloc, config, out } => {
            let s = cli::cmd_schedule(&alloc, config.as_deref(), &out)?;
            println!("{} rounds, {} samples", s.rounds(), s.total());
        }
        Command::Simulate { config, scheme, seed, out } => {
            let s = cli::cmd_simulate(config.as_deref(), scheme, seed, &out)?;
            match s.reason {
                Some(r) => println!("{scheme}: {} of {} rounds, stopped: {r}", s.rounds_completed, s.rounds_planned),
                None => println!("{scheme}: {} rounds, final loss {:.4}", s.rounds_completed, s.final_loss),
            }
        }
        Command::Sweep { config, param, from, to, steps, out } => {
            let rows = cli::cmd_sweep(config.as_deref(), param, from, to, steps, &out)?;
            println!("{} sweep points", rows.len());
        }
        Command::SenseQuality { config, powers_dbm, seed, out } => {
            let (_, r) = cli::cmd_sense_quality(config.as_deref(), powers_dbm.as_deref(), seed, &out)?;
            println!("threshold {:.1} dBm, saturation SSIM {:.4}", r.threshold_dbm, r.saturation_ssim);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e))
        }
    }
}
