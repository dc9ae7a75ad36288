//! Joint sensing, computation and communication (SC²) resource allocation
//! for federated edge learning (FEEL) with ISAC devices.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: exponential integral and grid search.
//! - [`channel`]: path loss, ergodic Rayleigh capacity and a Monte-Carlo check.
//! - [`cost`]: per-round latency/energy accounting and the constraint audit.
//! - [`allocator`]: Step 1, maximal total sensed samples and transmit powers.
//! - [`schedule`]: Step 2, convergence bounds and per-round batch schedules.
//! - [`sensing`]: FMCW echo synthesis, SVD filter, STFT spectrograms and SSIM.
//! - [`sim`]: round-by-round FEEL simulation on a surrogate loss.
//! - [`config`], [`io`] and [`cli`]: scenario files, result emission and
//!   the commands behind the `feel-sc2` binary.

pub mod allocator;
pub mod channel;
pub mod cli;
pub mod config;
pub mod cost;
pub mod error;
pub mod io;
pub mod numerics;
pub mod schedule;
pub mod sensing;
pub mod sim;
pub mod units;

pub use error::{Error, Result};
