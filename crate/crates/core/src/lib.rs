//! Polar codes for two-block slow fading channels.
//!
//! - [`polar`]: transform, SC decoder, erasure self-decodability check
//! - [`construction`]: GA density evolution, AWGN and diversity codes
//! - [`mapping`]: horizontal, uniform, random and diversity interleavers
//! - [`channel`]: BPSK, AWGN and block Rayleigh, capacity and outage
//! - [`harness`]: seeded Monte Carlo BLER sweeps and CSV output
//! - [`cli`]: the `polardiv` command line

pub mod calibration;
pub mod channel;
pub mod cli;
pub mod construction;
pub mod error;
pub mod harness;
pub mod mapping;
pub mod polar;
pub mod seeding;

pub use error::{Error, Result};
