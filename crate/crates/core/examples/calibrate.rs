//! Finds, for each block length, the design SNR at which the rate-1/2 AWGN
//! code built at that SNR has a BLER of about 1e-2 on the AWGN channel.
//!
//! Prints rows for `src/calibration.rs`.
//!
//!     cargo run --release --example calibrate -- [min_n_log2] [max_n_log2]

use polar_diversity::channel::ChannelModel;
use polar_diversity::harness::{run_sweep, CodeType, ExperimentConfig};
use polar_diversity::mapping::InterleaverKind;

const TARGET_BLER: f64 = 1e-2;
const ERRORS: u64 = 400;

fn bler_at(n_log2: u32, snr_db: f64, workers: usize) -> f64 {
    let mut cfg = ExperimentConfig::half_rate(
        CodeType::Awgn,
        n_log2,
        InterleaverKind::Uniform,
        ChannelModel::Awgn,
        vec![snr_db],
    );
    cfg.design_snr_db = snr_db;
    cfg.target_block_errors = ERRORS;
    cfg.max_trials = 200_000;
    cfg.master_seed = 0xca1b;
    run_sweep(&cfg, workers).expect("valid config").points[0].bler
}

fn main() {
    let args: Vec<u32> = std::env::args().skip(1).map(|a| a.parse().expect("integer")).collect();
    let lo_n = args.first().copied().unwrap_or(3);
    let hi_n = args.get(1).copied().unwrap_or(10);
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);

    for n_log2 in lo_n..=hi_n {
        let (mut lo, mut hi) = (-2.0f64, 6.0f64);
        // BLER falls with SNR; bisect on log(BLER) - log(target)
        for _ in 0..9 {
            let mid = 0.5 * (lo + hi);
            if bler_at(n_log2, mid, workers) > TARGET_BLER {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let snr = (0.5 * (lo + hi) * 20.0).round() / 20.0;
        let check = bler_at(n_log2, snr, workers);
        println!("    ({n_log2}, {snr:.2}), // bler {check:.3e}");
    }
}
