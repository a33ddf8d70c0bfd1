//! `polardiv` command line: `construct`, `check`, `simulate`, `outage`.
//!
//! Exit codes: 0 on success (and when every check passes), 1 on usage or
//! runtime errors, 2 when a self-decodability check fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::calibration;
use crate::channel::ChannelModel;
use crate::construction;
use crate::error::{Error, Result};
use crate::harness::{self, CodeType, ExperimentConfig, SweepResult};
use crate::mapping::{self, InterleaverKind};
use crate::polar::{erasure_sc_check, ErasureReport, PolarCodeSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "polardiv", version, about = "Diversity polar codes for 2-block fading channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an AWGN or diversity polar code and write its JSON spec.
    Construct(ConstructArgs),
    /// Check self-decodability of both diversity-interleaver blocks.
    Check(CheckArgs),
    /// Run a Monte Carlo BLER sweep and write a results CSV.
    Simulate(SimulateArgs),
    /// Estimate outage probability and write it in the results CSV format.
    Outage(OutageArgs),
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Block length (power of two).
    #[arg(long)]
    pub n: usize,
    /// Number of information bits.
    #[arg(long)]
    pub k: usize,
    /// Design Es/N0 in dB [default: calibrated value for n].
    #[arg(long, allow_hyphen_values = true)]
    pub design_snr_db: Option<f64>,
    /// Enforce the mirror constraint (diversity code); requires k <= n/2.
    #[arg(long)]
    pub diversity: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct SnrGridArgs {
    /// First Es/N0 point in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_start: f64,
    /// Last Es/N0 point in dB (inclusive).
    #[arg(long, allow_hyphen_values = true)]
    pub snr_stop: f64,
    #[arg(long, default_value_t = 1.0)]
    pub snr_step: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub interleaver: InterleaverKind,
    #[arg(long)]
    pub channel: ChannelModel,
    #[command(flatten)]
    pub grid: SnrGridArgs,
    /// Random interleaver seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of the per-trial random streams.
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_trials: u64,
    #[arg(long, default_value_t = 100)]
    pub target_errors: u64,
    /// Worker threads [default: available parallelism]. Results do not depend
    /// on this value.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutageArgs {
    #[arg(long)]
    pub channel: ChannelModel,
    #[arg(long)]
    pub rate: f64,
    #[command(flatten)]
    pub grid: SnrGridArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

impl SnrGridArgs {
    pub fn grid(&self) -> Result<Vec<f64>> {
        snr_grid(self.snr_start, self.snr_stop, self.snr_step)
    }
}

/// Inclusive grid `start, start + step, …, ≤ stop`, rounded to 1e-9 dB.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidConfig("need finite snr-start <= snr-stop and snr-step > 0".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| ((start + step * i as f64) * 1e9).round() / 1e9).collect())
}

/// Parses `args` (including the program name) and runs the command, writing
/// human-readable output to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Construct(a) => construct(a, out),
        Command::Check(a) => check(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Outage(a) => outage(a, out),
    }
}

fn construct(a: ConstructArgs, out: &mut dyn Write) -> Result<i32> {
    if a.n < 2 || !a.n.is_power_of_two() {
        return Err(Error::InvalidSpec(format!("--n {} is not a power of two >= 2", a.n)));
    }
    let n_log2 = a.n.trailing_zeros();
    let snr = a.design_snr_db.unwrap_or_else(|| calibration::design_snr_db(n_log2));
    let spec = if a.diversity {
        construction::construct_diversity(n_log2, a.k, snr)?
    } else {
        construction::construct_awgn(n_log2, a.k, snr)?
    };
    harness::write_atomic(&a.out, (spec.to_json()? + "\n").as_bytes())?;
    writeln!(
        out,
        "{} code n={} k={} design_snr_db={}",
        CodeType::of(&spec),
        spec.n(),
        spec.k(),
        snr
    )?;
    writeln!(out, "info_set {:?}", spec.info_set())?;
    if let Some(set) = spec.interleaver_set() {
        if set != spec.info_set() {
            writeln!(out, "interleaver_set {set:?}")?;
        }
    }
    Ok(EXIT_OK)
}

/// Per-block erasure reports for the spec's diversity interleaver.
pub fn check_blocks(spec: &PolarCodeSpec) -> Result<[ErasureReport; 2]> {
    let assignment = mapping::diversity_ilv(spec)?;
    Ok([1u8, 2].map(|b| erasure_sc_check(spec, assignment.positions(b))))
}

fn check(a: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = PolarCodeSpec::load(&a.spec)?;
    let reports = check_blocks(&spec)?;
    for (b, r) in reports.iter().enumerate() {
        match r.first_stuck_info_index {
            None => writeln!(out, "block {}: PASS", b + 1)?,
            Some(i) => writeln!(out, "block {}: FAIL (first stuck info index {i})", b + 1)?,
        }
    }
    Ok(if reports.iter().all(|r| r.self_decodable) { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct RunRecord<'a> {
    spec: &'a PolarCodeSpec,
    #[serde(flatten)]
    result: &'a SweepResult,
}

fn json_sibling(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = PolarCodeSpec::load(&a.spec)?;
    let config = ExperimentConfig {
        code_type: CodeType::of(&spec),
        n_log2: spec.n_log2(),
        k: spec.k(),
        design_snr_db: spec.meta().design_snr_db,
        interleaver: a.interleaver,
        interleaver_seed: a.seed,
        channel: a.channel,
        snr_grid_db: a.grid.grid()?,
        max_trials: a.max_trials,
        target_block_errors: a.target_errors,
        master_seed: a.master_seed,
    };
    let workers = a.workers.unwrap_or_else(default_workers);
    let result = harness::run_sweep_with_spec(&config, &spec, workers)?;
    let csv = harness::csv_string(&result.csv_rows())?;
    let json = serde_json::to_string_pretty(&RunRecord { spec: &spec, result: &result })? + "\n";
    harness::write_atomic(&a.out, csv.as_bytes())?;
    harness::write_atomic(&json_sibling(&a.out), json.as_bytes())?;
    for p in &result.points {
        writeln!(out, "snr {:>7.3} dB  trials {:>8}  errors {:>6}  bler {:.4e}", p.snr_db, p.trials, p.block_errors, p.bler)?;
    }
    Ok(EXIT_OK)
}

fn outage(a: OutageArgs, out: &mut dyn Write) -> Result<i32> {
    let grid = a.grid.grid()?;
    let rows = harness::outage_rows(a.channel, &grid, a.rate, a.trials, a.seed)?;
    harness::write_atomic(&a.out, harness::csv_string(&rows)?.as_bytes())?;
    for r in &rows {
        writeln!(out, "snr {:>7.3} dB  outage {:.4e}", r.snr_db, r.bler)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive_and_rounded() {
        assert_eq!(snr_grid(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert_eq!(snr_grid(0.0, 1.0, 0.1).unwrap()[3], 0.3);
        assert_eq!(snr_grid(-2.0, 2.0, 2.0).unwrap(), vec![-2.0, 0.0, 2.0]);
        assert!(snr_grid(1.0, 0.0, 0.5).is_err());
        assert!(snr_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let mut sink = Vec::new();
        assert_eq!(run(["polardiv", "construct", "--n", "8", "--bogus"], &mut sink), EXIT_USAGE);
        assert_eq!(run(["polardiv", "frobnicate"], &mut sink), EXIT_USAGE);
        assert_eq!(run(["polardiv", "--help"], &mut sink), EXIT_OK);
    }
}
