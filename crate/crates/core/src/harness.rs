//! Monte Carlo BLER sweeps over (code × interleaver × channel) with
//! early stopping and parallel-invariant seeding.
//!
//! Trial `t` at grid point `i` draws everything from a generator seeded by
//! `derive_seed(master_seed, i, t)`. Trials run in fixed-size batches; the
//! outcomes of a batch are scanned in trial order and the point stops at the
//! trial that collects the last required block error. Any trials computed
//! past that one are discarded, so results do not depend on the worker count.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration;
use crate::channel::{self, ChannelModel, ChannelRealization};
use crate::construction;
use crate::error::{Error, Result};
use crate::mapping::{self, BlockAssignment, InterleaverKind};
use crate::polar::{self, PolarCodeSpec, ScDecoder};
use crate::seeding::{self, TrialRng};

const BATCH: u64 = 256;

pub const CSV_HEADER: &str =
    "code,interleaver,channel,n,k,design_snr_db,interleaver_seed,master_seed,snr_db,trials,block_errors,bler";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeType {
    Awgn,
    Diversity,
}

impl CodeType {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Awgn => "awgn",
            Self::Diversity => "diversity",
        }
    }

    pub fn of(spec: &PolarCodeSpec) -> Self {
        if spec.meta().diversity {
            Self::Diversity
        } else {
            Self::Awgn
        }
    }
}

impl fmt::Display for CodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeType {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "awgn" => Ok(Self::Awgn),
            "diversity" => Ok(Self::Diversity),
            _ => Err(format!("unknown code type '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub code_type: CodeType,
    pub n_log2: u32,
    pub k: usize,
    pub design_snr_db: f64,
    pub interleaver: InterleaverKind,
    pub interleaver_seed: u64,
    pub channel: ChannelModel,
    pub snr_grid_db: Vec<f64>,
    pub max_trials: u64,
    pub target_block_errors: u64,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Rate-1/2 config at the calibrated design SNR with the desk-scale
    /// stopping rule (30 errors, 10⁵ trials).
    pub fn half_rate(
        code_type: CodeType,
        n_log2: u32,
        interleaver: InterleaverKind,
        channel: ChannelModel,
        snr_grid_db: Vec<f64>,
    ) -> Self {
        Self {
            code_type,
            n_log2,
            k: 1 << (n_log2 - 1),
            design_snr_db: calibration::design_snr_db(n_log2),
            interleaver,
            interleaver_seed: 0,
            channel,
            snr_grid_db,
            max_trials: 100_000,
            target_block_errors: 30,
            master_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_block_errors < 1 || self.max_trials < self.target_block_errors {
            return Err(Error::InvalidConfig(
                "need max_trials >= target_block_errors >= 1".into(),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("empty SNR grid".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("SNR grid must be finite".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("SNR grid must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Constructs the code this config describes.
    pub fn build_code(&self) -> Result<PolarCodeSpec> {
        match self.code_type {
            CodeType::Awgn => construction::construct_awgn(self.n_log2, self.k, self.design_snr_db),
            CodeType::Diversity => construction::construct_diversity(self.n_log2, self.k, self.design_snr_db),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
}

impl SweepPoint {
    fn new(snr_db: f64, trials: u64, block_errors: u64) -> Self {
        Self { snr_db, trials, block_errors, bler: block_errors as f64 / trials as f64 }
    }

    /// Binomial standard error of `bler`.
    pub fn std_error(&self) -> f64 {
        (self.bler * (1.0 - self.bler) / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
    pub version: String,
}

/// Per-worker buffers.
struct Workspace<'a> {
    decoder: ScDecoder<'a>,
    message: Vec<u8>,
    llr1: Vec<f64>,
    llr2: Vec<f64>,
    llrs: Vec<f64>,
}

impl<'a> Workspace<'a> {
    fn new(spec: &'a PolarCodeSpec) -> Self {
        let n = spec.n();
        Self {
            decoder: ScDecoder::new(spec),
            message: vec![0; spec.k()],
            llr1: Vec::with_capacity(n / 2),
            llr2: Vec::with_capacity(n / 2),
            llrs: vec![0.0; n],
        }
    }
}

fn random_message(rng: &mut impl RngCore, out: &mut [u8]) {
    for chunk in out.chunks_mut(64) {
        let word = rng.next_u64();
        for (i, b) in chunk.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
    }
}

/// One trial with a given channel realization: the message comes first from
/// `rng`, then the noise of block 1, then block 2. Returns `true` on a block
/// error.
fn trial_with(
    spec: &PolarCodeSpec,
    assignment: &BlockAssignment,
    realization: Option<&ChannelRealization>,
    model: ChannelModel,
    snr_db: f64,
    rng: &mut TrialRng,
    ws: &mut Workspace<'_>,
) -> bool {
    random_message(rng, &mut ws.message);
    let codeword = polar::polar_encode(spec, &ws.message).expect("message length matches spec");
    let symbols = channel::modulate(&codeword);
    let (b1, b2) = assignment.apply(&symbols).expect("assignment length matches spec");
    let drawn;
    let real = match realization {
        Some(r) => r,
        None => {
            drawn = channel::draw_realization(model, snr_db, rng);
            &drawn
        }
    };
    channel::transmit_demod_into(&b1, real.block_amps[0], real.noise_sigma, rng, &mut ws.llr1);
    channel::transmit_demod_into(&b2, real.block_amps[1], real.noise_sigma, rng, &mut ws.llr2);
    assignment
        .invert_into(&ws.llr1, &ws.llr2, &mut ws.llrs)
        .expect("block lengths match");
    let decoded = ws.decoder.decode(&ws.llrs).expect("llr length matches spec");
    decoded != ws.message
}

fn check_consistent(spec: &PolarCodeSpec, assignment: &BlockAssignment) -> Result<()> {
    if assignment.len() != spec.n() {
        return Err(Error::LengthMismatch { expected: spec.n(), got: assignment.len() });
    }
    if !assignment.is_balanced() {
        return Err(Error::InvalidConfig("assignment is not balanced".into()));
    }
    Ok(())
}

/// Runs one trial: random message, encode, interleave, BPSK, channel,
/// demodulate, deinterleave, SC decode. Returns `true` on a block error.
pub fn run_trial(
    config: &ExperimentConfig,
    spec: &PolarCodeSpec,
    assignment: &BlockAssignment,
    snr_db: f64,
    trial_rng: &mut TrialRng,
) -> Result<bool> {
    check_consistent(spec, assignment)?;
    let mut ws = Workspace::new(spec);
    Ok(trial_with(spec, assignment, None, config.channel, snr_db, trial_rng, &mut ws))
}

/// Like [`run_trial`] but with a fixed channel realization.
pub fn run_trial_with_realization(
    spec: &PolarCodeSpec,
    assignment: &BlockAssignment,
    realization: &ChannelRealization,
    trial_rng: &mut TrialRng,
) -> Result<bool> {
    check_consistent(spec, assignment)?;
    let mut ws = Workspace::new(spec);
    Ok(trial_with(
        spec,
        assignment,
        Some(realization),
        ChannelModel::Awgn,
        realization.snr_db,
        trial_rng,
        &mut ws,
    ))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Runs the sweep for a code built from `config`.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    let spec = config.build_code()?;
    run_sweep_with_spec(config, &spec, workers)
}

/// Runs the sweep for an explicit code; `config.n_log2` and `config.k` must
/// match it.
pub fn run_sweep_with_spec(config: &ExperimentConfig, spec: &PolarCodeSpec, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    if spec.n_log2() != config.n_log2 || spec.k() != config.k {
        return Err(Error::InvalidConfig(format!(
            "config (n_log2 {}, k {}) does not match spec (n_log2 {}, k {})",
            config.n_log2,
            config.k,
            spec.n_log2(),
            spec.k()
        )));
    }
    let assignment = mapping::build(config.interleaver, spec, config.interleaver_seed)?;
    check_consistent(spec, &assignment)?;
    let pool = pool(workers)?;

    let points = config
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let (mut trials, mut errors) = (0u64, 0u64);
            'batches: while trials < config.max_trials {
                let start = trials;
                let end = (start + BATCH).min(config.max_trials);
                let outcomes: Vec<bool> = pool.install(|| {
                    (start..end)
                        .into_par_iter()
                        .map_init(
                            || Workspace::new(spec),
                            |ws, t| {
                                let mut rng = seeding::stream(config.master_seed, i as u64, t);
                                trial_with(spec, &assignment, None, config.channel, snr_db, &mut rng, ws)
                            },
                        )
                        .collect()
                });
                for err in outcomes {
                    trials += 1;
                    errors += u64::from(err);
                    if errors >= config.target_block_errors {
                        break 'batches;
                    }
                }
            }
            SweepPoint::new(snr_db, trials, errors)
        })
        .collect();

    Ok(SweepResult { config: config.clone(), points, version: env!("CARGO_PKG_VERSION").to_string() })
}

/// One CSV row per the results file contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub code: String,
    pub interleaver: String,
    pub channel: String,
    pub n: String,
    pub k: String,
    pub design_snr_db: String,
    pub interleaver_seed: String,
    pub master_seed: u64,
    pub snr_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
}

impl SweepResult {
    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let c = &self.config;
        let seed = match c.interleaver {
            InterleaverKind::Random => c.interleaver_seed.to_string(),
            _ => "-".to_string(),
        };
        self.points
            .iter()
            .map(|p| CsvRow {
                code: c.code_type.to_string(),
                interleaver: c.interleaver.to_string(),
                channel: c.channel.to_string(),
                n: (1usize << c.n_log2).to_string(),
                k: c.k.to_string(),
                design_snr_db: c.design_snr_db.to_string(),
                interleaver_seed: seed.clone(),
                master_seed: c.master_seed,
                snr_db: p.snr_db,
                trials: p.trials,
                block_errors: p.block_errors,
                bler: p.bler,
            })
            .collect()
    }

    /// `(snr_db, bler)` pairs.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.snr_db, p.bler)).collect()
    }
}

/// Outage probability rows (`code = outage`, `interleaver = -`).
pub fn outage_rows(model: ChannelModel, snr_grid_db: &[f64], rate: f64, trials: u64, seed: u64) -> Result<Vec<CsvRow>> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidConfig(format!("rate {rate} outside (0, 1)")));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be positive".into()));
    }
    if snr_grid_db.is_empty() || snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("SNR grid must be non-empty and strictly increasing".into()));
    }
    let counts = channel::outage_curve(model, snr_grid_db, rate, trials, seed);
    Ok(snr_grid_db
        .iter()
        .zip(counts)
        .map(|(&snr_db, events)| CsvRow {
            code: "outage".into(),
            interleaver: "-".into(),
            channel: model.to_string(),
            n: "-".into(),
            k: "-".into(),
            design_snr_db: "-".into(),
            interleaver_seed: "-".into(),
            master_seed: seed,
            snr_db,
            trials,
            block_errors: events,
            bler: events as f64 / trials as f64,
        })
        .collect())
}

/// Renders rows as CSV text with the contract header.
pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        return Ok(format!("{CSV_HEADER}\n"));
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// SNR at which a BLER curve crosses `target`, by linear interpolation of
/// `log(bler)` against SNR on the first bracketing segment. A segment ending
/// at zero BLER is interpolated linearly in BLER. `None` if no segment
/// brackets the target.
pub fn estimate_snr_at_bler(points: &[(f64, f64)], target: f64) -> Option<f64> {
    if target.is_nan() || target <= 0.0 {
        return None;
    }
    if let Some(&(s, _)) = points.iter().find(|(_, b)| *b == target) {
        return Some(s);
    }
    points.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if !(b0 > target && target > b1) {
            return None;
        }
        let t = if b1 > 0.0 {
            (b0.ln() - target.ln()) / (b0.ln() - b1.ln())
        } else {
            (b0 - target) / b0
        };
        Some(s0 + t * (s1 - s0))
    })
}
