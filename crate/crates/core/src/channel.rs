//! BPSK over AWGN and 2-block Rayleigh fading with perfect receiver CSI,
//! BPSK constellation capacity, and outage probability.
//!
//! SNR is Es/N0 of unit-energy real BPSK: per-dimension noise variance is
//! `σ² = 1 / (2 · Es/N0)`. At rate 1/2, Eb/N0 is 3.01 dB above Es/N0.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Awgn,
    BlockRayleigh,
}

impl ChannelModel {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Awgn => "awgn",
            Self::BlockRayleigh => "block_rayleigh",
        }
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChannelModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "awgn" => Ok(Self::Awgn),
            "block_rayleigh" => Ok(Self::BlockRayleigh),
            _ => Err(format!("unknown channel '{s}'")),
        }
    }
}

/// Fading amplitudes of the two blocks and the noise level for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub block_amps: [f64; 2],
    pub noise_sigma: f64,
    pub snr_db: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-dimension noise standard deviation for unit-energy BPSK.
pub fn noise_sigma(snr_db: f64) -> f64 {
    (1.0 / (2.0 * db_to_linear(snr_db))).sqrt()
}

/// 0 → +1, 1 → -1.
pub fn modulate(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect()
}

pub fn draw_realization<R: Rng + ?Sized>(model: ChannelModel, snr_db: f64, rng: &mut R) -> ChannelRealization {
    let block_amps = match model {
        ChannelModel::Awgn => [1.0, 1.0],
        ChannelModel::BlockRayleigh => {
            let g1: f64 = rng.sample(Exp1);
            let g2: f64 = rng.sample(Exp1);
            [g1.sqrt(), g2.sqrt()]
        }
    };
    ChannelRealization { block_amps, noise_sigma: noise_sigma(snr_db), snr_db }
}

/// Passes one block of symbols through `y = amp·s + n` and returns the exact
/// BPSK LLRs `2·amp·y / σ²` into `out`.
pub fn transmit_demod_into<R: Rng + ?Sized>(symbols: &[f64], amp: f64, sigma: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let scale = 2.0 * amp / (sigma * sigma);
    out.extend(symbols.iter().map(|&s| {
        let n: f64 = rng.sample(StandardNormal);
        scale * (amp * s + sigma * n)
    }));
}

/// Transmits both blocks through `realization`; returns per-block LLRs.
pub fn transmit_demod<R: Rng + ?Sized>(
    block1: &[f64],
    block2: &[f64],
    realization: &ChannelRealization,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut l1 = Vec::with_capacity(block1.len());
    let mut l2 = Vec::with_capacity(block2.len());
    transmit_demod_into(block1, realization.block_amps[0], realization.noise_sigma, rng, &mut l1);
    transmit_demod_into(block2, realization.block_amps[1], realization.noise_sigma, rng, &mut l2);
    (l1, l2)
}

const GH_NODES: usize = 128;

/// Gauss-Hermite nodes and weights for weight `exp(-x²)` (Newton iteration on
/// the orthonormal recurrence).
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^(-1/4)
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gh_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(GH_NODES))
}

/// `log2(1 + e^{-l})` without overflow.
fn log2_1p_exp_neg(l: f64) -> f64 {
    let v = if l > -30.0 { (-l).exp().ln_1p() } else { -l + l.exp().ln_1p() };
    v / std::f64::consts::LN_2
}

/// BPSK constellation capacity in bits per channel use at linear Es/N0.
pub fn bpsk_capacity(snr_linear: f64) -> f64 {
    if snr_linear <= 0.0 {
        return 0.0;
    }
    // L ~ N(4·snr, 8·snr) given bit 0
    let mean = 4.0 * snr_linear;
    let std = (8.0 * snr_linear).sqrt();
    let (x, w) = gh_rule();
    let mut acc = 0.0;
    for (&xi, &wi) in x.iter().zip(w) {
        acc += wi * log2_1p_exp_neg(mean + std::f64::consts::SQRT_2 * std * xi);
    }
    let c = 1.0 - acc / std::f64::consts::PI.sqrt();
    c.clamp(0.0, 1.0)
}

/// Tabulated [`bpsk_capacity`] on a log-SNR grid with linear interpolation,
/// used inside Monte Carlo loops.
#[derive(Debug)]
pub struct CapacityTable {
    ln_lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl CapacityTable {
    const LN_LO: f64 = -20.0;
    const LN_HI: f64 = 20.0;
    const POINTS: usize = 40_001;

    pub fn global() -> &'static CapacityTable {
        static TABLE: OnceLock<CapacityTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let step = (Self::LN_HI - Self::LN_LO) / (Self::POINTS - 1) as f64;
            let values = (0..Self::POINTS)
                .into_par_iter()
                .map(|i| bpsk_capacity((Self::LN_LO + step * i as f64).exp()))
                .collect();
            CapacityTable { ln_lo: Self::LN_LO, step, values }
        })
    }

    pub fn capacity(&self, snr_linear: f64) -> f64 {
        if snr_linear <= 0.0 {
            return 0.0;
        }
        let pos = (snr_linear.ln() - self.ln_lo) / self.step;
        if pos <= 0.0 {
            // C(s) ≈ s / ln 2 for vanishing SNR
            return self.values[0] * snr_linear / (self.ln_lo.exp());
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

fn is_outage(table: &CapacityTable, gains: [f64; 2], snr: f64, rate: f64) -> bool {
    0.5 * (table.capacity(gains[0] * snr) + table.capacity(gains[1] * snr)) < rate
}

/// Monte Carlo outage probability at one SNR point.
pub fn outage_probability<R: Rng + ?Sized>(
    model: ChannelModel,
    snr_db: f64,
    rate: f64,
    trials: u64,
    rng: &mut R,
) -> f64 {
    assert!(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
    let snr = db_to_linear(snr_db);
    match model {
        ChannelModel::Awgn => f64::from(u8::from(bpsk_capacity(snr) < rate)),
        ChannelModel::BlockRayleigh => {
            let table = CapacityTable::global();
            let events = (0..trials)
                .filter(|_| {
                    let gains = [rng.sample::<f64, _>(Exp1), rng.sample::<f64, _>(Exp1)];
                    is_outage(table, gains, snr, rate)
                })
                .count();
            events as f64 / trials as f64
        }
    }
}

/// Outage event counts on an SNR grid. Every grid point sees the same fading
/// draws, so the counts are nonincreasing in SNR. Deterministic given `seed`
/// regardless of thread count.
pub fn outage_curve(model: ChannelModel, snr_grid_db: &[f64], rate: f64, trials: u64, seed: u64) -> Vec<u64> {
    assert!(rate > 0.0 && rate < 1.0, "rate must lie in (0, 1)");
    let snrs: Vec<f64> = snr_grid_db.iter().map(|&d| db_to_linear(d)).collect();
    match model {
        ChannelModel::Awgn => snrs
            .iter()
            .map(|&s| if bpsk_capacity(s) < rate { trials } else { 0 })
            .collect(),
        ChannelModel::BlockRayleigh => {
            const CHUNK: u64 = 4096;
            let table = CapacityTable::global();
            let chunks = trials.div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = seeding::stream(seed, u64::MAX, c);
                    let mut counts = vec![0u64; snrs.len()];
                    let len = CHUNK.min(trials - c * CHUNK);
                    for _ in 0..len {
                        let gains = [rng.sample::<f64, _>(Exp1), rng.sample::<f64, _>(Exp1)];
                        for (cnt, &s) in counts.iter_mut().zip(&snrs) {
                            if is_outage(table, gains, s, rate) {
                                *cnt += 1;
                            } else {
                                // larger SNR cannot be in outage for these gains
                                break;
                            }
                        }
                    }
                    counts
                })
                .reduce(
                    || vec![0u64; snrs.len()],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                )
        }
    }
}
