//! Code construction for the BI-AWGN channel by Gaussian-approximation
//! density evolution.
//!
//! The design SNR is Es/N0 of unit-energy real BPSK, so the channel LLR has
//! mean `4 · Es/N0` (noise variance `σ² = 1 / (2 · Es/N0)`). Channel uses are
//! i.i.d. during design, so the reliability of each u-index does not depend on
//! the order in which code bits are later placed on the channel.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::polar::{DesignMeta, PolarCodeSpec};

/// Upper bound on tracked mean LLRs.
pub const MEAN_LLR_CAP: f64 = 1e12;

const PHI_SPLIT: f64 = 10.0;
const INVERSE_REL_TOL: f64 = 1e-9;

/// Per-u-index mean decision LLR; larger is more reliable.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    pub n_log2: u32,
    pub design_snr_db: f64,
    /// Natural u-index order, 0-based.
    pub metric: Vec<f64>,
}

impl ReliabilityProfile {
    /// 1-based indices sorted from most to least reliable. Ties go to the
    /// larger index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (1..=self.metric.len()).collect();
        idx.sort_by(|&a, &b| {
            self.metric[b - 1]
                .partial_cmp(&self.metric[a - 1])
                .unwrap_or(Ordering::Equal)
                .then(b.cmp(&a))
        });
        idx
    }
}

/// `ln φ(m)` for the two-piece Chung approximation of
/// `φ(m) = 1 - E[tanh(L/2)]`, `L ~ N(m, 2m)`.
fn ln_phi(m: f64) -> f64 {
    if m <= 0.0 {
        0.0
    } else if m < PHI_SPLIT {
        // the fit exceeds 1 near zero; clamp
        (-0.4527 * m.powf(0.86) + 0.0218).min(0.0)
    } else {
        -m / 4.0 + (1.0 - 10.0 / (7.0 * m)).ln() + 0.5 * (std::f64::consts::PI / m).ln()
    }
}

/// Smallest `m` in `[0, MEAN_LLR_CAP]` with `ln φ(m) <= target`, by bisection.
fn inv_ln_phi(target: f64) -> f64 {
    if target >= 0.0 {
        return 0.0;
    }
    if ln_phi(MEAN_LLR_CAP) > target {
        return MEAN_LLR_CAP;
    }
    let (mut lo, mut hi) = (0.0f64, MEAN_LLR_CAP);
    while hi - lo > INVERSE_REL_TOL * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if ln_phi(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Check-node (minus) update: `φ⁻¹(1 - (1 - φ(m))²)`.
pub fn minus_update(m: f64) -> f64 {
    let lp = ln_phi(m);
    let phi = lp.exp();
    // 1 - (1 - φ)² = φ (2 - φ)
    inv_ln_phi(lp + (2.0 - phi).ln())
}

/// Variable-node (plus) update.
pub fn plus_update(m: f64) -> f64 {
    (2.0 * m).min(MEAN_LLR_CAP)
}

/// Runs Gaussian-approximation density evolution down `n_log2` levels.
pub fn ga_density_evolution(n_log2: u32, design_snr_db: f64) -> Result<ReliabilityProfile> {
    if !(1..=16).contains(&n_log2) {
        return Err(Error::InvalidSpec(format!("n_log2 = {n_log2} outside [1, 16]")));
    }
    if !design_snr_db.is_finite() {
        return Err(Error::InvalidSpec("design SNR must be finite".into()));
    }
    let m0 = (4.0 * 10f64.powf(design_snr_db / 10.0)).min(MEAN_LLR_CAP);
    let mut means = vec![m0];
    for _ in 0..n_log2 {
        means = means.iter().flat_map(|&m| [minus_update(m), plus_update(m)]).collect();
    }
    Ok(ReliabilityProfile { n_log2, design_snr_db, metric: means })
}

fn check_sizes(n_log2: u32, k: usize) -> Result<usize> {
    let n = 1usize
        .checked_shl(n_log2)
        .ok_or_else(|| Error::InvalidSpec(format!("n_log2 = {n_log2} too large")))?;
    if k == 0 || k > n {
        return Err(Error::InvalidSpec(format!("k = {k} outside [1, {n}]")));
    }
    Ok(n)
}

/// Unconstrained construction: the `k` most reliable u-indices.
///
/// The interleaver set is the info set at rate 1/2 and the top-N/2 channels
/// below rate 1/2. Above rate 1/2 there is none.
pub fn construct_awgn(n_log2: u32, k: usize, design_snr_db: f64) -> Result<PolarCodeSpec> {
    let n = check_sizes(n_log2, k)?;
    let ranking = ga_density_evolution(n_log2, design_snr_db)?.ranking();
    let info = ranking[..k].to_vec();
    let interleaver = (k <= n / 2).then(|| ranking[..n / 2].to_vec());
    PolarCodeSpec::new(n, info, interleaver, DesignMeta { design_snr_db, diversity: false })
}

/// Diversity construction: greedily admit u-indices in decreasing reliability,
/// skipping any index whose mirror `n + 1 - i` was already admitted, until
/// N/2 are held. The information set is the `k` most reliable of those.
pub fn construct_diversity(n_log2: u32, k: usize, design_snr_db: f64) -> Result<PolarCodeSpec> {
    let n = check_sizes(n_log2, k)?;
    if k > n / 2 {
        return Err(Error::RateAboveHalf { k, half: n / 2 });
    }
    let ranking = ga_density_evolution(n_log2, design_snr_db)?.ranking();
    let mut admitted = vec![false; n + 1];
    // kept in reliability order
    let mut half_set = Vec::with_capacity(n / 2);
    for &i in &ranking {
        if half_set.len() == n / 2 {
            break;
        }
        if !admitted[n + 1 - i] {
            admitted[i] = true;
            half_set.push(i);
        }
    }
    let info = half_set[..k].to_vec();
    PolarCodeSpec::new(n, info, Some(half_set), DesignMeta { design_snr_db, diversity: true })
}
