//! Polar transform, bit reversal, successive cancellation decoding and the
//! erasure-propagation self-decodability check.
//!
//! # Conventions
//!
//! Codewords use Arikan's generator `G_N = B_N · F^{⊗n}` with
//! `F = [[1, 0], [1, 1]]`: codeword position `j` (0-based) carries bit
//! `rev(j)` of the natural-order transform `u · F^{⊗n}`. The interleavers in
//! [`crate::mapping`] address codeword positions in this order, so the
//! diversity interleaver's first block `B(A)` carries the natural-order code
//! bits `x_A` that make Arikan's systematic-encoding argument go through.
//!
//! Message indices in [`PolarCodeSpec`] are 1-based; every other array in
//! this module is 0-based. [`bit_reverse`] is 0-based.
//!
//! LLRs are `f64` with `+∞`/`-∞` allowed. Positive means bit 0 is more likely,
//! ties decide to 0, and `∞ + (-∞)` evaluates to `0` (an erasure).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reverses the low `n_log2` bits of `index`.
pub fn bit_reverse(index: usize, n_log2: u32) -> Result<usize> {
    if n_log2 as usize >= usize::BITS as usize || index >> n_log2 != 0 {
        return Err(Error::IndexOutOfRange { index, n_log2 });
    }
    Ok(reverse_bits(index, n_log2))
}

#[inline]
pub(crate) fn reverse_bits(index: usize, n_log2: u32) -> usize {
    if n_log2 == 0 {
        0
    } else {
        index.reverse_bits() >> (usize::BITS - n_log2)
    }
}

/// Permutes `data` in place so that element `j` moves to `rev(j)`.
pub fn bit_reverse_permute<T>(data: &mut [T]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let n_log2 = n.trailing_zeros();
    for i in 0..n {
        let j = reverse_bits(i, n_log2);
        if i < j {
            data.swap(i, j);
        }
    }
}

/// In-place natural-order butterfly computing `bits · F^{⊗n}` over GF(2).
///
/// The transform is its own inverse.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Metadata recorded by the code constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignMeta {
    pub design_snr_db: f64,
    pub diversity: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpecJson {
    n: usize,
    info_set: Vec<usize>,
    design_snr_db: f64,
    diversity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    interleaver_set: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    frozen_ones: Vec<usize>,
}

/// A polar code: block length, information set and (optionally) the size-N/2
/// set that defines its diversity interleaver.
///
/// Invariants are checked on construction and on deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct PolarCodeSpec {
    n_log2: u32,
    info_set: Vec<usize>,
    interleaver_set: Option<Vec<usize>>,
    frozen_ones: Vec<usize>,
    meta: DesignMeta,
    // 0-based per-u-index layout: None for information bits, Some(v) for a
    // frozen bit with value v.
    layout: Vec<Option<u8>>,
}

impl PolarCodeSpec {
    /// Builds a spec with all frozen bits equal to zero.
    pub fn new(
        n: usize,
        info_set: Vec<usize>,
        interleaver_set: Option<Vec<usize>>,
        meta: DesignMeta,
    ) -> Result<Self> {
        Self::with_frozen_ones(n, info_set, interleaver_set, Vec::new(), meta)
    }

    /// Builds a spec whose frozen positions listed in `frozen_ones` (1-based)
    /// carry the value 1 instead of 0.
    pub fn with_frozen_ones(
        n: usize,
        info_set: Vec<usize>,
        interleaver_set: Option<Vec<usize>>,
        frozen_ones: Vec<usize>,
        meta: DesignMeta,
    ) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidSpec(format!("n = {n} is not a power of two >= 2")));
        }
        let info_set = sorted_unique_in_range(info_set, n, "info_set")?;
        let frozen_ones = sorted_unique_in_range(frozen_ones, n, "frozen_ones")?;
        let interleaver_set = interleaver_set
            .map(|s| sorted_unique_in_range(s, n, "interleaver_set"))
            .transpose()?;
        if let Some(s) = &interleaver_set {
            if s.len() != n / 2 {
                return Err(Error::InterleaverSetSize { expected: n / 2, got: s.len() });
            }
        }
        if !meta.design_snr_db.is_finite() {
            return Err(Error::InvalidSpec("design_snr_db must be finite".into()));
        }

        let mut layout = vec![Some(0u8); n];
        for &a in &info_set {
            layout[a - 1] = None;
        }
        for &f in &frozen_ones {
            match &mut layout[f - 1] {
                Some(v) => *v = 1,
                None => {
                    return Err(Error::InvalidSpec(format!(
                        "frozen_ones contains information index {f}"
                    )))
                }
            }
        }

        let spec = Self {
            n_log2: n.trailing_zeros(),
            info_set,
            interleaver_set,
            frozen_ones,
            meta,
            layout,
        };
        if meta.diversity && spec.k() == n / 2 && !satisfies_mirror_constraint(n, &spec.info_set) {
            return Err(Error::InvalidSpec(
                "diversity code with k = n/2 must hold exactly one of i, n+1-i".into(),
            ));
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        1 << self.n_log2
    }

    pub fn n_log2(&self) -> u32 {
        self.n_log2
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Information indices, 1-based and ascending.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    /// Frozen indices (the complement of the info set), 1-based and ascending.
    pub fn frozen_set(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.layout[i - 1].is_some()).collect()
    }

    /// The size-N/2 set defining the diversity interleaver, if any.
    pub fn interleaver_set(&self) -> Option<&[usize]> {
        self.interleaver_set.as_deref()
    }

    pub fn meta(&self) -> DesignMeta {
        self.meta
    }

    pub fn is_info(&self, index_1based: usize) -> bool {
        self.layout[index_1based - 1].is_none()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl TryFrom<SpecJson> for PolarCodeSpec {
    type Error = Error;

    fn try_from(raw: SpecJson) -> Result<Self> {
        Self::with_frozen_ones(
            raw.n,
            raw.info_set,
            raw.interleaver_set,
            raw.frozen_ones,
            DesignMeta { design_snr_db: raw.design_snr_db, diversity: raw.diversity },
        )
    }
}

impl From<PolarCodeSpec> for SpecJson {
    fn from(spec: PolarCodeSpec) -> Self {
        SpecJson {
            n: spec.n(),
            info_set: spec.info_set,
            design_snr_db: spec.meta.design_snr_db,
            diversity: spec.meta.diversity,
            interleaver_set: spec.interleaver_set,
            frozen_ones: spec.frozen_ones,
        }
    }
}

fn sorted_unique_in_range(mut v: Vec<usize>, n: usize, what: &str) -> Result<Vec<usize>> {
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidSpec(format!("{what} has duplicate entries")));
    }
    if v.iter().any(|&i| i == 0 || i > n) {
        return Err(Error::InvalidSpec(format!("{what} entries must lie in [1, {n}]")));
    }
    Ok(v)
}

/// True iff exactly one of `i` and `n + 1 - i` belongs to `set` for every `i`.
pub fn satisfies_mirror_constraint(n: usize, set: &[usize]) -> bool {
    let members: BTreeSet<usize> = set.iter().copied().collect();
    (1..=n).all(|i| members.contains(&i) != members.contains(&(n + 1 - i)))
}

/// Encodes `message` (one bit per information index, in info-set order).
pub fn polar_encode(spec: &PolarCodeSpec, message: &[u8]) -> Result<Vec<u8>> {
    if message.len() != spec.k() {
        return Err(Error::LengthMismatch { expected: spec.k(), got: message.len() });
    }
    let mut u: Vec<u8> = spec.layout.iter().map(|v| v.unwrap_or(0)).collect();
    for (&a, &m) in spec.info_set.iter().zip(message) {
        u[a - 1] = m & 1;
    }
    // B_N · F^{⊗n} = F^{⊗n} · B_N
    bit_reverse_permute(&mut u);
    polar_transform(&mut u);
    Ok(u)
}

#[inline]
fn check_node(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -m
    } else {
        m
    }
}

#[inline]
fn bit_node(a: f64, b: f64, u: u8) -> f64 {
    let s = if u == 0 { b + a } else { b - a };
    if s.is_nan() {
        0.0
    } else {
        s
    }
}

/// One SC pass over a natural-order LLR vector. `decide` receives the 0-based
/// u-index and its decision LLR and returns the bit to feed back.
fn sc_node<D>(llr: &[f64], scratch: &mut [f64], u: &mut [u8], x: &mut [u8], offset: usize, decide: &mut D)
where
    D: FnMut(usize, f64) -> u8,
{
    let n = llr.len();
    if n == 1 {
        let b = decide(offset, llr[0]);
        u[0] = b;
        x[0] = b;
        return;
    }
    let half = n / 2;
    let (child, rest) = scratch.split_at_mut(half);
    let (u_lo, u_hi) = u.split_at_mut(half);
    let (x_lo, x_hi) = x.split_at_mut(half);

    for i in 0..half {
        child[i] = check_node(llr[i], llr[i + half]);
    }
    sc_node(child, rest, u_lo, x_lo, offset, decide);

    for i in 0..half {
        child[i] = bit_node(llr[i], llr[i + half], x_lo[i]);
    }
    sc_node(child, rest, u_hi, x_hi, offset + half, decide);

    for (a, b) in x_lo.iter_mut().zip(x_hi.iter()) {
        *a ^= *b;
    }
}

/// Successive cancellation decoder with reusable scratch buffers.
///
/// One instance per worker thread.
#[derive(Debug, Clone)]
pub struct ScDecoder<'a> {
    spec: &'a PolarCodeSpec,
    natural: Vec<f64>,
    scratch: Vec<f64>,
    u: Vec<u8>,
    x: Vec<u8>,
}

impl<'a> ScDecoder<'a> {
    pub fn new(spec: &'a PolarCodeSpec) -> Self {
        let n = spec.n();
        Self {
            spec,
            natural: vec![0.0; n],
            scratch: vec![0.0; n],
            u: vec![0; n],
            x: vec![0; n],
        }
    }

    /// Runs SC with a caller-supplied decision rule and returns the decided
    /// u-vector (0-based, natural order).
    fn run<D>(&mut self, channel_llrs: &[f64], mut decide: D) -> &[u8]
    where
        D: FnMut(usize, f64) -> u8,
    {
        let n = self.spec.n();
        debug_assert_eq!(channel_llrs.len(), n);
        let n_log2 = self.spec.n_log2();
        for (j, &l) in channel_llrs.iter().enumerate() {
            self.natural[reverse_bits(j, n_log2)] = l;
        }
        sc_node(&self.natural, &mut self.scratch, &mut self.u, &mut self.x, 0, &mut decide);
        &self.u
    }

    /// Decodes codeword-order LLRs and returns the information bits in
    /// info-set order.
    pub fn decode(&mut self, channel_llrs: &[f64]) -> Result<Vec<u8>> {
        let n = self.spec.n();
        if channel_llrs.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: channel_llrs.len() });
        }
        let spec = self.spec;
        let layout = &spec.layout;
        let u = self.run(channel_llrs, |i, l| match layout[i] {
            Some(v) => v,
            None => u8::from(l < 0.0),
        });
        Ok(spec.info_set.iter().map(|&a| u[a - 1]).collect())
    }
}

/// Convenience wrapper around [`ScDecoder::decode`].
pub fn sc_decode(spec: &PolarCodeSpec, channel_llrs: &[f64]) -> Result<Vec<u8>> {
    ScDecoder::new(spec).decode(channel_llrs)
}

/// Outcome of [`erasure_sc_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ErasureReport {
    pub self_decodable: bool,
    /// First information index (1-based) whose decision value was an erasure.
    pub first_stuck_info_index: Option<usize>,
}

/// Decides whether SC recovers every information bit when only the codeword
/// positions in `known_codebits` (1-based) are received and all others are
/// erased.
///
/// Runs on the all-zero codeword with `+∞` at known positions and `0`
/// elsewhere; the outcome depends only on the erasure pattern.
pub fn erasure_sc_check<I>(spec: &PolarCodeSpec, known_codebits: I) -> ErasureReport
where
    I: IntoIterator<Item = usize>,
{
    let n = spec.n();
    let mut llrs = vec![0.0; n];
    for j in known_codebits {
        assert!((1..=n).contains(&j), "known code bit {j} outside [1, {n}]");
        llrs[j - 1] = f64::INFINITY;
    }
    let layout = &spec.layout;
    let mut first_stuck = None;
    ScDecoder::new(spec).run(&llrs, |i, l| {
        if layout[i].is_none() && l != f64::INFINITY && first_stuck.is_none() {
            first_stuck = Some(i + 1);
        }
        0
    });
    ErasureReport { self_decodable: first_stuck.is_none(), first_stuck_info_index: first_stuck }
}
