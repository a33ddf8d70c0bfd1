//! Two-block interleavers: which fading block carries each code bit.
//!
//! Positions are codeword positions (see [`crate::polar`] for the codeword
//! order). Within a block, bits keep their codeword order.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::{reverse_bits, PolarCodeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterleaverKind {
    Horizontal,
    Uniform,
    Random,
    Diversity,
}

impl InterleaverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Horizontal => "horizontal",
            Self::Uniform => "uniform",
            Self::Random => "random",
            Self::Diversity => "diversity",
        }
    }
}

impl fmt::Display for InterleaverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterleaverKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "horizontal" => Ok(Self::Horizontal),
            "uniform" => Ok(Self::Uniform),
            "random" => Ok(Self::Random),
            "diversity" => Ok(Self::Diversity),
            _ => Err(format!("unknown interleaver '{s}'")),
        }
    }
}

/// Balanced assignment of N code bits to blocks 1 and 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockAssignment {
    pub name: InterleaverKind,
    pub seed: Option<u64>,
    /// `block_of[j]` is 1 or 2 for codeword position `j + 1`.
    pub block_of: Vec<u8>,
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::InvalidSpec(format!("block length {n} must be even and positive")));
    }
    Ok(())
}

/// First half to block 1, second half to block 2.
pub fn horizontal(n: usize) -> Result<BlockAssignment> {
    check_even(n)?;
    let block_of = (0..n).map(|j| if j < n / 2 { 1 } else { 2 }).collect();
    Ok(BlockAssignment { name: InterleaverKind::Horizontal, seed: None, block_of })
}

/// Even 1-based positions to block 1, odd to block 2.
pub fn uniform(n: usize) -> Result<BlockAssignment> {
    check_even(n)?;
    let block_of = (1..=n).map(|j| if j % 2 == 0 { 1 } else { 2 }).collect();
    Ok(BlockAssignment { name: InterleaverKind::Uniform, seed: None, block_of })
}

/// Unbiased draw from `[0, bound)` by Lemire's multiply-and-reject method.
fn bounded(rng: &mut impl RngCore, bound: u64) -> u64 {
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(bound);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// Seeded balanced random partition.
///
/// Fisher-Yates shuffle of `[1; N/2] ++ [2; N/2]`, walking `i` from `N-1`
/// down to 1 and swapping with `j = bounded(i + 1)`. The generator is
/// xoshiro256** seeded from `seed` through SplitMix64.
pub fn random_ilv(n: usize, seed: u64) -> Result<BlockAssignment> {
    check_even(n)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut block_of: Vec<u8> = (0..n).map(|j| if j < n / 2 { 1 } else { 2 }).collect();
    for i in (1..n).rev() {
        let j = bounded(&mut rng, i as u64 + 1) as usize;
        block_of.swap(i, j);
    }
    Ok(BlockAssignment { name: InterleaverKind::Random, seed: Some(seed), block_of })
}

/// Codeword positions `1 + rev(a - 1)` for each `a` in the spec's interleaver
/// set go to block 1, the rest to block 2.
pub fn diversity_ilv(spec: &PolarCodeSpec) -> Result<BlockAssignment> {
    let n = spec.n();
    let set = spec
        .interleaver_set()
        .ok_or(Error::InterleaverSetSize { expected: n / 2, got: 0 })?;
    if set.len() != n / 2 {
        return Err(Error::InterleaverSetSize { expected: n / 2, got: set.len() });
    }
    let mut block_of = vec![2u8; n];
    for &a in set {
        block_of[reverse_bits(a - 1, spec.n_log2())] = 1;
    }
    Ok(BlockAssignment { name: InterleaverKind::Diversity, seed: None, block_of })
}

/// Builds any interleaver kind for `spec`; `seed` is only used by `Random`.
pub fn build(kind: InterleaverKind, spec: &PolarCodeSpec, seed: u64) -> Result<BlockAssignment> {
    match kind {
        InterleaverKind::Horizontal => horizontal(spec.n()),
        InterleaverKind::Uniform => uniform(spec.n()),
        InterleaverKind::Random => random_ilv(spec.n(), seed),
        InterleaverKind::Diversity => diversity_ilv(spec),
    }
}

impl BlockAssignment {
    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    /// 1-based codeword positions carried by `block` (1 or 2), ascending.
    pub fn positions(&self, block: u8) -> Vec<usize> {
        self.block_of
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == block)
            .map(|(j, _)| j + 1)
            .collect()
    }

    pub fn is_balanced(&self) -> bool {
        let ones = self.block_of.iter().filter(|&&b| b == 1).count();
        let twos = self.block_of.iter().filter(|&&b| b == 2).count();
        ones == twos && ones + twos == self.len()
    }

    /// Splits `data` into the two per-block sequences.
    pub fn apply<T: Copy>(&self, data: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if data.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: data.len() });
        }
        let mut b1 = Vec::with_capacity(self.len() / 2);
        let mut b2 = Vec::with_capacity(self.len() / 2);
        for (&v, &b) in data.iter().zip(&self.block_of) {
            if b == 1 {
                b1.push(v);
            } else {
                b2.push(v);
            }
        }
        Ok((b1, b2))
    }

    /// Scatters per-block sequences back to codeword order.
    pub fn invert<T: Copy + Default>(&self, block1: &[T], block2: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::default(); self.len()];
        self.invert_into(block1, block2, &mut out)?;
        Ok(out)
    }

    pub fn invert_into<T: Copy>(&self, block1: &[T], block2: &[T], out: &mut [T]) -> Result<()> {
        let half = self.len() / 2;
        for got in [block1.len(), block2.len()] {
            if got != half {
                return Err(Error::LengthMismatch { expected: half, got });
            }
        }
        if out.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: out.len() });
        }
        let (mut i1, mut i2) = (block1.iter(), block2.iter());
        for (o, &b) in out.iter_mut().zip(&self.block_of) {
            // lengths checked above
            *o = if b == 1 { *i1.next().unwrap() } else { *i2.next().unwrap() };
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
