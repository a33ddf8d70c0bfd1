//! Independent oracles shared by the integration tests. None of these call
//! into the library's encoder, decoder or quadrature.
#![allow(dead_code)]

/// Bit reversal by string manipulation.
pub fn rev_str(i: usize, bits: usize) -> usize {
    if bits == 0 {
        return 0;
    }
    let s: String = format!("{i:0bits$b}").chars().rev().collect();
    usize::from_str_radix(&s, 2).unwrap()
}

/// `G = B_N · F^{⊗n}`: an explicit Kronecker power of `F = [[1, 0], [1, 1]]`
/// with rows permuted by bit reversal.
pub fn generator(n: usize) -> Vec<Vec<u8>> {
    let mut g = vec![vec![1u8]];
    while g.len() < n {
        let m = g.len();
        let mut next = vec![vec![0u8; 2 * m]; 2 * m];
        for (bi, row) in [[1u8, 0], [1, 1]].iter().enumerate() {
            for (bj, &f) in row.iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        next[bi * m + i][bj * m + j] = f & g[i][j];
                    }
                }
            }
        }
        g = next;
    }
    let bits = n.trailing_zeros() as usize;
    (0..n).map(|i| g[rev_str(i, bits)].clone()).collect()
}

pub fn matmul(u: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
    let n = g.len();
    (0..n).map(|j| (0..n).fold(0u8, |acc, i| acc ^ (u[i] & g[i][j]))).collect()
}

/// Rank over GF(2) of rows given as bitmasks.
pub fn gf2_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// Whether known code bits at `known` (1-based) plus the frozen bits
/// determine `u_A` uniquely: `G[A, known]` must have full row rank.
pub fn uniquely_solvable(n: usize, info: &[usize], known: &[usize]) -> bool {
    assert!(known.len() <= 64);
    let g = generator(n);
    let rows: Vec<u64> = info
        .iter()
        .map(|&a| known.iter().enumerate().fold(0u64, |m, (c, &j)| m | (u64::from(g[a - 1][j - 1]) << c)))
        .collect();
    gf2_rank(rows) == info.len()
}

/// BPSK capacity at linear Es/N0 by a fine trapezoid rule over the
/// conditional LLR density `N(4·snr, 8·snr)`.
pub fn trapezoid_capacity(snr: f64) -> f64 {
    if snr <= 0.0 {
        return 0.0;
    }
    let mean = 4.0 * snr;
    let var = 8.0 * snr;
    let sd = var.sqrt();
    let (lo, hi) = (mean - 14.0 * sd, mean + 14.0 * sd);
    let steps = 400_000;
    let h = (hi - lo) / steps as f64;
    let integrand = |l: f64| {
        let pdf = (-(l - mean).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        let loss = if l > -30.0 { (-l).exp().ln_1p() } else { -l + l.exp().ln_1p() };
        pdf * loss / std::f64::consts::LN_2
    };
    let mut acc = 0.5 * (integrand(lo) + integrand(hi));
    for i in 1..steps {
        acc += integrand(lo + h * i as f64);
    }
    1.0 - acc * h
}

/// Bhattacharyya-parameter reliabilities (smaller is better), natural u-index
/// order: `z⁻ = 2z - z²`, `z⁺ = z²`, starting from `exp(-Es/N0)`.
pub fn bhattacharyya(n_log2: u32, snr_db: f64) -> Vec<f64> {
    let mut z = vec![(-(10f64.powf(snr_db / 10.0))).exp()];
    for _ in 0..n_log2 {
        z = z.iter().flat_map(|&v| [2.0 * v - v * v, v * v]).collect();
    }
    z
}

/// 1-based indices of the `k` smallest Bhattacharyya parameters.
pub fn bhattacharyya_top(n_log2: u32, snr_db: f64, k: usize) -> Vec<usize> {
    let z = bhattacharyya(n_log2, snr_db);
    let mut idx: Vec<usize> = (1..=z.len()).collect();
    idx.sort_by(|&a, &b| z[a - 1].partial_cmp(&z[b - 1]).unwrap().then(b.cmp(&a)));
    let mut top = idx[..k].to_vec();
    top.sort_unstable();
    top
}
