//! Calibrated default design SNRs (Es/N0, dB) for rate-1/2 codes.
//!
//! Each value is the SNR at which the AWGN-designed code, constructed at that
//! same SNR, shows a block error rate of about 1e-2 on the AWGN channel under
//! SC decoding. Regenerate with `cargo run --release --example calibrate`.

/// `(n_log2, design_snr_db)`.
pub const DESIGN_SNR_DB: &[(u32, f64)] = &[
    (3, 0.95),
    (4, 1.45),
    (5, 1.00),
    (6, 0.60),
    (7, 0.35),
    (8, 0.05),
    (9, -0.20),
    (10, -0.45),
];

/// Calibrated design SNR for block length `2^n_log2`, clamped to the table's
/// range.
pub fn design_snr_db(n_log2: u32) -> f64 {
    let (lo, hi) = (DESIGN_SNR_DB[0], DESIGN_SNR_DB[DESIGN_SNR_DB.len() - 1]);
    let key = n_log2.clamp(lo.0, hi.0);
    DESIGN_SNR_DB
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, s)| *s)
        .expect("table covers its own range")
}
