//! Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. `ACCEPTANCE_LONG=1` adds the N = 1024
//! gap-to-outage run.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use polar_diversity::channel::{bpsk_capacity, ChannelModel};
use polar_diversity::cli::check_blocks;
use polar_diversity::harness::{estimate_snr_at_bler, outage_rows, run_sweep, CodeType, ExperimentConfig, SweepResult};
use polar_diversity::mapping::{diversity_ilv, InterleaverKind};
use polar_diversity::polar::{erasure_sc_check, polar_encode, DesignMeta, PolarCodeSpec};
use polar_diversity::calibration;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{generator, matmul, trapezoid_capacity, uniquely_solvable};

const BIN: &str = env!("CARGO_BIN_EXE_polardiv");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    polar_diversity::cli::snr_grid(start, stop, step).unwrap()
}

fn meta() -> DesignMeta {
    DesignMeta { design_snr_db: 0.0, diversity: false }
}

fn c1_encoder_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for n in [2usize, 4, 8, 16, 32] {
        let g = generator(n);
        let spec = PolarCodeSpec::new(n, (1..=n).collect(), None, meta()).unwrap();
        let messages: Vec<Vec<u8>> = if n <= 16 {
            (0..1u64 << n).map(|m| (0..n).map(|b| ((m >> b) & 1) as u8).collect()).collect()
        } else {
            (0..100).map(|_| (0..n).map(|_| rng.random_range(0..2)).collect()).collect()
        };
        for msg in messages {
            if polar_encode(&spec, &msg).unwrap() != matmul(&msg, &g) {
                return outcome(false, format!("mismatch at n={n} msg={msg:?}"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} messages match"))
}

fn c2_erasure_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut passes, mut violations) = (0, 0);
    for n in [4usize, 8, 16] {
        for _ in 0..200 {
            let mut idx: Vec<usize> = (1..=n).collect();
            idx.shuffle(&mut rng);
            let info = idx[..rng.random_range(1..=n)].to_vec();
            idx.shuffle(&mut rng);
            let known = idx[..rng.random_range(0..=n)].to_vec();
            let spec = PolarCodeSpec::new(n, info.clone(), None, meta()).unwrap();
            if erasure_sc_check(&spec, known.iter().copied()).self_decodable {
                passes += 1;
                if !uniquely_solvable(n, &info, &known) {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("600 pairs, {passes} check passes, {violations} violations"))
}

fn c3_self_decodability(dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for n_log2 in 3..=10u32 {
        let n = 1usize << n_log2;
        let path = dir.join(format!("div{n}.json"));
        let st = Command::new(BIN)
            .args(["construct", "--n", &n.to_string(), "--k", &(n / 2).to_string(), "--diversity", "--out"])
            .arg(&path)
            .output()
            .unwrap();
        assert!(st.status.success(), "construct failed: {}", String::from_utf8_lossy(&st.stderr));
        let out = Command::new(BIN).arg("check").arg("--spec").arg(&path).output().unwrap();
        let text = String::from_utf8_lossy(&out.stdout);
        let both = text.contains("block 1: PASS") && text.contains("block 2: PASS");
        let verdict_ok = both && out.status.code() == Some(0);
        if n <= 16 {
            // the tool's verdict must agree with brute force
            let spec = PolarCodeSpec::load(&path).unwrap();
            let ilv = diversity_ilv(&spec).unwrap();
            let oracle = [1u8, 2].iter().all(|&b| uniquely_solvable(n, spec.info_set(), &ilv.positions(b)));
            let tool = check_blocks(&spec).unwrap().iter().all(|r| r.self_decodable);
            if tool && !oracle {
                pass = false;
                notes.push(format!("N={n} tool PASS but oracle unsolvable"));
            }
        }
        if !verdict_ok {
            pass = false;
            notes.push(format!("N={n}: {}", text.trim().replace('\n', "; ")));
        }
    }
    let detail = if notes.is_empty() { "both blocks PASS for N = 8..1024".to_string() } else { notes.join(" | ") };
    outcome(pass, detail)
}

fn c4_calibration() -> Outcome {
    let snr = calibration::design_snr_db(8);
    let cfg = ExperimentConfig::half_rate(CodeType::Awgn, 8, InterleaverKind::Uniform, ChannelModel::Awgn, vec![snr]);
    let p = run_sweep(&cfg, workers()).unwrap().points[0];
    let pass = p.block_errors >= 30 && (0.003..=0.03).contains(&p.bler);
    outcome(pass, format!("{snr} dB: bler {:.3e} ({} errors / {} trials)", p.bler, p.block_errors, p.trials))
}

fn awgn_sweep(code: CodeType, interleaver: InterleaverKind) -> SweepResult {
    let cfg = ExperimentConfig::half_rate(code, 8, interleaver, ChannelModel::Awgn, grid(-1.0, 1.5, 0.25));
    run_sweep(&cfg, workers()).unwrap()
}

fn c5_awgn_closeness(awgn_code: &SweepResult, div_code: &SweepResult) -> Outcome {
    let a = estimate_snr_at_bler(&awgn_code.curve(), 1e-2);
    let d = estimate_snr_at_bler(&div_code.curve(), 1e-2);
    match (a, d) {
        (Some(a), Some(d)) => outcome(
            (d - a).abs() <= 0.75,
            format!("AWGN code {a:.3} dB, diversity code {d:.3} dB, gap {:.3} dB", d - a),
        ),
        _ => outcome(false, format!("curve does not cross 1e-2 (awgn {a:?}, diversity {d:?})")),
    }
}

fn c8_invariance(uniform: &SweepResult, diversity: &SweepResult) -> Outcome {
    let mut worst: f64 = 0.0;
    for (u, d) in uniform.points.iter().zip(&diversity.points) {
        let se = (u.std_error().powi(2) + d.std_error().powi(2)).sqrt();
        let diff = (u.bler - d.bler).abs();
        let z = if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
        worst = worst.max(z);
    }
    outcome(worst <= 3.0, format!("{} points, max |Δ|/SE = {worst:.2}", uniform.points.len()))
}

fn rayleigh_sweep(n_log2: u32, code: CodeType, interleaver: InterleaverKind, errors: u64, snr: Vec<f64>) -> SweepResult {
    let mut cfg = ExperimentConfig::half_rate(code, n_log2, interleaver, ChannelModel::BlockRayleigh, snr);
    cfg.target_block_errors = errors;
    run_sweep(&cfg, workers()).unwrap()
}

fn crossing(r: &SweepResult, se_sign: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = r.points.iter().map(|p| (p.snr_db, (p.bler + se_sign * p.std_error()).max(0.0))).collect();
    estimate_snr_at_bler(&pts, 0.1)
}

fn c6_ordering(curves: &[(&str, SweepResult)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, r) in curves {
        parts.push(format!("{name} {}", crossing(r, 0.0).map_or("n/a".into(), |s| format!("{s:.2}"))));
    }
    for w in curves.windows(2) {
        let (better, worse) = (&w[0], &w[1]);
        match (crossing(&better.1, 1.0), crossing(&worse.1, -1.0)) {
            (Some(hi), Some(lo)) if hi <= lo => {}
            (hi, lo) => {
                pass = false;
                parts.push(format!("{} vs {}: {hi:?} > {lo:?}", better.0, worse.0));
            }
        }
    }
    outcome(pass, format!("SNR@0.1: {}", parts.join(", ")))
}

fn c7_gap(n_log2: u32, div: &SweepResult) -> Outcome {
    let rows = outage_rows(ChannelModel::BlockRayleigh, &grid(0.0, 20.0, 0.25), 0.5, 1_000_000, 0).unwrap();
    let out: Vec<(f64, f64)> = rows.iter().map(|r| (r.snr_db, r.bler)).collect();
    match (estimate_snr_at_bler(&div.curve(), 0.1), estimate_snr_at_bler(&out, 0.1)) {
        (Some(d), Some(o)) => outcome(
            (d - o).abs() <= 3.0,
            format!("N={}: code {d:.2} dB, outage {o:.2} dB, gap {:.2} dB", 1 << n_log2, d - o),
        ),
        (d, o) => outcome(false, format!("no crossing (code {d:?}, outage {o:?})")),
    }
}

fn c9_determinism(dir: &Path) -> Outcome {
    let spec = dir.join("det_spec.json");
    let st = Command::new(BIN).args(["construct", "--n", "64", "--k", "32", "--out"]).arg(&spec).output().unwrap();
    assert!(st.status.success());
    let mut outputs = Vec::new();
    for (w, rep) in [(1, 0), (1, 1), (8, 0), (8, 1)] {
        let out = dir.join(format!("det_w{w}_{rep}.csv"));
        let st = Command::new(BIN)
            .args(["simulate", "--spec"])
            .arg(&spec)
            .args(["--interleaver", "random", "--seed", "9", "--channel", "block_rayleigh"])
            .args(["--snr-start", "0", "--snr-stop", "8", "--snr-step", "2"])
            .args(["--master-seed", "17", "--target-errors", "40", "--max-trials", "3000"])
            .args(["--workers", &w.to_string(), "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(same, format!("4 runs (1 and 8 workers, repeated), {} bytes each", outputs[0].len()))
}

fn c10_capacity() -> Outcome {
    let mut worst: f64 = 0.0;
    for snr in [0.1, 1.0, 10.0] {
        worst = worst.max((bpsk_capacity(snr) - trapezoid_capacity(snr)).abs());
    }
    let zero = bpsk_capacity(0.0);
    let grid: Vec<f64> = (0..1000).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 999.0)).collect();
    let caps: Vec<f64> = grid.iter().map(|&s| bpsk_capacity(s)).collect();
    let monotone = caps.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        worst <= 1e-4 && zero == 0.0 && monotone,
        format!("max |Δ| {worst:.2e}, C(0) = {zero}, monotone on 1000 points: {monotone}"),
    )
}

fn main() {
    // `cargo test` passes filter and harness flags; a filter that names
    // nothing here skips the suite
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filters.is_empty() && !filters.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let long = std::env::var("ACCEPTANCE_LONG").is_ok_and(|v| v == "1");
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let secs = t.elapsed().as_secs_f64();
        println!("criterion {id:>2} {:<4} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o, secs));
    };

    timed(1, "encoder vs Kronecker oracle", &mut c1_encoder_oracle);
    timed(2, "erasure check vs GF(2) oracle", &mut c2_erasure_oracle);
    timed(3, "self-decodability of diversity codes", &mut || c3_self_decodability(dir.path()));
    timed(4, "calibrated design SNR, N=256", &mut c4_calibration);

    // sweep time is charged to the first criterion that uses the sweep
    let mut awgn_uniform = None;
    timed(5, "diversity code close to AWGN code on AWGN", &mut || {
        let a = awgn_uniform.insert(awgn_sweep(CodeType::Awgn, InterleaverKind::Uniform));
        c5_awgn_closeness(a, &awgn_sweep(CodeType::Diversity, InterleaverKind::Uniform))
    });

    // 3000 errors: the div+div vs awgn+div gap at 0.1 is about 8% in BLER
    let (snr, errors) = (grid(2.0, 10.0, 1.0), 3000);
    let mut curves = Vec::new();
    timed(6, "block Rayleigh ordering at BLER 0.1", &mut || {
        curves = vec![
            ("div+div", rayleigh_sweep(8, CodeType::Diversity, InterleaverKind::Diversity, errors, snr.clone())),
            ("awgn+div", rayleigh_sweep(8, CodeType::Awgn, InterleaverKind::Diversity, errors, snr.clone())),
            ("awgn+random", rayleigh_sweep(8, CodeType::Awgn, InterleaverKind::Random, errors, snr.clone())),
            ("awgn+uniform", rayleigh_sweep(8, CodeType::Awgn, InterleaverKind::Uniform, errors, snr.clone())),
        ];
        c6_ordering(&curves)
    });
    timed(7, "gap to outage at BLER 0.1", &mut || c7_gap(8, &curves[0].1));
    if long {
        let div1024 = rayleigh_sweep(10, CodeType::Diversity, InterleaverKind::Diversity, errors, snr.clone());
        timed(7, "gap to outage at BLER 0.1 (long)", &mut || c7_gap(10, &div1024));
    }
    timed(8, "AWGN interleaver invariance", &mut || {
        let uniform = awgn_uniform.as_ref().expect("swept for criterion 5");
        c8_invariance(uniform, &awgn_sweep(CodeType::Awgn, InterleaverKind::Diversity))
    });
    timed(9, "CLI determinism across workers", &mut || c9_determinism(dir.path()));
    timed(10, "BPSK capacity vs oracle", &mut c10_capacity);

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
