use ssb_core::codes::{best_repetition_rate, message_error, repetition_bit_error, repetition_decode, repetition_encode};
use ssb_core::channel::capacity;
use ssb_core::RngStream;

/// Binomial upper tail by direct pmf summation with exact binomials in
/// floating point.
fn tail_oracle(r: u64, p: f64) -> f64 {
    let t = (r + 1) / 2;
    let mut total = 0.0;
    for k in t..=r {
        // ln C(r, k) accumulated term by term.
        let ln_c: f64 = (0..k).map(|i| ((r - i) as f64).ln() - ((i + 1) as f64).ln()).sum();
        total += (ln_c + k as f64 * p.ln() + (r - k) as f64 * (1.0 - p).ln()).exp();
    }
    total
}

fn scan_oracle(p: f64, m: u64, target: f64) -> u64 {
    let mut r = 1;
    loop {
        let pe = 1.0 - (1.0 - tail_oracle(r, p)).powf(m as f64);
        if pe <= target {
            return r;
        }
        r += 2;
    }
}

#[test]
fn bit_error_matches_oracle() {
    for r in [1, 3, 5, 9, 21, 101, 301] {
        for p in [0.01, 0.05, 0.11, 0.25, 0.4, 0.49] {
            let got = repetition_bit_error(r, p).unwrap();
            let want = tail_oracle(r, p);
            assert!((got - want).abs() <= 1e-12 * want.max(1e-300) + 1e-300, "r={r} p={p}: {got} vs {want}");
        }
    }
}

#[test]
fn best_rate_matches_scan() {
    for p in [0.05, 0.11, 0.25] {
        for m in [32, 256] {
            let report = best_repetition_rate(p, m, 1e-6).unwrap();
            let r = report.repetitions.unwrap();
            assert_eq!(r, scan_oracle(p, m, 1e-6), "p={p} m={m}");
            assert!(report.achieved_pe <= 1e-6);
            if r > 1 {
                let worse = message_error(repetition_bit_error(r - 2, p).unwrap(), m);
                assert!(worse > 1e-6);
            }
            assert!(report.rate < capacity(p).unwrap());
        }
    }
}

#[test]
fn bit_error_monotone() {
    let ps: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
    for r in (1..=101).step_by(2) {
        let mut prev = 0.0;
        for &p in &ps {
            let v = repetition_bit_error(r, p).unwrap();
            assert!(v >= prev - 1e-15, "r={r} p={p}");
            prev = v;
        }
    }
    for &p in &ps {
        let mut prev = 1.0;
        for r in (1..=101).step_by(2) {
            let v = repetition_bit_error(r, p).unwrap();
            assert!(v <= prev + 1e-15, "r={r} p={p}");
            prev = v;
        }
    }
}

#[test]
fn majority_vote_simulation() {
    let blocks = 100_000;
    let mut rng = RngStream::new(17, 0);
    for r in [3usize, 5, 9] {
        for p in [0.05, 0.15, 0.3] {
            let message: Vec<u8> = (0..blocks).map(|_| rng.bit()).collect();
            let mut sent = repetition_encode(&message, r).unwrap();
            for b in sent.iter_mut() {
                if rng.uniform_open() < p {
                    *b ^= 1;
                }
            }
            let got = repetition_decode(&sent, r).unwrap();
            let errors = got.iter().zip(&message).filter(|(a, b)| a != b).count();
            let rate = errors as f64 / blocks as f64;
            let want = repetition_bit_error(r as u64, p).unwrap();
            let se = (want * (1.0 - want) / blocks as f64).sqrt();
            assert!((rate - want).abs() <= 4.0 * se, "r={r} p={p}: {rate} vs {want}");
        }
    }
}

#[test]
fn few_flips_are_corrected() {
    let mut rng = RngStream::new(18, 0);
    for r in [3usize, 5, 7, 9] {
        let message: Vec<u8> = (0..64).map(|_| rng.bit()).collect();
        let mut sent = repetition_encode(&message, r).unwrap();
        for block in sent.chunks_mut(r) {
            let flips = rng.below(r.div_ceil(2) as u64) as usize;
            for b in block.iter_mut().take(flips) {
                *b ^= 1;
            }
        }
        assert_eq!(repetition_decode(&sent, r).unwrap(), message);
    }
}
