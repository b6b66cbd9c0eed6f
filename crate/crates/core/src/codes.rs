//! Redundancy mechanisms: an exact repetition-code analysis and the
//! Shannon-ideal rate, plus a keyed systematic linear code for attribution.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{exp, expm1, lgamma, log, log1p};

use crate::channel::capacity;
use crate::lattice::check_bits;
use crate::{Bits, Error, Result, RngStream};

/// Largest repetition factor [`best_repetition_rate`] will consider.
pub const MAX_REPETITIONS: u64 = 1_000_000;

/// Rate achieved by a redundancy mechanism at flip probability `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub scheme: String,
    pub rate: f64,
    pub p: f64,
    pub target_pe: f64,
    pub achieved_pe: f64,
    /// Repetition factor, for repetition codes.
    pub repetitions: Option<u64>,
}

/// Majority-vote repetition code with an odd factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepetitionCode {
    r: usize,
}

impl RepetitionCode {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 || r % 2 == 0 {
            return Err(Error::domain(alloc::format!("repetition factor must be odd, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn rate(&self) -> f64 {
        1.0 / self.r as f64
    }

    pub fn encode(&self, message: &[u8]) -> Result<Bits> {
        check_bits(message)?;
        Ok(message
            .iter()
            .flat_map(|&b| core::iter::repeat(b).take(self.r))
            .collect())
    }

    pub fn decode(&self, codeword: &[u8]) -> Result<Bits> {
        check_bits(codeword)?;
        if codeword.len() % self.r != 0 {
            return Err(Error::domain(alloc::format!(
                "codeword length {} is not a multiple of {}",
                codeword.len(),
                self.r
            )));
        }
        Ok(codeword
            .chunks(self.r)
            .map(|block| {
                let ones = block.iter().filter(|&&b| b == 1).count();
                (2 * ones > self.r) as u8
            })
            .collect())
    }
}

pub fn repetition_encode(message: &[u8], r: usize) -> Result<Bits> {
    RepetitionCode::new(r)?.encode(message)
}

pub fn repetition_decode(codeword: &[u8], r: usize) -> Result<Bits> {
    RepetitionCode::new(r)?.decode(codeword)
}

fn check_flip_probability(p: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::domain(alloc::format!("flip probability {p} outside [0, 0.5]")));
    }
    Ok(())
}

/// Probability that majority voting over `r` uses of a BSC with crossover
/// `p` returns the wrong bit: `P(Binomial(r, p) >= (r + 1) / 2)`.
pub fn repetition_bit_error(r: u64, p: f64) -> Result<f64> {
    if r == 0 || r % 2 == 0 {
        return Err(Error::domain(alloc::format!("repetition factor must be odd, got {r}")));
    }
    check_flip_probability(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 0.5 {
        return Ok(0.5);
    }
    if r == 1 {
        return Ok(p);
    }
    let t = (r + 1) / 2;
    let (rf, tf) = (r as f64, t as f64);
    let log_first = lgamma(rf + 1.0) - lgamma(tf + 1.0) - lgamma(rf - tf + 1.0)
        + tf * log(p)
        + (rf - tf) * log1p(-p);
    let odds = p / (1.0 - p);
    let mut term = exp(log_first);
    let mut sum = term;
    for i in t..r {
        // Terms past the mode only shrink, so the tail can be cut.
        term *= (r - i) as f64 / (i + 1) as f64 * odds;
        sum += term;
        if term <= sum * 1e-18 {
            break;
        }
    }
    Ok(sum.min(1.0))
}

/// Message error probability when each of `m` bits fails independently
/// with probability `bit_error`.
pub fn message_error(bit_error: f64, m: u64) -> f64 {
    -expm1(m as f64 * log1p(-bit_error))
}

/// Smallest odd `r` whose message error over `m` bits is at most
/// `pe_target`, reported as rate `1/r`.
pub fn best_repetition_rate(p: f64, m: u64, pe_target: f64) -> Result<RateReport> {
    if !(0.0..0.5).contains(&p) {
        return Err(Error::domain(alloc::format!("flip probability {p} outside [0, 0.5)")));
    }
    if m == 0 {
        return Err(Error::domain("message length must be positive"));
    }
    if !(pe_target > 0.0 && pe_target < 1.0) {
        return Err(Error::domain("target error probability must lie in (0, 1)"));
    }
    let pe = |r: u64| repetition_bit_error(r, p).map(|b| message_error(b, m));
    let cap = if MAX_REPETITIONS % 2 == 1 { MAX_REPETITIONS } else { MAX_REPETITIONS - 1 };

    // Exponential search over odd r = 2^j - 1, then bisection on odd values.
    let mut hi = 1u64;
    let mut lo = 0u64; // largest odd value known to fail, 0 if none
    loop {
        if pe(hi)? <= pe_target {
            break;
        }
        if hi >= cap {
            return Err(Error::Infeasible { cap: MAX_REPETITIONS });
        }
        lo = hi;
        hi = (2 * hi + 1).min(cap);
    }
    while lo != 0 && hi - lo > 2 {
        let mid = lo + (hi - lo) / 2;
        let mid = if mid % 2 == 0 { mid + 1 } else { mid };
        if pe(mid)? <= pe_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RateReport {
        scheme: String::from("repetition"),
        rate: 1.0 / hi as f64,
        p,
        target_pe: pe_target,
        achieved_pe: pe(hi)?,
        repetitions: Some(hi),
    })
}

/// Capacity-achieving rate; its error probability vanishes with the
/// block length and is reported as zero.
pub fn shannon_rate(p: f64) -> Result<RateReport> {
    Ok(RateReport {
        scheme: String::from("shannon"),
        rate: capacity(p)?,
        p,
        target_pe: 0.0,
        achieved_pe: 0.0,
        repetitions: None,
    })
}

/// Systematic binary linear code `[I | P]` with a random parity part drawn
/// from a keyed stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    message_len: usize,
    block_len: usize,
    /// Row-major `message_len x (block_len - message_len)`.
    parity: Vec<u8>,
}

impl LinearCode {
    pub fn random(message_len: usize, block_len: usize, rng: &mut RngStream) -> Result<Self> {
        if message_len == 0 || block_len < message_len {
            return Err(Error::domain(alloc::format!(
                "need 1 <= k <= n, got k = {message_len} and n = {block_len}"
            )));
        }
        let parity = (0..message_len * (block_len - message_len)).map(|_| rng.bit()).collect();
        Ok(Self {
            message_len,
            block_len,
            parity,
        })
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn rate(&self) -> f64 {
        self.message_len as f64 / self.block_len as f64
    }

    pub fn encode(&self, message: &[u8]) -> Result<Bits> {
        check_bits(message)?;
        if message.len() != self.message_len {
            return Err(Error::Dimension {
                expected: self.message_len,
                found: message.len(),
            });
        }
        let extra = self.block_len - self.message_len;
        let mut out = Vec::with_capacity(self.block_len);
        out.extend_from_slice(message);
        for j in 0..extra {
            let mut acc = 0u8;
            for (i, &m) in message.iter().enumerate() {
                acc ^= m & self.parity[i * extra + j];
            }
            out.push(acc);
        }
        Ok(out)
    }
}

pub fn hamming_distance(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// Index of the candidate closest to `received`; ties go to the lowest
/// index.
pub fn nearest_codeword(received: &[u8], candidates: &[Bits]) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .min_by_key(|(i, c)| (hamming_distance(received, c), *i))
        .map(|(i, _)| i)
}
