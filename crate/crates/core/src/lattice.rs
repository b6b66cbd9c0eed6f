//! Nested one-dimensional lattices: the alternating decision function, the
//! cell geometry, the watermark sampler and its closed-form moments.
//!
//! Coarse cell `k` is `[a_k, b_k] = [2k D, 2k D + D]`; the fine cell nested
//! in its centre is `[alpha_k, beta_k]` of width `d`. A positive entry is
//! drawn by picking `k` with probability `P_k = 2 (Phi(b_k) - Phi(a_k))` and
//! then a standard normal truncated to the fine cell; the codeword bit
//! chooses the sign.

use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use libm::{fabs, floor, fmod};

use crate::numerics::{
    normal_interval_mass, sample_truncated_std_normal, std_normal_pdf, RngStream,
};
use crate::{Bits, Error, Result};

/// Default cell-index truncation: cells `k` in `[-10, 10]`.
pub const DEFAULT_KAPPA: u32 = 10;

/// Lowest acceptable raw cell mass before renormalization.
const MIN_RAW_MASS: f64 = 1.0 - 1e-6;

/// Fine steps below this use the second-order midpoint expansion of the
/// truncated moments, where the closed form cancels catastrophically.
const SMALL_FINE_STEP: f64 = 1e-4;

/// Coarse step `delta_coarse`, fine step `delta_fine` and truncation `kappa`.
///
/// An infinite coarse step is the sign decision: a single cell `[0, inf)`
/// with the fine step forced to infinity as well.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeParams {
    delta_coarse: f64,
    delta_fine: f64,
    kappa: u32,
}

impl LatticeParams {
    pub fn new(delta_coarse: f64, delta_fine: f64, kappa: u32) -> Result<Self> {
        if !(delta_coarse > 0.0) {
            return Err(Error::domain(alloc::format!(
                "coarse step must be positive, got {delta_coarse}"
            )));
        }
        if kappa < 1 {
            return Err(Error::domain("kappa must be at least 1"));
        }
        if delta_coarse == f64::INFINITY {
            return Ok(Self {
                delta_coarse,
                delta_fine: f64::INFINITY,
                kappa,
            });
        }
        if !(0.0..=delta_coarse).contains(&delta_fine) {
            return Err(Error::domain(alloc::format!(
                "fine step must lie in [0, {delta_coarse}], got {delta_fine}"
            )));
        }
        Ok(Self {
            delta_coarse,
            delta_fine,
            kappa,
        })
    }

    /// The `(inf, inf)` sign-decision lattice.
    pub fn sign() -> Self {
        Self {
            delta_coarse: f64::INFINITY,
            delta_fine: f64::INFINITY,
            kappa: DEFAULT_KAPPA,
        }
    }

    pub fn with_kappa(self, kappa: u32) -> Result<Self> {
        Self::new(self.delta_coarse, self.delta_fine, kappa)
    }

    pub fn delta_coarse(&self) -> f64 {
        self.delta_coarse
    }

    pub fn delta_fine(&self) -> f64 {
        self.delta_fine
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn is_sign(&self) -> bool {
        self.delta_coarse == f64::INFINITY
    }
}

/// Smallest truncation covering `|x| <= 9` for coarse step `delta_coarse`,
/// never below [`DEFAULT_KAPPA`].
pub fn covering_kappa(delta_coarse: f64) -> u32 {
    if !delta_coarse.is_finite() {
        return DEFAULT_KAPPA;
    }
    let needed = libm::ceil(9.0 / (2.0 * delta_coarse)) as u32;
    needed.max(DEFAULT_KAPPA)
}

/// One coarse cell, its nested fine cell and its renormalized weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    pub k: i64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub weight: f64,
}

impl CellGeometry {
    pub fn midpoint(&self) -> f64 {
        if self.b.is_finite() {
            0.5 * (self.a + self.b)
        } else {
            f64::INFINITY
        }
    }

    /// Gaussian mass of the fine cell.
    pub fn fine_mass(&self) -> f64 {
        normal_interval_mass(self.alpha, self.beta)
    }
}

/// Codeword-bearing coordinates in watermark space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct WatermarkVector(pub Vec<f64>);

impl Deref for WatermarkVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for WatermarkVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl AsRef<[f64]> for WatermarkVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for WatermarkVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Per-element unsigned mean and variance of the watermark distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingMoments {
    pub mu: f64,
    pub sigma_sq: f64,
}

/// The alternating lattice decision for one coordinate.
///
/// Returns 1 when `floor(x / D)` is even. For `D = inf` this is the sign
/// decision with `sign(0) = -1`, so 0 decodes to bit 0.
pub fn decide_bit(x: f64, delta_coarse: f64) -> u8 {
    if delta_coarse == f64::INFINITY {
        return (x > 0.0) as u8;
    }
    let cell = floor(x / delta_coarse);
    (fmod(cell, 2.0) == 0.0) as u8
}

pub fn lattice_decide(x: &[f64], delta_coarse: f64) -> Bits {
    x.iter().map(|&v| decide_bit(v, delta_coarse)).collect()
}

/// sign(c) with sign(0) = -1.
pub fn bit_sign(bit: u8) -> f64 {
    if bit == 0 {
        -1.0
    } else {
        1.0
    }
}

/// Cells `k` in `[-kappa, kappa]` with weights renormalized to sum to one.
pub fn cell_weights(params: &LatticeParams) -> Result<Vec<CellGeometry>> {
    if params.is_sign() {
        return Ok(alloc::vec![CellGeometry {
            k: 0,
            a: 0.0,
            b: f64::INFINITY,
            alpha: 0.0,
            beta: f64::INFINITY,
            weight: 1.0,
        }]);
    }
    let (big, small) = (params.delta_coarse, params.delta_fine);
    let kappa = params.kappa as i64;
    let mut cells: Vec<CellGeometry> = (-kappa..=kappa)
        .map(|k| {
            let a = 2.0 * k as f64 * big;
            let b = a + big;
            let alpha = a + 0.5 * (big - small);
            CellGeometry {
                k,
                a,
                b,
                alpha,
                beta: alpha + small,
                weight: 2.0 * normal_interval_mass(a, b),
            }
        })
        .collect();
    let total: f64 = cells.iter().map(|c| c.weight).sum();
    if total < MIN_RAW_MASS {
        return Err(Error::KappaTooSmall {
            kappa: params.kappa,
            mass: total,
        });
    }
    for c in &mut cells {
        c.weight /= total;
    }
    Ok(cells)
}

/// Unsigned first and second moments of a standard normal truncated to
/// `[alpha, beta]`; a degenerate interval is its point mass.
pub(crate) fn truncated_moments(alpha: f64, beta: f64) -> (f64, f64) {
    if beta == f64::INFINITY {
        let tail = normal_interval_mass(alpha, beta);
        let ratio = std_normal_pdf(alpha) / tail;
        return (ratio, 1.0 + alpha * ratio);
    }
    let width = beta - alpha;
    let mid = 0.5 * (alpha + beta);
    if width < SMALL_FINE_STEP {
        // density of t = x - mid is proportional to exp(-mid t - t^2 / 2) on
        // [-h, h]; expanding to second order in h:
        let h_sq = 0.25 * width * width;
        let mean = mid - mid * h_sq / 3.0;
        let second = mid * mid + h_sq / 3.0 * (1.0 - 2.0 * mid * mid);
        return (mean, second);
    }
    let mass = normal_interval_mass(alpha, beta);
    if mass <= 0.0 {
        return (mid, mid * mid);
    }
    let (pa, pb) = (std_normal_pdf(alpha), std_normal_pdf(beta));
    // phi(alpha) - phi(beta) without cancellation
    let pdf_diff = pa * -libm::expm1(-0.5 * width * (alpha + beta));
    let mean = pdf_diff / mass;
    let second = 1.0 - (beta * pb - alpha * pa) / mass;
    (mean, second)
}

/// Closed-form unsigned mean and variance of one watermark coordinate.
pub fn embedding_moments(params: &LatticeParams) -> Result<EmbeddingMoments> {
    let cells = cell_weights(params)?;
    let mut mean = 0.0;
    let mut second = 0.0;
    for c in &cells {
        if c.weight == 0.0 {
            continue;
        }
        let (m1, m2) = if params.delta_fine == 0.0 {
            let m = c.midpoint();
            (m, m * m)
        } else {
            truncated_moments(c.alpha, c.beta)
        };
        mean += c.weight * m1;
        second += c.weight * m2;
    }
    Ok(EmbeddingMoments {
        mu: mean,
        sigma_sq: second - mean * mean,
    })
}

/// Alias table-free categorical sampler over renormalized cell weights.
pub(crate) struct CellSampler {
    cells: Vec<CellGeometry>,
    cumulative: Vec<f64>,
    fine_step: f64,
    coarse_step: f64,
}

impl CellSampler {
    pub(crate) fn new(params: &LatticeParams) -> Result<Self> {
        let cells = cell_weights(params)?;
        let mut acc = 0.0;
        let cumulative = cells
            .iter()
            .map(|c| {
                acc += c.weight;
                acc
            })
            .collect();
        Ok(Self {
            cells,
            cumulative,
            fine_step: params.delta_fine,
            coarse_step: params.delta_coarse,
        })
    }

    /// One signed watermark coordinate carrying `bit`.
    pub(crate) fn sample(&self, bit: u8, rng: &mut RngStream) -> Result<f64> {
        let sign = bit_sign(bit);
        loop {
            let u = rng.uniform_open() * self.cumulative[self.cumulative.len() - 1];
            let idx = self
                .cumulative
                .partition_point(|&c| c < u)
                .min(self.cells.len() - 1);
            let cell = &self.cells[idx];
            let magnitude = if self.fine_step == 0.0 {
                cell.midpoint()
            } else {
                sample_truncated_std_normal(cell.alpha, cell.beta, rng)?
            };
            let x = sign * magnitude;
            // A draw landing exactly on a coarse boundary would decode to
            // the other bit; it has probability zero but is rejected anyway.
            if decide_bit(x, self.coarse_step) == bit {
                return Ok(x);
            }
        }
    }
}

/// Draws a watermark vector whose lattice decision is exactly `codeword`.
pub fn sample_watermark(
    params: &LatticeParams,
    codeword: &[u8],
    rng: &mut RngStream,
) -> Result<WatermarkVector> {
    if codeword.is_empty() {
        return Err(Error::domain("codeword must not be empty"));
    }
    check_bits(codeword)?;
    let sampler = CellSampler::new(params)?;
    codeword
        .iter()
        .map(|&bit| sampler.sample(bit, rng))
        .collect::<Result<Vec<f64>>>()
        .map(WatermarkVector)
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<()> {
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::domain("bit vectors may only contain 0 and 1"));
    }
    Ok(())
}

/// Largest fine-step grid used to check that the variance is monotone
/// before bisecting.
const MONOTONE_GRID: usize = 64;

const ENDPOINT_RESIDUAL: f64 = 1e-12;

/// Fine step `d*` in `[0, D]` at which the embedding variance equals one,
/// the regime where the covariance carries no trace of the carrier.
pub fn solve_perfect_security_delta(delta_coarse: f64) -> Result<f64> {
    solve_perfect_security_delta_with_kappa(delta_coarse, DEFAULT_KAPPA)
}

pub fn solve_perfect_security_delta_with_kappa(delta_coarse: f64, kappa: u32) -> Result<f64> {
    if !(delta_coarse > 0.0 && delta_coarse.is_finite()) {
        return Err(Error::domain(alloc::format!(
            "perfect-security solve needs a finite positive coarse step, got {delta_coarse}"
        )));
    }
    let excess = |fine: f64| -> Result<f64> {
        let p = LatticeParams::new(delta_coarse, fine, kappa)?;
        Ok(embedding_moments(&p)?.sigma_sq - 1.0)
    };
    let at_zero = excess(0.0)?;
    let at_full = excess(delta_coarse)?;
    // An endpoint already at unit variance (small coarse steps with
    // d = D sit there up to rounding) is the solution.
    if fabs(at_zero) <= ENDPOINT_RESIDUAL {
        return Ok(0.0);
    }
    if fabs(at_full) <= ENDPOINT_RESIDUAL {
        return Ok(delta_coarse);
    }
    if at_zero.signum() == at_full.signum() {
        return Err(Error::NoSolution {
            sigma_sq_at_zero: at_zero + 1.0,
        });
    }
    let decreasing = at_full < at_zero;
    let mut prev = at_zero;
    for i in 1..=MONOTONE_GRID {
        let v = excess(delta_coarse * i as f64 / MONOTONE_GRID as f64)?;
        let ok = if decreasing { v <= prev + 1e-12 } else { v >= prev - 1e-12 };
        if !ok {
            return Err(Error::NotMonotone { delta_coarse });
        }
        prev = v;
    }
    let (mut lo, mut hi) = (0.0, delta_coarse);
    while hi - lo > 1e-13 * delta_coarse.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let v = excess(mid)?;
        if v == 0.0 {
            return Ok(mid);
        }
        if (v > 0.0) == (at_zero > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (vlo, vhi) = (fabs(excess(lo)?), fabs(excess(hi)?));
    Ok(if vlo <= vhi { lo } else { hi })
}

/// sqrt(2 / pi), the half-normal mean.
pub const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

/// Unsigned moments of the sign lattice in closed form.
pub fn sign_lattice_moments() -> EmbeddingMoments {
    let mu = HALF_NORMAL_MEAN;
    EmbeddingMoments {
        mu,
        sigma_sq: 1.0 - mu * mu,
    }
}
