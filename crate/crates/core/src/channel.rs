//! The AWGN channel seen through the lattice decision: theoretical and
//! simulated flip probabilities, BSC capacity and the measured noise presets.

use alloc::string::String;
use alloc::vec::Vec;

use libm::{ceil, floor, sqrt};

use crate::lattice::{cell_weights, decide_bit, CellGeometry, CellSampler, LatticeParams};
use crate::numerics::{binary_entropy, integrate, normal_interval_mass, std_normal_pdf, QuadratureSpec};
use crate::{Error, Result, RngStream};

/// Cells lighter than this do not contribute to the flip probability.
pub const NEGLIGIBLE_CELL_WEIGHT: f64 = 1e-12;

/// Noise is integrated out to this many standard deviations.
const NOISE_REACH: f64 = 12.0;

/// Signal positions beyond this are treated as unreachable.
const SIGNAL_REACH: f64 = 13.0;

/// Adds i.i.d. `N(0, sigma^2)` noise in place.
pub fn add_awgn(values: &mut [f64], sigma: f64, rng: &mut RngStream) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain("noise level must be finite and nonnegative"));
    }
    if sigma == 0.0 {
        return Ok(());
    }
    for v in values.iter_mut() {
        *v += sigma * rng.standard_normal();
    }
    Ok(())
}

/// Noisy copy of `input`.
pub fn awgn<T>(input: &T, sigma: f64, rng: &mut RngStream) -> Result<T>
where
    T: Clone + core::ops::DerefMut<Target = [f64]>,
{
    let mut out = input.clone();
    add_awgn(&mut out, sigma, rng)?;
    Ok(out)
}

/// One point of a channel characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelPoint {
    pub sigma: f64,
    pub p: f64,
    /// Binomial standard error; zero for theoretical points.
    pub stderr: f64,
}

/// Probability that a positive coordinate at `x` is pushed by
/// `N(0, sigma^2)` noise into a cell decoding to 0.
fn flip_given_position(x: f64, sigma: f64, delta_coarse: f64) -> f64 {
    if !delta_coarse.is_finite() {
        return normal_interval_mass(f64::NEG_INFINITY, -x / sigma);
    }
    let lo = x - NOISE_REACH * sigma;
    let hi = x + NOISE_REACH * sigma;
    let step = 2.0 * delta_coarse;
    // Cells decoding to 0 are [(2k+1)Δ, (2k+2)Δ].
    let k_lo = floor((lo - delta_coarse) / step) as i64 - 1;
    let k_hi = ceil((hi - delta_coarse) / step) as i64 + 1;
    let mut total = 0.0;
    for k in k_lo..=k_hi {
        let a = (2 * k + 1) as f64 * delta_coarse;
        let b = a + delta_coarse;
        total += normal_interval_mass((a - x) / sigma, (b - x) / sigma);
    }
    total
}

fn cell_flip(cell: &CellGeometry, params: &LatticeParams, sigma: f64, quad: &QuadratureSpec) -> Result<f64> {
    let delta = params.delta_coarse();
    if params.delta_fine() == 0.0 {
        return Ok(flip_given_position(cell.midpoint(), sigma, delta));
    }
    let lo = cell.alpha.max(-SIGNAL_REACH);
    let hi = cell.beta.min(SIGNAL_REACH);
    let mass = normal_interval_mass(cell.alpha, cell.beta);
    if !(hi > lo) || mass <= 0.0 {
        return Ok(0.0);
    }
    let integral = integrate(
        |x| std_normal_pdf(x) / mass * flip_given_position(x, sigma, delta),
        lo,
        hi,
        quad,
    )?;
    Ok(integral)
}

/// Theoretical flip probability of one codeword bit under AWGN of standard
/// deviation `sigma`, averaging the per-position flip probability over the
/// weighted fine cells the sampler draws from.
pub fn flip_probability_theoretical(params: &LatticeParams, sigma: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain("noise level must be finite and nonnegative"));
    }
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let cells = cell_weights(params)?;
    let mut p = 0.0;
    for cell in cells.iter().filter(|c| c.weight >= NEGLIGIBLE_CELL_WEIGHT) {
        p += cell.weight * cell_flip(cell, params, sigma, quad)?;
    }
    Ok(p.clamp(0.0, 0.5))
}

/// Minimum Monte Carlo trial count.
pub const MIN_MC_TRIALS: u64 = 1000;

/// Raw flip count over `n` simulated coordinates with random bits.
pub fn count_flips(params: &LatticeParams, sigma: f64, n: u64, rng: &mut RngStream) -> Result<u64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain("noise level must be finite and nonnegative"));
    }
    let sampler = CellSampler::new(params)?;
    let delta = params.delta_coarse();
    let mut flips = 0;
    for _ in 0..n {
        let bit = rng.bit();
        let x = sampler.sample(bit, rng)? + sigma * rng.standard_normal();
        if decide_bit(x, delta) != bit {
            flips += 1;
        }
    }
    Ok(flips)
}

/// Pools a flip count into a point with binomial standard error.
pub fn channel_point(sigma: f64, flips: u64, n: u64) -> ChannelPoint {
    let p = flips as f64 / n as f64;
    ChannelPoint {
        sigma,
        p,
        stderr: sqrt(p * (1.0 - p) / n as f64),
    }
}

/// Monte Carlo flip probability: watermark coordinates are sampled, noised
/// directly in watermark space and decided again.
pub fn flip_probability_monte_carlo(
    params: &LatticeParams,
    sigma: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<ChannelPoint> {
    if n < MIN_MC_TRIALS {
        return Err(Error::domain(alloc::format!(
            "at least {MIN_MC_TRIALS} trials are required, got {n}"
        )));
    }
    let flips = count_flips(params, sigma, n, rng)?;
    Ok(channel_point(sigma, flips, n))
}

/// Shannon capacity of a BSC with crossover `p`, in bits per use.
pub fn capacity(p: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::domain(alloc::format!("flip probability {p} outside [0, 0.5]")));
    }
    Ok(1.0 - binary_entropy(p)?)
}

/// Theoretical and simulated characteristic at one noise level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub sigma: f64,
    pub p_theory: f64,
    pub simulated: Option<ChannelPoint>,
}

/// Samples `sigma -> p` on a grid. With `n_mc = 0` only the theoretical
/// track is computed; each sigma uses its own split of `rng`.
pub fn channel_curve(
    params: &LatticeParams,
    sigmas: &[f64],
    n_mc: u64,
    quad: &QuadratureSpec,
    rng: &RngStream,
) -> Result<Vec<CurvePoint>> {
    sigmas
        .iter()
        .enumerate()
        .map(|(i, &sigma)| {
            let p_theory = flip_probability_theoretical(params, sigma, quad)?;
            let simulated = if n_mc > 0 {
                Some(flip_probability_monte_carlo(params, sigma, n_mc, &mut rng.split(i as u64))?)
            } else {
                None
            };
            Ok(CurvePoint {
                sigma,
                p_theory,
                simulated,
            })
        })
        .collect()
}

/// Equivalent latent-space noise variance measured for one generator and
/// one image transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisePreset {
    pub model: &'static str,
    pub transform: &'static str,
    pub sigma_sq: f64,
}

impl NoisePreset {
    /// `model/transform`.
    pub fn name(&self) -> String {
        alloc::format!("{}/{}", self.model, self.transform)
    }

    /// Noise standard deviation.
    pub fn sigma(&self) -> f64 {
        sqrt(self.sigma_sq)
    }
}

const MODELS: [&str; 3] = ["Sana", "Z-image", "Qwen"];
const TRANSFORMS: [&str; 6] = [
    "Identity",
    "Brightness 0.2",
    "Contrast 2.0",
    "JPEG QF80",
    "JPEG QF50",
    "CenterCrop 50%",
];
const VARIANCES: [[f64; 6]; 3] = [
    [0.21, 0.29, 0.46, 0.31, 0.42, 1.94],
    [0.35, 0.45, 0.66, 0.9, 1.08, 1.51],
    [0.34, 0.44, 0.78, 0.78, 1.09, 2.09],
];

/// All 18 presets, model-major.
pub fn preset_table() -> Vec<NoisePreset> {
    let mut out = Vec::with_capacity(18);
    for (m, model) in MODELS.iter().enumerate() {
        for (t, transform) in TRANSFORMS.iter().enumerate() {
            out.push(NoisePreset {
                model,
                transform,
                sigma_sq: VARIANCES[m][t],
            });
        }
    }
    out
}

fn normalize_label(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '-' | '_' | '%'))
        .flat_map(char::to_lowercase)
        .collect()
}

/// Finds a preset; labels match ignoring case, spaces, dashes,
/// underscores and percent signs.
pub fn lookup_preset(model: &str, transform: &str) -> Option<NoisePreset> {
    let (m, t) = (normalize_label(model), normalize_label(transform));
    preset_table()
        .into_iter()
        .find(|p| normalize_label(p.model) == m && normalize_label(p.transform) == t)
}

/// Finds a preset by `model/transform` name.
pub fn lookup_preset_name(name: &str) -> Option<NoisePreset> {
    let (model, transform) = name.split_once('/')?;
    lookup_preset(model, transform)
}
