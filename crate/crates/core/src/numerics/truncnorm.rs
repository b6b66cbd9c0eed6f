use libm::{exp, log1p};

use super::special::{std_normal_cdf, std_normal_cdf_inv, std_normal_sf};
use super::RngStream;
use crate::{Error, Result};

/// Below this distance from zero the conditioned-uniform inverse CDF is used;
/// intervals entirely past it go to the exponential rejection sampler.
const TAIL_START: f64 = 4.0;

/// Draws from the standard normal conditioned on `[a, b]`.
///
/// `b` may be `+inf` and `a` may be `-inf`.
pub fn sample_truncated_std_normal(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a < b) {
        return Err(Error::domain(alloc::format!(
            "truncation interval [{a}, {b}] is empty"
        )));
    }
    if a >= TAIL_START {
        return Ok(upper_tail(a, b, rng));
    }
    if b <= -TAIL_START {
        return Ok(-upper_tail(-b, -a, rng));
    }
    let u = rng.uniform_open();
    let x = if a >= 0.0 {
        // upper half: interpolate survival probabilities
        let (sa, sb) = (std_normal_sf(a), std_normal_sf(b));
        -std_normal_cdf_inv(sb + u * (sa - sb))?
    } else {
        let (ca, cb) = (std_normal_cdf(a), std_normal_cdf(b));
        std_normal_cdf_inv(ca + u * (cb - ca))?
    };
    Ok(x.clamp(a, b))
}

/// Rejection from an exponential proposal of rate `a`, truncated to `[a, b]`.
/// The acceptance ratio is exp(-(x - a)^2 / 2).
fn upper_tail(a: f64, b: f64, rng: &mut RngStream) -> f64 {
    let span = b - a;
    let cut = if span.is_finite() {
        -libm::expm1(-a * span)
    } else {
        1.0
    };
    loop {
        let u = rng.uniform_open();
        let x = a - log1p(-u * cut) / a;
        let t = x - a;
        if x <= b && rng.uniform_open() <= exp(-0.5 * t * t) {
            return x;
        }
    }
}
