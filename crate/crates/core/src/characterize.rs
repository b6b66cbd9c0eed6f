//! Fidelity, characteristic surfaces and the theory-versus-simulation
//! validation report.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use libm::log;

use crate::channel::{capacity, flip_probability_monte_carlo, flip_probability_theoretical};
use crate::codes::best_repetition_rate;
use crate::lattice::{covering_kappa, embedding_moments, EmbeddingMoments, LatticeParams};
use crate::numerics::QuadratureSpec;
use crate::security::lattice_security_ratio;
use crate::{Error, Result, RngStream};

/// Per-element KL divergence, in nats, from the standard normal to the
/// watermarked marginal: `((1 + mu^2)/sigma^2 + ln sigma^2 - 1) / 2`.
pub fn fidelity_from_moments(moments: &EmbeddingMoments) -> f64 {
    let EmbeddingMoments { mu, sigma_sq } = *moments;
    0.5 * ((1.0 + mu * mu) / sigma_sq + log(sigma_sq) - 1.0)
}

/// Per-element fidelity cost of the lattice parameters. A codeword of
/// length `M'` costs `M'` times this.
pub fn fidelity_per_element(params: &LatticeParams) -> Result<f64> {
    Ok(fidelity_from_moments(&embedding_moments(params)?))
}

/// Default coarse steps for surface sweeps: 0.2 to 4.0 by 0.2, then the
/// sign lattice.
pub fn default_delta_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.2).collect();
    grid.push(f64::INFINITY);
    grid
}

/// Default fine-to-coarse ratios for surface sweeps.
pub fn default_fine_fraction_grid() -> Vec<f64> {
    alloc::vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

/// Short machine-readable code for a failed computation.
pub fn failure_code(err: &Error) -> &'static str {
    match err {
        Error::Domain(_) => "domain",
        Error::Dimension { .. } => "dimension",
        Error::KappaTooSmall { .. } => "kappa_too_small",
        Error::Convergence { .. } => "no_convergence",
        Error::NoSolution { .. } => "no_solution",
        Error::NotMonotone { .. } => "not_monotone",
        Error::Infeasible { .. } => "infeasible",
        Error::DegenerateKey { .. } => "degenerate_key",
    }
}

/// One cell of a characteristic surface.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceRow {
    pub delta_coarse: f64,
    pub delta_fine: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub p: Option<f64>,
    pub capacity: Option<f64>,
    pub fidelity_per_element: Option<f64>,
    pub eta: Option<f64>,
    pub failure: Option<&'static str>,
}

fn surface_cell(delta: f64, ratio: f64, alpha: f64, sigma: f64, quad: &QuadratureSpec) -> SurfaceRow {
    let delta_fine = if delta.is_finite() { ratio * delta } else { f64::INFINITY };
    let mut row = SurfaceRow {
        delta_coarse: delta,
        delta_fine,
        alpha,
        sigma,
        p: None,
        capacity: None,
        fidelity_per_element: None,
        eta: None,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let params = LatticeParams::new(delta, delta_fine, covering_kappa(delta))?;
        let p = flip_probability_theoretical(&params, sigma, quad)?;
        row.p = Some(p);
        row.capacity = Some(capacity(p)?);
        row.fidelity_per_element = Some(fidelity_per_element(&params)?);
        row.eta = Some(lattice_security_ratio(&params, alpha)?.eta);
        Ok(())
    })();
    if let Err(e) = result {
        row.failure = Some(failure_code(&e));
    }
    row
}

/// Capacity, fidelity and security ratio on a `(delta, delta_fine/delta)`
/// grid, coarse-major. Failing cells keep their coordinates, carry `None`
/// for the missing values and a failure code.
///
/// Each cell uses the smallest truncation that covers the Gaussian mass,
/// so fine coarse steps do not trip the truncation check.
pub fn sweep_surface(
    delta_grid: &[f64],
    fine_fraction_grid: &[f64],
    alpha: f64,
    sigma: f64,
    quad: &QuadratureSpec,
) -> Result<Vec<SurfaceRow>> {
    if delta_grid.is_empty() || fine_fraction_grid.is_empty() {
        return Err(Error::domain("sweep grids must not be empty"));
    }
    if fine_fraction_grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::domain("fine fractions must lie in [0, 1]"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain("alpha must lie in (0, 1]"));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain("noise level must be finite and nonnegative"));
    }
    let mut rows = Vec::with_capacity(delta_grid.len() * fine_fraction_grid.len());
    for &delta in delta_grid {
        // every ratio gives the same sign lattice at infinite coarse step
        let ratios = if delta.is_infinite() { &fine_fraction_grid[..1] } else { fine_fraction_grid };
        for &ratio in ratios {
            rows.push(surface_cell(delta, ratio, alpha, sigma, quad));
        }
    }
    Ok(rows)
}

/// The schemes compared in a validation report.
#[derive(Clone, Debug, PartialEq)]
pub enum SchemeKind {
    /// Nested-lattice scheme; rates at Shannon capacity.
    Lattice(LatticeParams),
    /// Sign decision with a repetition code for `message_bits` bits at
    /// message error `target_pe`.
    GaussianShading { message_bits: u64, target_pe: f64 },
    /// Literature baseline: only its security ratio is reported.
    PseudorandomCode,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub name: String,
    pub kind: SchemeKind,
    pub latent_dim: usize,
    pub m_prime: usize,
}

impl SchemeConfig {
    pub fn alpha(&self) -> f64 {
        self.m_prime as f64 / self.latent_dim as f64
    }
}

/// A labelled noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseLevel {
    pub label: String,
    pub sigma: f64,
}

impl NoiseLevel {
    pub fn new(label: impl Into<String>, sigma: f64) -> Self {
        Self {
            label: label.into(),
            sigma,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub scheme: String,
    pub noise: String,
    pub sigma: f64,
    pub p_theory: Option<f64>,
    pub p_empirical: Option<f64>,
    pub stderr: Option<f64>,
    pub rate_theory: Option<f64>,
    pub rate_empirical: Option<f64>,
    pub fidelity: Option<f64>,
    pub eta: f64,
    pub failure: Option<&'static str>,
}

impl ValidationRow {
    /// `|p_theory - p_empirical|` in standard errors.
    pub fn z_score(&self) -> Option<f64> {
        let (t, e, s) = (self.p_theory?, self.p_empirical?, self.stderr?);
        if s > 0.0 {
            Some((t - e).abs() / s)
        } else {
            Some(if t == e { 0.0 } else { f64::INFINITY })
        }
    }
}

/// Minimum Monte Carlo size for validation rows.
pub const MIN_VALIDATION_TRIALS: u64 = 10_000;

fn validation_row(
    scheme: &SchemeConfig,
    noise: &NoiseLevel,
    n_mc: u64,
    quad: &QuadratureSpec,
    rng: &mut RngStream,
) -> ValidationRow {
    let floor_eta = 1.0 / scheme.latent_dim as f64;
    let mut row = ValidationRow {
        scheme: scheme.name.clone(),
        noise: noise.label.clone(),
        sigma: noise.sigma,
        p_theory: None,
        p_empirical: None,
        stderr: None,
        rate_theory: None,
        rate_empirical: None,
        fidelity: None,
        eta: floor_eta,
        failure: None,
    };
    let result = (|| -> Result<()> {
        let params = match &scheme.kind {
            SchemeKind::PseudorandomCode => return Ok(()),
            SchemeKind::Lattice(p) => *p,
            SchemeKind::GaussianShading { .. } => LatticeParams::sign(),
        };
        row.fidelity = Some(fidelity_per_element(&params)?);
        if let SchemeKind::Lattice(_) = scheme.kind {
            row.eta = lattice_security_ratio(&params, scheme.alpha())?.floored(scheme.latent_dim);
        }
        let p_theory = flip_probability_theoretical(&params, noise.sigma, quad)?;
        row.p_theory = Some(p_theory);
        let mc = flip_probability_monte_carlo(&params, noise.sigma, n_mc, rng)?;
        row.p_empirical = Some(mc.p);
        row.stderr = Some(mc.stderr);
        match scheme.kind {
            SchemeKind::GaussianShading { message_bits, target_pe } => {
                row.rate_theory = Some(best_repetition_rate(p_theory, message_bits, target_pe)?.rate);
                row.rate_empirical = Some(best_repetition_rate(mc.p.min(0.5 - 1e-12), message_bits, target_pe)?.rate);
            }
            _ => {
                row.rate_theory = Some(capacity(p_theory)?);
                row.rate_empirical = Some(capacity(mc.p.min(0.5))?);
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.failure = Some(failure_code(&e));
    }
    row
}

/// Theoretical and simulated flip probabilities, rates, fidelity and
/// security ratio for every scheme at every noise level, scheme-major.
/// Each `(scheme, noise)` pair draws from its own split of `rng`.
pub fn validate_system(
    schemes: &[SchemeConfig],
    noise_levels: &[NoiseLevel],
    n_mc: u64,
    rng: &RngStream,
    quad: &QuadratureSpec,
) -> Result<Vec<ValidationRow>> {
    if n_mc < MIN_VALIDATION_TRIALS {
        return Err(Error::domain(alloc::format!(
            "validation needs at least {MIN_VALIDATION_TRIALS} trials, got {n_mc}"
        )));
    }
    if let Some(s) = schemes.iter().find(|s| s.latent_dim == 0 || s.m_prime == 0 || s.m_prime > s.latent_dim) {
        return Err(Error::domain(alloc::format!("scheme {} needs 1 <= m' <= L", s.name)));
    }
    let mut rows = Vec::with_capacity(schemes.len() * noise_levels.len());
    for (i, scheme) in schemes.iter().enumerate() {
        for (j, noise) in noise_levels.iter().enumerate() {
            let mut stream = rng.split(((i as u64) << 32) | j as u64);
            rows.push(validation_row(scheme, noise, n_mc, quad, &mut stream));
        }
    }
    Ok(rows)
}

/// The default comparison: the sign lattice, the perfectly secure lattice
/// at coarse step 1.6, Gaussian Shading with a repetition code for
/// `message_bits` bits at message error 1e-6, and the pseudorandom-code
/// baseline.
pub fn default_schemes(latent_dim: usize, m_prime: usize, message_bits: u64) -> Result<Vec<SchemeConfig>> {
    let secure = crate::lattice::solve_perfect_security_delta(1.6)?;
    let mk = |name: &str, kind| SchemeConfig {
        name: name.to_string(),
        kind,
        latent_dim,
        m_prime,
    };
    Ok(alloc::vec![
        mk("ssb(inf,inf)", SchemeKind::Lattice(LatticeParams::sign())),
        mk(
            "ssb(1.6,auto)",
            SchemeKind::Lattice(LatticeParams::new(1.6, secure, crate::lattice::DEFAULT_KAPPA)?)
        ),
        mk(
            "gaussian-shading",
            SchemeKind::GaussianShading {
                message_bits,
                target_pe: 1e-6,
            }
        ),
        mk("prc", SchemeKind::PseudorandomCode),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn fidelity_examples() {
        let identical = EmbeddingMoments { mu: 0.0, sigma_sq: 1.0 };
        assert_eq!(fidelity_from_moments(&identical), 0.0);
        let sign = fidelity_per_element(&LatticeParams::sign()).unwrap();
        assert!((sign - 1.2457).abs() < 1e-3);
        let direct = 0.5 * ((1.0 + 2.0 / PI) / (1.0 - 2.0 / PI) + log(1.0 - 2.0 / PI) - 1.0);
        assert!((sign - direct).abs() < 1e-12);
        let unit = EmbeddingMoments { mu: 0.3, sigma_sq: 1.0 };
        assert!((fidelity_from_moments(&unit) - 0.5 * 0.09).abs() < 1e-15);
    }

    #[test]
    fn default_grid_shape() {
        assert_eq!(default_delta_grid().len(), 21);
        assert!((default_delta_grid()[19] - 4.0).abs() < 1e-12);
        let rows = sweep_surface(&default_delta_grid(), &default_fine_fraction_grid(), 0.5, 0.42, &QuadratureSpec::default()).unwrap();
        assert_eq!(rows.len(), 20 * 5 + 1);
        assert!(rows.iter().all(|r| r.failure.is_none()), "{:?}", rows.iter().find(|r| r.failure.is_some()));
    }

    #[test]
    fn sign_row_eta() {
        let rows = sweep_surface(&[f64::INFINITY], &[0.0, 1.0], 0.5, 1.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(rows.len(), 1);
        let su = libm::sqrt(1.0 - 2.0 / PI);
        let expected = libm::pow((1.0 - libm::sqrt(0.5) * su) / (1.0 - su), 2.0);
        for r in rows {
            assert!(r.delta_fine.is_infinite());
            assert!((r.eta.unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let q = QuadratureSpec::default();
        assert!(sweep_surface(&[], &[0.5], 0.5, 0.1, &q).is_err());
        assert!(sweep_surface(&[1.0], &[1.5], 0.5, 0.1, &q).is_err());
    }

    #[test]
    fn validation_rejects_small_runs() {
        let schemes = default_schemes(256, 128, 32).unwrap();
        let r = validate_system(&schemes, &[NoiseLevel::new("x", 1.0)], 100, &RngStream::new(0, 0), &QuadratureSpec::default());
        assert!(r.is_err());
    }
}
