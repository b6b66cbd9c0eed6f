//! Watermarking security: the PCA-based security ratio, Marchenko-Pastur
//! baselines, the spectral key-recovery attack and spoofing trials.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};

use crate::keying::{decode, derive_carrier, dot, embed_latent, orthonormalize, CarrierMatrix, LatentVector, SecretKey};
use crate::lattice::{bit_sign, embedding_moments, sample_watermark, LatticeParams};
use crate::numerics::symmetric_eigen;
use crate::{Bits, Error, Result, RngStream};

/// Default relative widening of the Marchenko-Pastur edges.
pub const DEFAULT_OUTLIER_TOLERANCE: f64 = 0.02;

/// Support `[(1 - sqrt(L/N))^2, (1 + sqrt(L/N))^2]` of the Marchenko-Pastur
/// law for `N` isotropic samples in dimension `L`.
pub fn mp_support(dim: usize, n_samples: usize) -> (f64, f64) {
    let r = sqrt(dim as f64 / n_samples as f64);
    ((1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r))
}

/// Observations per dimension a PCA estimator needs before it can spoof.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecurityRatio {
    pub eta: f64,
}

impl SecurityRatio {
    pub fn is_perfect(&self) -> bool {
        self.eta == f64::INFINITY
    }

    /// `eta`, but never below one observation in total.
    pub fn floored(&self, dim: usize) -> f64 {
        self.eta.max(1.0 / dim as f64)
    }
}

/// `eta = ((1 - sqrt(alpha) sigma_u) / (1 - sigma_u))^2` for watermark
/// fraction `alpha = M'/L` and watermark standard deviation `sigma_u`.
pub fn security_ratio(alpha: f64, sigma_u: f64) -> Result<SecurityRatio> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::domain(alloc::format!("alpha = {alpha} outside (0, 1]")));
    }
    if !(sigma_u > 0.0) || !sigma_u.is_finite() {
        return Err(Error::domain("watermark standard deviation must be positive"));
    }
    if fabs(sigma_u - 1.0) < 1e-9 {
        return Ok(SecurityRatio { eta: f64::INFINITY });
    }
    let q = (1.0 - sqrt(alpha) * sigma_u) / (1.0 - sigma_u);
    Ok(SecurityRatio { eta: q * q })
}

/// Streaming first and second moments of latent samples.
#[derive(Clone, Debug)]
pub struct CovarianceAccumulator {
    dim: usize,
    count: usize,
    sum: Vec<f64>,
    /// Upper triangle of the raw cross-product matrix, row-major full storage.
    cross: Vec<f64>,
}

impl CovarianceAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            count: 0,
            sum: vec![0.0; dim],
            cross: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn push(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: x.len(),
            });
        }
        let d = self.dim;
        for i in 0..d {
            let xi = x[i];
            self.sum[i] += xi;
            let row = &mut self.cross[i * d + i..(i + 1) * d];
            for (c, &xj) in row.iter_mut().zip(&x[i..]) {
                *c += xi * xj;
            }
        }
        self.count += 1;
        Ok(())
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.count.max(1) as f64;
        self.sum.iter().map(|s| s / n).collect()
    }

    /// Row-major covariance. Centered estimates subtract the sample mean
    /// and divide by `N - 1`; uncentered ones divide `sum x x^T` by `N`.
    pub fn covariance(&self, centered: bool) -> Result<Vec<f64>> {
        if self.count < 2 {
            return Err(Error::domain("at least two samples are needed"));
        }
        let d = self.dim;
        let n = self.count as f64;
        let mean = self.mean();
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let raw = self.cross[i * d + j];
                let v = if centered {
                    (raw - n * mean[i] * mean[j]) / (n - 1.0)
                } else {
                    raw / n
                };
                out[i * d + j] = v;
                out[j * d + i] = v;
            }
        }
        Ok(out)
    }
}

/// Row-major empirical covariance of `samples`.
pub fn empirical_covariance<S: AsRef<[f64]>>(samples: &[S], centered: bool) -> Result<Vec<f64>> {
    let first = samples.first().ok_or_else(|| Error::domain("no samples"))?;
    let mut acc = CovarianceAccumulator::new(first.as_ref().len());
    for s in samples {
        acc.push(s.as_ref())?;
    }
    acc.covariance(centered)
}

/// How a sample spectrum is computed and classified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub tolerance: f64,
    pub centered: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_OUTLIER_TOLERANCE,
            centered: true,
        }
    }
}

/// Eigenvalues of an empirical covariance against the isotropic baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub mp_lower: f64,
    pub mp_upper: f64,
    pub outliers_low: usize,
    pub outliers_high: usize,
    pub n_samples: usize,
    pub dim: usize,
    pub tolerance: f64,
}

impl SpectrumReport {
    fn classify(eigenvalues: Vec<f64>, n_samples: usize, tolerance: f64) -> Self {
        let dim = eigenvalues.len();
        let (mp_lower, mp_upper) = mp_support(dim, n_samples);
        let (lo, hi) = widened(mp_lower, mp_upper, tolerance);
        Self {
            outliers_low: eigenvalues.iter().filter(|&&l| l < lo).count(),
            outliers_high: eigenvalues.iter().filter(|&&l| l > hi).count(),
            eigenvalues,
            mp_lower,
            mp_upper,
            n_samples,
            dim,
            tolerance,
        }
    }

    pub fn outliers(&self) -> usize {
        self.outliers_low + self.outliers_high
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// Mean of the eigenvalues below the widened lower edge.
    pub fn low_cluster_mean(&self) -> Option<f64> {
        cluster_mean(&self.eigenvalues[..self.outliers_low])
    }

    pub fn mean_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.dim as f64
    }
}

fn widened(lower: f64, upper: f64, tolerance: f64) -> (f64, f64) {
    (lower * (1.0 - tolerance), upper * (1.0 + tolerance))
}

fn cluster_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if !(0.0..1.0).contains(&tolerance) {
        return Err(Error::domain("outlier tolerance must lie in [0, 1)"));
    }
    Ok(())
}

/// Spectrum of the accumulated samples.
pub fn spectrum_from_accumulator(acc: &CovarianceAccumulator, options: &SpectrumOptions) -> Result<SpectrumReport> {
    check_tolerance(options.tolerance)?;
    let cov = acc.covariance(options.centered)?;
    let eig = symmetric_eigen(&cov, acc.dim(), false)?;
    Ok(SpectrumReport::classify(eig.values, acc.count(), options.tolerance))
}

/// Spectrum of the empirical covariance of `samples`, classified against
/// the Marchenko-Pastur support widened by `tol`.
pub fn eigen_spectrum_report<S: AsRef<[f64]>>(samples: &[S], tol: f64) -> Result<SpectrumReport> {
    eigen_spectrum_report_with(
        samples,
        &SpectrumOptions {
            tolerance: tol,
            centered: true,
        },
    )
}

pub fn eigen_spectrum_report_with<S: AsRef<[f64]>>(samples: &[S], options: &SpectrumOptions) -> Result<SpectrumReport> {
    let first = samples.first().ok_or_else(|| Error::domain("no samples"))?;
    let mut acc = CovarianceAccumulator::new(first.as_ref().len());
    for s in samples {
        acc.push(s.as_ref())?;
    }
    spectrum_from_accumulator(&acc, options)
}

/// Directions an attacker attributes to the watermark.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyEstimate {
    dim: usize,
    /// Column-major `dim x rank`, orthonormal, most deviant direction first.
    subspace: Vec<f64>,
    eigenvalues: Vec<f64>,
    pub cluster_mean_eigenvalue: Option<f64>,
}

impl KeyEstimate {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            subspace: Vec::new(),
            eigenvalues: Vec::new(),
            cluster_mean_eigenvalue: None,
        }
    }

    /// Wraps orthonormal column-major directions.
    pub fn from_columns(dim: usize, subspace: Vec<f64>) -> Result<Self> {
        if dim == 0 || subspace.len() % dim != 0 {
            return Err(Error::domain("subspace size is not a multiple of the dimension"));
        }
        let rank = subspace.len() / dim;
        Ok(Self {
            dim,
            subspace,
            eigenvalues: vec![f64::NAN; rank],
            cluster_mean_eigenvalue: None,
        })
    }

    /// The exact subspace of a known carrier.
    pub fn from_carrier(carrier: &CarrierMatrix) -> Self {
        Self {
            dim: carrier.latent_dim(),
            subspace: carrier.columns_raw().to_vec(),
            eigenvalues: vec![f64::NAN; carrier.codeword_len()],
            cluster_mean_eigenvalue: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.subspace.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.subspace[j * self.dim..(j + 1) * self.dim]
    }

    pub fn subspace(&self) -> &[f64] {
        &self.subspace
    }

    /// Eigenvalue attached to each direction (NaN when not from PCA).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Flips column signs so each leading direction `j` points the way the
    /// sample mean says bit `j` of `codeword` does. PCA only fixes
    /// directions up to sign; the mean of watermarked samples breaks the
    /// tie.
    pub fn align_to_mean(&mut self, mean: &[f64], codeword: &[u8]) {
        let d = self.dim;
        for j in 0..self.rank().min(codeword.len()) {
            let col = &mut self.subspace[j * d..(j + 1) * d];
            let proj = dot(col, mean);
            if proj * bit_sign(codeword[j]) < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }

    /// Largest `|cos|` between estimated direction `j` and `target`.
    pub fn abs_cosine(&self, j: usize, target: &[f64]) -> f64 {
        let col = self.column(j);
        fabs(dot(col, target)) / sqrt(dot(col, col) * dot(target, target))
    }
}

/// Estimates the watermark subspace as the principal directions whose
/// eigenvalues leave the widened Marchenko-Pastur support.
pub fn pca_attack<S: AsRef<[f64]>>(samples: &[S], tol: f64) -> Result<KeyEstimate> {
    let first = samples.first().ok_or_else(|| Error::domain("no samples"))?;
    let mut acc = CovarianceAccumulator::new(first.as_ref().len());
    for s in samples {
        acc.push(s.as_ref())?;
    }
    Ok(pca_attack_accumulated(&acc, &SpectrumOptions { tolerance: tol, centered: true })?.1)
}

/// Spectrum and key estimate from one eigendecomposition.
pub fn pca_attack_accumulated(
    acc: &CovarianceAccumulator,
    options: &SpectrumOptions,
) -> Result<(SpectrumReport, KeyEstimate)> {
    check_tolerance(options.tolerance)?;
    let d = acc.dim();
    let cov = acc.covariance(options.centered)?;
    let eig = symmetric_eigen(&cov, d, true)?;
    let report = SpectrumReport::classify(eig.values.clone(), acc.count(), options.tolerance);
    let (lo, hi) = widened(report.mp_lower, report.mp_upper, options.tolerance);

    // Order outliers by distance from the bulk relative to the edge.
    let mut picked: Vec<(f64, usize)> = eig
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| {
            if l < lo {
                Some(((lo - l) / lo.max(f64::MIN_POSITIVE), i))
            } else if l > hi {
                Some(((l - hi) / hi, i))
            } else {
                None
            }
        })
        .collect();
    picked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut subspace = Vec::with_capacity(picked.len() * d);
    let mut values = Vec::with_capacity(picked.len());
    for &(_, i) in &picked {
        subspace.extend_from_slice(eig.vector(i).expect("vectors requested"));
        values.push(eig.values[i]);
    }
    let estimate = KeyEstimate {
        dim: d,
        subspace,
        cluster_mean_eigenvalue: cluster_mean(&values),
        eigenvalues: values,
    };
    Ok((report, estimate))
}

/// Carrier built from the first `m_prime` estimated directions, completed
/// with random orthonormal directions when the estimate is too small.
pub fn completed_carrier(estimate: &KeyEstimate, m_prime: usize, rng: &mut RngStream) -> Result<CarrierMatrix> {
    let d = estimate.dim();
    if m_prime == 0 || m_prime > d {
        return Err(Error::domain("need 1 <= m' <= L"));
    }
    let keep = estimate.rank().min(m_prime);
    loop {
        let mut cols = Vec::with_capacity(d * m_prime);
        cols.extend_from_slice(&estimate.subspace()[..keep * d]);
        for _ in keep..m_prime {
            for _ in 0..d {
                cols.push(rng.standard_normal());
            }
        }
        if orthonormalize(&mut cols, d, m_prime) {
            // Re-wrapping keeps the orthonormal columns as they are.
            return CarrierMatrix::from_columns(d, m_prime, cols);
        }
    }
}

/// Embeds `codeword` with a carrier built from `estimate`, decodes it with
/// the true key and reports whether the forgery decodes exactly.
pub fn spoof_trial(
    estimate: &KeyEstimate,
    codeword: &[u8],
    true_key: &CarrierMatrix,
    params: &LatticeParams,
    rng: &mut RngStream,
) -> Result<bool> {
    let m_prime = true_key.codeword_len();
    if codeword.len() != m_prime {
        return Err(Error::Dimension {
            expected: m_prime,
            found: codeword.len(),
        });
    }
    if estimate.dim() != true_key.latent_dim() {
        return Err(Error::Dimension {
            expected: true_key.latent_dim(),
            found: estimate.dim(),
        });
    }
    let forged_key = completed_carrier(estimate, m_prime, rng)?;
    let z_u = sample_watermark(params, codeword, rng)?;
    let z = embed_latent(&forged_key, &z_u, rng)?;
    Ok(decode(true_key, &z, params.delta_coarse())? == codeword)
}

/// Fraction of `trials` successful spoofs.
pub fn spoof_success_rate(
    estimate: &KeyEstimate,
    codeword: &[u8],
    true_key: &CarrierMatrix,
    params: &LatticeParams,
    trials: usize,
    rng: &mut RngStream,
) -> Result<f64> {
    let mut hits = 0;
    for _ in 0..trials {
        hits += spoof_trial(estimate, codeword, true_key, params, rng)? as usize;
    }
    Ok(hits as f64 / trials.max(1) as f64)
}

/// Success rate a spoofer must beat to count as better than guessing:
/// `2^-M'` plus three binomial standard errors over `trials`.
pub fn guessing_threshold(m_prime: usize, trials: usize) -> f64 {
    let p0 = libm::pow(2.0, -(m_prime as f64));
    p0 + 3.0 * sqrt(p0 * (1.0 - p0) / trials.max(1) as f64)
}

/// Latent samples for spectral analysis: every sample carries the same
/// codeword under `carrier`, or is plain standard normal when `params` is
/// `None`.
pub fn accumulate_samples(
    carrier: &CarrierMatrix,
    params: Option<&LatticeParams>,
    codeword: &[u8],
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<CovarianceAccumulator> {
    let d = carrier.latent_dim();
    let mut acc = CovarianceAccumulator::new(d);
    let mut buf = vec![0.0; d];
    for _ in 0..n_samples {
        match params {
            Some(p) => {
                let z_u = sample_watermark(p, codeword, rng)?;
                let z = embed_latent(carrier, &z_u, rng)?;
                acc.push(&z)?;
            }
            None => {
                buf.iter_mut().for_each(|x| *x = rng.standard_normal());
                acc.push(&buf)?;
            }
        }
    }
    Ok(acc)
}

/// Setup of one attack experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    pub latent_dim: usize,
    pub m_prime: usize,
    /// `None` attacks unwatermarked content.
    pub params: Option<LatticeParams>,
    pub n_samples: usize,
    pub spectrum: SpectrumOptions,
    /// Forgeries used to estimate the spoofing success rate.
    pub spoof_trials: usize,
}

/// Result of one attack experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackOutcome {
    pub spectrum: SpectrumReport,
    pub estimate_rank: usize,
    /// `|cos|` between the leading estimated direction and the first true
    /// column, when there is an estimate.
    pub leading_cosine: Option<f64>,
    pub spoof_success_rate: f64,
    /// A non-empty estimate that spoofs better than guessing.
    pub broken: bool,
}

/// Draws a key and a victim codeword, observes `n_samples` watermarked
/// latents, runs the PCA attack and measures spoofing with the estimate.
pub fn run_attack(config: &AttackConfig, rng: &mut RngStream) -> Result<AttackOutcome> {
    let key = SecretKey::generate(config.latent_dim, config.m_prime, rng)?;
    let carrier = derive_carrier(&key)?;
    let codeword: Bits = (0..config.m_prime).map(|_| rng.bit()).collect();
    let acc = accumulate_samples(&carrier, config.params.as_ref(), &codeword, config.n_samples, rng)?;
    let (spectrum, mut estimate) = pca_attack_accumulated(&acc, &config.spectrum)?;
    estimate.align_to_mean(&acc.mean(), &codeword);
    let leading_cosine = (!estimate.is_empty()).then(|| estimate.abs_cosine(0, carrier.column(0)));
    let spoof_params = config.params.unwrap_or_else(LatticeParams::sign);
    let rate = if config.spoof_trials > 0 {
        spoof_success_rate(&estimate, &codeword, &carrier, &spoof_params, config.spoof_trials, rng)?
    } else {
        0.0
    };
    let broken = !estimate.is_empty() && rate > guessing_threshold(config.m_prime, config.spoof_trials);
    Ok(AttackOutcome {
        estimate_rank: estimate.rank(),
        spectrum,
        leading_cosine,
        spoof_success_rate: rate,
        broken,
    })
}

/// `I + (sigma_sq - 1) U U^T`, row-major.
pub fn theoretical_latent_covariance(carrier: &CarrierMatrix, sigma_sq: f64) -> Vec<f64> {
    let d = carrier.latent_dim();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        out[i * d + i] = 1.0;
    }
    for j in 0..carrier.codeword_len() {
        let c = carrier.column(j);
        for r in 0..d {
            for s in 0..d {
                out[r * d + s] += (sigma_sq - 1.0) * c[r] * c[s];
            }
        }
    }
    out
}

/// Security ratio of lattice parameters at watermark fraction `alpha`.
pub fn lattice_security_ratio(params: &LatticeParams, alpha: f64) -> Result<SecurityRatio> {
    let m = embedding_moments(params)?;
    if fabs(m.sigma_sq - 1.0) < 1e-9 {
        return Ok(SecurityRatio { eta: f64::INFINITY });
    }
    security_ratio(alpha, sqrt(m.sigma_sq))
}

/// Histogram bin of a spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram of `values` on `[lo, hi]`; values outside are
/// dropped.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<HistogramBin>> {
    if bins == 0 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain("histogram needs bins > 0 and a finite lo < hi"));
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            lo: lo + i as f64 * width,
            hi: if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        out[idx].count += 1;
    }
    Ok(out)
}

/// Latent samples as vectors, for callers that want to keep them.
pub fn sample_latents(
    carrier: &CarrierMatrix,
    params: &LatticeParams,
    codeword: &[u8],
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<LatentVector>> {
    (0..n_samples)
        .map(|_| {
            let z_u = sample_watermark(params, codeword, rng)?;
            embed_latent(carrier, &z_u, rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn mp_examples() {
        let (lo, hi) = mp_support(512, 5120);
        assert!((lo - 0.46754).abs() < 1e-5 && (hi - 1.73246).abs() < 1e-5);
        assert_eq!(mp_support(7, 7), (0.0, 4.0));
        let (lo, hi) = mp_support(10, 1 << 40);
        assert!((lo - 1.0).abs() < 1e-5 && (hi - 1.0).abs() < 1e-5);
    }

    #[test]
    fn ratio_examples() {
        assert!(security_ratio(0.3, 1.0).unwrap().is_perfect());
        assert!((security_ratio(1.0, 0.5).unwrap().eta - 1.0).abs() < 1e-15);
        let su = sqrt(1.0 - 2.0 / PI);
        assert!((security_ratio(0.5, su).unwrap().eta - 2.086).abs() < 0.01);
        assert!(security_ratio(0.0, 0.5).is_err());
        assert!(security_ratio(1.5, 0.5).is_err());
        assert!(security_ratio(0.5, 0.0).is_err());
        assert_eq!(SecurityRatio { eta: 1e-4 }.floored(256), 1.0 / 256.0);
    }

    #[test]
    fn covariance_matches_direct() {
        let mut rng = RngStream::new(5, 0);
        let samples: Vec<Vec<f64>> = (0..50).map(|_| (0..4).map(|_| rng.standard_normal() + 1.0).collect()).collect();
        let cov = empirical_covariance(&samples, true).unwrap();
        let mean: Vec<f64> = (0..4).map(|i| samples.iter().map(|s| s[i]).sum::<f64>() / 50.0).collect();
        for i in 0..4 {
            for j in 0..4 {
                let direct: f64 = samples.iter().map(|s| (s[i] - mean[i]) * (s[j] - mean[j])).sum::<f64>() / 49.0;
                assert!((cov[i * 4 + j] - direct).abs() < 1e-12);
            }
        }
        let raw = empirical_covariance(&samples, false).unwrap();
        let direct: f64 = samples.iter().map(|s| s[0] * s[1]).sum::<f64>() / 50.0;
        assert!((raw[1] - direct).abs() < 1e-12);
        assert!(empirical_covariance(&samples[..1], true).is_err());
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&[0.0, 0.1, 0.5, 0.99, 1.0, 2.0], 2, 0.0, 1.0).unwrap();
        assert_eq!(h[0].count, 2);
        assert_eq!(h[1].count, 3);
        assert!(histogram(&[], 0, 0.0, 1.0).is_err());
    }

    #[test]
    fn true_key_always_spoofs() {
        let key = SecretKey::generate(32, 6, &mut RngStream::new(1, 0)).unwrap();
        let u = derive_carrier(&key).unwrap();
        let est = KeyEstimate::from_carrier(&u);
        let params = LatticeParams::new(1.6, 0.4, 10).unwrap();
        let mut rng = RngStream::new(1, 1);
        for _ in 0..50 {
            let c: Vec<u8> = (0..6).map(|_| rng.bit()).collect();
            assert!(spoof_trial(&est, &c, &u, &params, &mut rng).unwrap());
        }
    }

    #[test]
    fn random_guess_baseline() {
        let key = SecretKey::generate(64, 8, &mut RngStream::new(2, 0)).unwrap();
        let u = derive_carrier(&key).unwrap();
        let c = [1, 0, 0, 1, 1, 0, 1, 0];
        let rate = spoof_success_rate(&KeyEstimate::empty(64), &c, &u, &LatticeParams::sign(), 1000, &mut RngStream::new(2, 1)).unwrap();
        assert!(rate <= 0.02, "{rate}");
    }

    #[test]
    fn alignment_uses_codeword() {
        let mut est = KeyEstimate::from_columns(2, vec![1.0, 0.0]).unwrap();
        est.align_to_mean(&[-0.5, 0.1], &[1]);
        assert_eq!(est.column(0), &[-1.0, 0.0]);
        est.align_to_mean(&[-0.5, 0.1], &[0]);
        assert_eq!(est.column(0), &[1.0, 0.0]);
    }
}
