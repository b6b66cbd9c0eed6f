//! Multi-user attribution: every user owns a unique message, every
//! generated image carries it, and the provider attributes noisy images
//! back to users.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use libm::ceil;
use rand_core::RngCore;

use crate::channel::{add_awgn, capacity, flip_probability_theoretical};
use crate::codes::{hamming_distance, nearest_codeword, LinearCode};
use crate::keying::{decode, derive_carrier, embed_latent, SecretKey};
use crate::lattice::{sample_watermark, LatticeParams};
use crate::numerics::QuadratureSpec;
use crate::{Bits, Error, Result, RngStream};

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub n_users: u64,
    pub n_images: u64,
    /// Message length `M` in bits.
    pub message_bits: usize,
    /// Latent dimension `L`.
    pub latent_dim: usize,
    pub params: LatticeParams,
    pub sigma: f64,
    /// Code rate as a fraction of the channel capacity.
    pub rate_margin: f64,
    /// Number of images that reuse an earlier image's seed.
    pub inject_duplicates: u64,
}

impl ScenarioConfig {
    pub fn new(params: LatticeParams, sigma: f64) -> Self {
        Self {
            n_users: 100,
            n_images: 1000,
            message_bits: 32,
            latent_dim: 256,
            params,
            sigma,
            rate_margin: 0.8,
            inject_duplicates: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub n_users: u64,
    pub n_images: u64,
    pub message_bits: usize,
    pub m_prime: usize,
    pub p_theory: f64,
    pub capacity: f64,
    pub code_rate: f64,
    pub correct: u64,
    /// Codeword bits flipped by the channel, over all images.
    pub bit_errors: u64,
    /// Seeds used by more than one image.
    pub reused_seeds: Vec<u64>,
}

impl ScenarioReport {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.n_images.max(1) as f64
    }

    pub fn bit_error_rate(&self) -> f64 {
        self.bit_errors as f64 / (self.n_images.max(1) as f64 * self.m_prime as f64)
    }

    pub fn audit_passed(&self) -> bool {
        self.reused_seeds.is_empty()
    }
}

fn random_message(bits: usize, rng: &mut RngStream) -> Bits {
    (0..bits).map(|_| rng.bit()).collect()
}

/// Codeword length for `message_bits` at `rate_margin` of the capacity of
/// the channel at `sigma`.
pub fn codeword_length(params: &LatticeParams, sigma: f64, message_bits: usize, rate_margin: f64) -> Result<(usize, f64, f64)> {
    let p = flip_probability_theoretical(params, sigma, &QuadratureSpec::default())?;
    let c = capacity(p)?;
    let rate = rate_margin * c;
    if !(rate > 0.0) {
        return Err(Error::domain("the channel has no capacity left at this noise level"));
    }
    Ok((ceil(message_bits as f64 / rate) as usize, p, c))
}

/// Runs the attribution scenario. Users get distinct random messages,
/// encoded by a keyed systematic linear code at `rate_margin` times the
/// capacity; each image draws a fresh seed, carries its user's codeword,
/// passes through AWGN in latent space and is attributed to the registered
/// user with the nearest codeword.
pub fn run_scenario(config: &ScenarioConfig, rng: &mut RngStream) -> Result<ScenarioReport> {
    let m = config.message_bits;
    if m == 0 {
        return Err(Error::domain("messages need at least one bit"));
    }
    if config.n_users == 0 {
        return Err(Error::domain("at least one user is needed"));
    }
    if m < 64 && config.n_users > 1u64 << m {
        return Err(Error::domain(alloc::format!(
            "{} users do not fit in {m}-bit messages",
            config.n_users
        )));
    }
    if !(config.rate_margin > 0.0 && config.rate_margin <= 1.0) {
        return Err(Error::domain("rate margin must lie in (0, 1]"));
    }
    if config.inject_duplicates >= config.n_images.max(1) {
        return Err(Error::domain("cannot inject more duplicates than images"));
    }
    let (m_prime, p, c) = codeword_length(&config.params, config.sigma, m, config.rate_margin)?;
    if m_prime > config.latent_dim {
        return Err(Error::domain(alloc::format!(
            "codeword length {m_prime} exceeds latent dimension {}",
            config.latent_dim
        )));
    }

    let key = SecretKey::generate(config.latent_dim, m_prime, rng)?;
    let carrier = derive_carrier(&key)?;
    let code = LinearCode::random(m, m_prime, rng)?;

    let mut seen = BTreeSet::new();
    let mut codewords = Vec::with_capacity(config.n_users as usize);
    while (codewords.len() as u64) < config.n_users {
        let msg = random_message(m, rng);
        if seen.insert(msg.clone()) {
            codewords.push(code.encode(&msg)?);
        }
    }

    let mut used = BTreeSet::new();
    let mut reused = BTreeSet::new();
    let mut seeds: Vec<u64> = Vec::with_capacity(config.n_images as usize);
    let (mut correct, mut bit_errors) = (0, 0);
    let first_duplicate = config.n_images - config.inject_duplicates;
    for image in 0..config.n_images {
        let user = (rng.below(config.n_users)) as usize;
        let seed = if image >= first_duplicate {
            seeds[rng.below(seeds.len() as u64) as usize]
        } else {
            rng.next_u64()
        };
        if !used.insert(seed) {
            reused.insert(seed);
        }
        seeds.push(seed);

        let mut image_rng = RngStream::new(seed, 0);
        let z_u = sample_watermark(&config.params, &codewords[user], &mut image_rng)?;
        let mut z = embed_latent(&carrier, &z_u, &mut image_rng)?;
        add_awgn(&mut z, config.sigma, rng)?;
        let received = decode(&carrier, &z, config.params.delta_coarse())?;
        bit_errors += hamming_distance(&received, &codewords[user]) as u64;
        if nearest_codeword(&received, &codewords) == Some(user) {
            correct += 1;
        }
    }

    Ok(ScenarioReport {
        n_users: config.n_users,
        n_images: config.n_images,
        message_bits: m,
        m_prime,
        p_theory: p,
        capacity: c,
        code_rate: m as f64 / m_prime as f64,
        correct,
        bit_errors,
        reused_seeds: reused.into_iter().collect(),
    })
}
