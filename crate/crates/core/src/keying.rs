//! Secret carrier derivation, latent embedding and decoding.
//!
//! The key is an `L x M'` matrix `U` with orthonormal columns. A watermark
//! vector `z_u` is placed in the column span of `U` and the orthogonal
//! complement is filled with fresh Gaussian noise:
//! `z = (I - U U^T) z' + U z_u`, so that `U^T z = z_u` exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use libm::{fabs, sqrt};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::lattice::{lattice_decide, WatermarkVector};
use crate::numerics::RngStream;
use crate::{Bits, Error, Result};

/// Columns whose largest entry reaches this are rejected as too sparse.
pub const MAX_CARRIER_ENTRY: f64 = 0.9;

/// Nonces tried before [`derive_carrier`] gives up.
pub const MAX_NONCE_ATTEMPTS: u32 = 256;

/// Opaque key material plus the dimensions it is bound to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub key_bytes: [u8; 32],
    pub latent_dim: usize,
    pub codeword_len: usize,
    /// First carrier-derivation nonce to try.
    pub nonce: u64,
}

impl SecretKey {
    pub fn new(key_bytes: [u8; 32], latent_dim: usize, codeword_len: usize) -> Result<Self> {
        let key = Self {
            key_bytes,
            latent_dim,
            codeword_len,
            nonce: 0,
        };
        key.validate()?;
        Ok(key)
    }

    /// Key whose bytes are drawn from `rng`.
    pub fn generate(latent_dim: usize, codeword_len: usize, rng: &mut RngStream) -> Result<Self> {
        let mut bytes = [0u8; 32];
        rand_core::RngCore::fill_bytes(rng, &mut bytes);
        Self::new(bytes, latent_dim, codeword_len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.codeword_len < 1 || self.codeword_len > self.latent_dim {
            return Err(Error::domain(alloc::format!(
                "need 1 <= m' <= L, got m' = {} and L = {}",
                self.codeword_len,
                self.latent_dim
            )));
        }
        Ok(())
    }
}

/// A seed in latent space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LatentVector(pub Vec<f64>);

impl Deref for LatentVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LatentVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl AsRef<[f64]> for LatentVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for LatentVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `L x M'` matrix with orthonormal columns, stored column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CarrierMatrix {
    latent_dim: usize,
    codeword_len: usize,
    columns: Vec<f64>,
    nonce: u64,
}

impl CarrierMatrix {
    /// Wraps column-major data, re-orthonormalizing it. Used for estimated
    /// carriers; returns a domain error on rank deficiency.
    pub fn from_columns(latent_dim: usize, codeword_len: usize, columns: Vec<f64>) -> Result<Self> {
        if columns.len() != latent_dim * codeword_len {
            return Err(Error::Dimension {
                expected: latent_dim * codeword_len,
                found: columns.len(),
            });
        }
        let mut m = Self {
            latent_dim,
            codeword_len,
            columns,
            nonce: 0,
        };
        if !orthonormalize(&mut m.columns, latent_dim, codeword_len) {
            return Err(Error::domain("carrier columns are linearly dependent"));
        }
        Ok(m)
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn codeword_len(&self) -> usize {
        self.codeword_len
    }

    /// The nonce that produced this carrier.
    pub fn nonce(&self) -> u64 {
        self.nonce
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.latent_dim..(j + 1) * self.latent_dim]
    }

    /// Entry `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col * self.latent_dim + row]
    }

    pub fn columns_raw(&self) -> &[f64] {
        &self.columns
    }

    /// `U^T x` for `x` of length `L`.
    pub fn transpose_mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.codeword_len).map(|j| dot(self.column(j), x)).collect()
    }

    /// `U y` for `y` of length `M'`, accumulated into `out`.
    pub fn mul_add(&self, y: &[f64], out: &mut [f64]) {
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0.0 {
                continue;
            }
            for (o, &u) in out.iter_mut().zip(self.column(j)) {
                *o += yj * u;
            }
        }
    }

    /// max |U^T U - I| over all entries.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.codeword_len {
            for j in 0..=i {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(fabs(dot(self.column(i), self.column(j)) - target));
            }
        }
        worst
    }

    fn max_column_entry(&self) -> f64 {
        (0..self.codeword_len)
            .map(|j| self.column(j).iter().fold(0.0f64, |m, &x| m.max(fabs(x))))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt with one reorthogonalization pass, in place on
/// column-major data. Each column is normalized by the positive norm of its
/// residual, i.e. the triangular factor has a positive diagonal. Returns
/// false if a column collapses.
pub(crate) fn orthonormalize(cols: &mut [f64], rows: usize, ncols: usize) -> bool {
    for j in 0..ncols {
        let (done, rest) = cols.split_at_mut(j * rows);
        let v = &mut rest[..rows];
        let original = sqrt(dot(v, v));
        for _pass in 0..2 {
            for i in 0..j {
                let q = &done[i * rows..(i + 1) * rows];
                let r = dot(q, v);
                for (x, &qi) in v.iter_mut().zip(q) {
                    *x -= r * qi;
                }
            }
        }
        let norm = sqrt(dot(v, v));
        if !(norm > 1e-10 * original.max(f64::MIN_POSITIVE)) {
            return false;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    true
}

/// Derives the carrier for `key`: a keyed Gaussian `L x M'` matrix made
/// orthonormal by QR with a positive triangular diagonal.
///
/// Carriers with a column whose largest entry reaches
/// [`MAX_CARRIER_ENTRY`] are redrawn with the next nonce (only checked for
/// `L >= 2`, since a 1 x 1 carrier is always `[1]`).
pub fn derive_carrier(key: &SecretKey) -> Result<CarrierMatrix> {
    key.validate()?;
    let (rows, ncols) = (key.latent_dim, key.codeword_len);
    for attempt in 0..MAX_NONCE_ATTEMPTS {
        let nonce = key.nonce.wrapping_add(attempt as u64);
        let mut rng = ChaCha20Rng::from_seed(key.key_bytes);
        rng.set_stream(nonce);
        let mut columns: Vec<f64> = (0..rows * ncols)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        if !orthonormalize(&mut columns, rows, ncols) {
            continue;
        }
        let carrier = CarrierMatrix {
            latent_dim: rows,
            codeword_len: ncols,
            columns,
            nonce,
        };
        if rows < 2 || carrier.max_column_entry() < MAX_CARRIER_ENTRY {
            return Ok(carrier);
        }
    }
    Err(Error::DegenerateKey {
        attempts: MAX_NONCE_ATTEMPTS,
    })
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}

/// Places `z_u` in the carrier span and fills the complement with standard
/// normal noise.
pub fn embed_latent(
    carrier: &CarrierMatrix,
    z_u: &WatermarkVector,
    rng: &mut RngStream,
) -> Result<LatentVector> {
    check_len(carrier.codeword_len, z_u.len())?;
    let l = carrier.latent_dim;
    if carrier.codeword_len == l {
        let mut z = vec![0.0; l];
        carrier.mul_add(z_u, &mut z);
        return Ok(LatentVector(z));
    }
    let mut z: Vec<f64> = (0..l).map(|_| rng.standard_normal()).collect();
    // z = z' + U (z_u - U^T z')
    let coeffs: Vec<f64> = carrier
        .transpose_mul(&z)
        .iter()
        .zip(z_u.iter())
        .map(|(p, w)| w - p)
        .collect();
    carrier.mul_add(&coeffs, &mut z);
    Ok(LatentVector(z))
}

/// `U^T z_hat`.
pub fn project_to_watermark(carrier: &CarrierMatrix, z_hat: &[f64]) -> Result<WatermarkVector> {
    check_len(carrier.latent_dim, z_hat.len())?;
    Ok(WatermarkVector(carrier.transpose_mul(z_hat)))
}

/// Lattice decision on the projected latent.
pub fn decode(carrier: &CarrierMatrix, z_hat: &[f64], delta_coarse: f64) -> Result<Bits> {
    let w = project_to_watermark(carrier, z_hat)?;
    Ok(lattice_decide(&w, delta_coarse))
}
