//! JSON key files. The carrier itself is never stored; it is re-derived
//! from the key bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ssb_core::SecretKey;

use crate::LabError;

pub const KEY_FILE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFile {
    pub version: u32,
    #[serde(rename = "L")]
    pub latent_dim: usize,
    pub m_prime: usize,
    pub key_hex: String,
    pub nonce: u64,
}

impl KeyFile {
    pub fn from_key(key: &SecretKey) -> Self {
        Self {
            version: KEY_FILE_VERSION,
            latent_dim: key.latent_dim,
            m_prime: key.codeword_len,
            key_hex: hex::encode(key.key_bytes),
            nonce: key.nonce,
        }
    }

    pub fn to_key(&self) -> Result<SecretKey, LabError> {
        if self.version != KEY_FILE_VERSION {
            return Err(LabError::format(format!("unsupported key file version {}", self.version)));
        }
        let bytes = hex::decode(&self.key_hex).map_err(|e| LabError::format(format!("key_hex: {e}")))?;
        let key_bytes: [u8; 32] = bytes
            .try_into()
            .map_err(|_| LabError::format("key_hex must encode exactly 32 bytes"))?;
        let mut key = SecretKey::new(key_bytes, self.latent_dim, self.m_prime)?;
        key.nonce = self.nonce;
        Ok(key)
    }

    pub fn read(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LabError::format(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), LabError> {
        let mut text = serde_json::to_string_pretty(self).expect("key file serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| LabError::io(path, e))
    }
}

/// Short SHA-256 fingerprint of a key and the dimensions it is bound to.
pub fn fingerprint(key: &SecretKey) -> String {
    let mut h = Sha256::new();
    h.update(key.key_bytes);
    h.update((key.latent_dim as u64).to_le_bytes());
    h.update((key.codeword_len as u64).to_le_bytes());
    h.update(key.nonce.to_le_bytes());
    hex::encode(&h.finalize()[..8])
}
