//! Binary latent files: the 8-byte magic `SSBLAT01`, the dimension as a
//! little-endian u64, then that many little-endian f64 values.

use std::io::{Read, Write};
use std::path::Path;

use ssb_core::LatentVector;

use crate::LabError;

pub const LATENT_MAGIC: &[u8; 8] = b"SSBLAT01";

pub fn write_latent<W: Write>(mut out: W, z: &[f64]) -> std::io::Result<()> {
    out.write_all(LATENT_MAGIC)?;
    out.write_all(&(z.len() as u64).to_le_bytes())?;
    for v in z {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_latent<R: Read>(mut input: R) -> Result<LatentVector, LabError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(|_| LabError::format("latent file is truncated"))?;
    if &magic != LATENT_MAGIC {
        return Err(LabError::format("not a latent file (bad magic)"));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word).map_err(|_| LabError::format("latent file is truncated"))?;
    let len = u64::from_le_bytes(word) as usize;
    let mut values = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        input.read_exact(&mut word).map_err(|_| LabError::format("latent file is truncated"))?;
        values.push(f64::from_le_bytes(word));
    }
    let mut rest = Vec::new();
    input.read_to_end(&mut rest).map_err(|e| LabError::format(e.to_string()))?;
    if !rest.is_empty() {
        return Err(LabError::format("trailing bytes after latent data"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::format("latent file holds non-finite values"));
    }
    Ok(LatentVector(values))
}

pub fn write_latent_file(path: &Path, z: &[f64]) -> Result<(), LabError> {
    let file = std::fs::File::create(path).map_err(|e| LabError::io(path, e))?;
    write_latent(std::io::BufWriter::new(file), z).map_err(|e| LabError::io(path, e))
}

pub fn read_latent_file(path: &Path) -> Result<LatentVector, LabError> {
    let file = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
    read_latent(std::io::BufReader::new(file))
}
