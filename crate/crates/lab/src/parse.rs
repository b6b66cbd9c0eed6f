//! Parsers for command-line values.

use ssb_core::lattice::{solve_perfect_security_delta_with_kappa, LatticeParams, DEFAULT_KAPPA};
use ssb_core::{Bits, Error};

use crate::LabError;

fn parse_real(s: &str) -> Result<f64, LabError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse().map_err(|_| LabError::usage(format!("not a number: {s:?}"))),
    }
}

/// Fine-step choice before it is resolved against a coarse step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FineStep {
    Value(f64),
    /// The perfectly secure fine step for the coarse step.
    Auto,
}

/// `"inf,inf"`, `"1.6,auto"`, `"1.6,0.4"`, or `"none"` (no watermark).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSpec {
    pub delta_coarse: f64,
    pub fine: FineStep,
}

impl ParamSpec {
    pub fn parse(s: &str) -> Result<Self, LabError> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| LabError::usage(format!("lattice parameters look like \"1.6,auto\", got {s:?}")))?;
        let delta_coarse = parse_real(a)?;
        let fine = if b.trim().eq_ignore_ascii_case("auto") {
            FineStep::Auto
        } else {
            FineStep::Value(parse_real(b)?)
        };
        Ok(Self { delta_coarse, fine })
    }

    pub fn resolve(&self, kappa: Option<u32>) -> Result<LatticeParams, LabError> {
        let kappa = kappa.unwrap_or(DEFAULT_KAPPA);
        let fine = match self.fine {
            FineStep::Value(v) => v,
            FineStep::Auto => {
                if !self.delta_coarse.is_finite() {
                    return Err(Error::NoSolution {
                        sigma_sq_at_zero: ssb_core::lattice::sign_lattice_moments().sigma_sq,
                    }
                    .into());
                }
                solve_perfect_security_delta_with_kappa(self.delta_coarse, kappa)?
            }
        };
        Ok(LatticeParams::new(self.delta_coarse, fine, kappa)?)
    }
}

/// Either lattice parameters or no watermark at all.
pub fn parse_optional_params(s: &str) -> Result<Option<ParamSpec>, LabError> {
    if s.trim().eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        ParamSpec::parse(s).map(Some)
    }
}

/// A bit string such as `0110`, ignoring spaces and commas.
pub fn parse_bits(s: &str) -> Result<Bits, LabError> {
    let bits: Result<Bits, LabError> = s
        .chars()
        .filter(|c| !matches!(c, ' ' | ',' | '_'))
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(LabError::usage(format!("bit strings hold only 0 and 1, got {c:?}"))),
        })
        .collect();
    let bits = bits?;
    if bits.is_empty() {
        return Err(LabError::usage("empty bit string"));
    }
    Ok(bits)
}

pub fn format_bits(bits: &[u8]) -> String {
    bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect()
}

/// A sample count, either absolute (`5120`) or relative to the latent
/// dimension (`10L`, `0.5L`).
pub fn parse_count(s: &str, latent_dim: usize) -> Result<usize, LabError> {
    let t = s.trim();
    let n = if let Some(mult) = t.strip_suffix(['L', 'l']) {
        let m: f64 = mult.trim().parse().map_err(|_| LabError::usage(format!("bad sample count {s:?}")))?;
        (m * latent_dim as f64).round()
    } else {
        t.parse::<f64>().map_err(|_| LabError::usage(format!("bad sample count {s:?}")))?
    };
    if !(n >= 1.0) || n.fract() != 0.0 {
        return Err(LabError::usage(format!("sample count must be a positive integer, got {s:?}")));
    }
    Ok(n as usize)
}

/// Comma-separated reals.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, LabError> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_real).collect()
}

/// Redundancy applied before embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeSpec {
    None,
    Repetition(usize),
}

impl CodeSpec {
    pub fn parse(s: &str) -> Result<Self, LabError> {
        let t = s.trim().to_ascii_lowercase();
        if t == "none" {
            return Ok(CodeSpec::None);
        }
        if let Some(r) = t.strip_prefix("repetition:") {
            let r: usize = r.parse().map_err(|_| LabError::usage(format!("bad repetition factor in {s:?}")))?;
            ssb_core::codes::RepetitionCode::new(r)?;
            return Ok(CodeSpec::Repetition(r));
        }
        Err(LabError::usage(format!("codes are \"none\" or \"repetition:R\", got {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params() {
        let p = ParamSpec::parse("inf,inf").unwrap().resolve(None).unwrap();
        assert!(p.is_sign());
        let p = ParamSpec::parse("1.6,0").unwrap().resolve(None).unwrap();
        assert_eq!(p.delta_fine(), 0.0);
        let p = ParamSpec::parse("1.6, auto").unwrap().resolve(None).unwrap();
        assert!(p.delta_fine() > 0.2 && p.delta_fine() < 0.3);
        assert!(ParamSpec::parse("1.6").is_err());
        assert!(ParamSpec::parse("1.6,2.0").unwrap().resolve(None).is_err());
        assert!(ParamSpec::parse("3,auto").unwrap().resolve(None).is_err());
        assert_eq!(parse_optional_params("none").unwrap(), None);
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("10L", 512).unwrap(), 5120);
        assert_eq!(parse_count("0.5L", 512).unwrap(), 256);
        assert_eq!(parse_count("300", 512).unwrap(), 300);
        assert!(parse_count("0", 512).is_err());
        assert!(parse_count("xL", 512).is_err());
    }

    #[test]
    fn bits_and_codes() {
        assert_eq!(parse_bits("01 1,0").unwrap(), vec![0, 1, 1, 0]);
        assert!(parse_bits("012").is_err());
        assert_eq!(format_bits(&[1, 0, 1]), "101");
        assert_eq!(CodeSpec::parse("repetition:3").unwrap(), CodeSpec::Repetition(3));
        assert!(CodeSpec::parse("repetition:4").is_err());
        assert_eq!(CodeSpec::parse("none").unwrap(), CodeSpec::None);
    }
}
