//! Optional TOML run configuration. Command-line flags override it; unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::LabError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SSB_OUTPUT_DIR";

/// A real number or a keyword such as `"inf"` or `"auto"`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum RealOrWord {
    Real(f64),
    Word(String),
}

impl RealOrWord {
    fn render(&self) -> String {
        match self {
            RealOrWord::Real(v) => v.to_string(),
            RealOrWord::Word(w) => w.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "L")]
    pub latent_dim: Option<usize>,
    pub m_prime: Option<usize>,
    pub delta_coarse: Option<RealOrWord>,
    pub delta_fine: Option<RealOrWord>,
    pub kappa: Option<u32>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    /// Relative widening of the Marchenko-Pastur edges.
    pub outlier_tolerance: Option<f64>,
    /// Absolute tolerance of the flip-probability quadrature.
    pub quadrature_tolerance: Option<f64>,
    pub n_mc: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text)
    }

    /// Lattice parameters in `"coarse,fine"` form, if both are set.
    pub fn params_spec(&self) -> Result<Option<String>, LabError> {
        match (&self.delta_coarse, &self.delta_fine) {
            (Some(c), Some(f)) => Ok(Some(format!("{},{}", c.render(), f.render()))),
            (None, None) => Ok(None),
            _ => Err(LabError::usage("config must set both delta_coarse and delta_fine")),
        }
    }
}

/// Resolves a relative output path against the configured output directory
/// (config first, then the environment), else the working directory.
pub fn resolve_output(path: &Path, config: &RunConfig) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    let base = config
        .output_path
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
    match base {
        Some(dir) => dir.join(path),
        None => path.to_path_buf(),
    }
}
