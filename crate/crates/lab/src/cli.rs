//! The `ssb` command-line tool.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use ssb_core::channel::{channel_curve, lookup_preset_name, preset_table};
use ssb_core::characterize::{
    default_delta_grid, default_fine_fraction_grid, default_schemes, sweep_surface, validate_system, NoiseLevel,
};
use ssb_core::codes::RepetitionCode;
use ssb_core::keying::{decode, derive_carrier, embed_latent};
use ssb_core::lattice::{sample_watermark, LatticeParams};
use ssb_core::numerics::QuadratureSpec;
use ssb_core::scenario::{run_scenario, ScenarioConfig};
use ssb_core::security::{histogram, run_attack, AttackConfig, SpectrumOptions, DEFAULT_OUTLIER_TOLERANCE};
use ssb_core::{RngStream, SecretKey};

use crate::config::{resolve_output, RunConfig};
use crate::keyfile::{fingerprint, KeyFile};
use crate::latent::{read_latent_file, write_latent_file};
use crate::parse::{format_bits, parse_bits, parse_count, parse_optional_params, parse_real_list, CodeSpec, ParamSpec};
use crate::reports::{self, AttackRecord};
use crate::LabError;

const STREAM_KEYGEN: u64 = 1;
const STREAM_EMBED: u64 = 2;
const STREAM_CHARACTERISTIC: u64 = 3;
const STREAM_ATTACK: u64 = 4;
const STREAM_VALIDATE: u64 = 5;
const STREAM_SCENARIO: u64 = 6;

const DEFAULT_PARAMS: &str = "1.6,auto";

#[derive(Debug, Parser)]
#[command(name = "ssb", version, about = "Seed-based nested-lattice watermarking lab")]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a secret key file.
    Keygen(KeygenArgs),
    /// Embed a codeword (or an encoded message) into a fresh latent.
    Embed(EmbedArgs),
    /// Decode a latent file.
    Decode(DecodeArgs),
    /// Flip probability versus noise level, theory and simulation.
    Characteristic(CharacteristicArgs),
    /// Capacity, fidelity and security over a lattice-parameter grid.
    Sweep(SweepArgs),
    /// Spectral key-recovery attack and spoofing.
    Attack(AttackArgs),
    /// Theory-versus-simulation report for the standard schemes.
    Validate(ValidateArgs),
    /// Multi-user attribution simulation.
    Scenario(ScenarioArgs),
    /// Write the carrier matrix of a key as CSV.
    ExportCarrier(ExportCarrierArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long = "L")]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub m_prime: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub key: PathBuf,
    /// Codeword bits, e.g. 0110.
    #[arg(long, conflicts_with = "message")]
    pub codeword: Option<String>,
    /// Message bits, encoded with --code first.
    #[arg(long)]
    pub message: Option<String>,
    /// `none` or `repetition:R`.
    #[arg(long, default_value = "none")]
    pub code: String,
    /// `coarse,fine`, e.g. `inf,inf`, `1.6,auto`, `1.6,0.4`.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub kappa: Option<u32>,
    /// Standard deviation of channel noise added to the latent.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub latent: PathBuf,
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub kappa: Option<u32>,
    #[arg(long, default_value = "none")]
    pub code: String,
    /// Expected bits (the message when a code is given, else the codeword).
    #[arg(long)]
    pub reference: Option<String>,
    /// Print a JSON object instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CharacteristicArgs {
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub kappa: Option<u32>,
    /// Comma-separated noise standard deviations.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Noise preset `model/transform`; its variance sets sigma. Repeatable.
    #[arg(long)]
    pub preset: Vec<String>,
    /// Monte Carlo trials per point; 0 for theory only.
    #[arg(long)]
    pub n_mc: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Comma-separated coarse steps (default 0.2..4.0 by 0.2 and inf).
    #[arg(long)]
    pub deltas: Option<String>,
    /// Comma-separated fine-to-coarse ratios (default 0,0.25,0.5,0.75,1).
    #[arg(long)]
    pub fractions: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Lattice parameters of the observed content, or `none`.
    #[arg(long, default_value = "inf,inf")]
    pub params: String,
    #[arg(long)]
    pub kappa: Option<u32>,
    #[arg(long = "L")]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub m_prime: Option<usize>,
    /// Observed samples, absolute or as a multiple of L (`10L`).
    #[arg(long = "N", default_value = "10L")]
    pub n_samples: String,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 200)]
    pub spoof_trials: usize,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Use the uncentered second-moment matrix.
    #[arg(long)]
    pub uncentered: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a spectrum histogram of the first trial.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "L")]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub m_prime: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub message_bits: u64,
    #[arg(long)]
    pub n_mc: Option<u64>,
    /// Comma-separated literal noise standard deviations.
    #[arg(long)]
    pub sigma: Option<String>,
    /// Noise preset `model/transform`; repeatable. Default: all presets.
    #[arg(long)]
    pub preset: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long, default_value_t = 100)]
    pub users: u64,
    #[arg(long, default_value_t = 1000)]
    pub images: u64,
    #[arg(long, conflicts_with = "preset")]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long)]
    pub kappa: Option<u32>,
    /// Code rate as a fraction of capacity.
    #[arg(long, default_value_t = 0.8)]
    pub margin: f64,
    #[arg(long, default_value_t = 32)]
    pub message_bits: usize,
    #[arg(long = "L")]
    pub latent_dim: Option<usize>,
    /// Reuse earlier seeds for this many images, to exercise the audit.
    #[arg(long, default_value_t = 0)]
    pub inject_duplicates: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportCarrierArgs {
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing normal output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), LabError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}").map_err(stdout_error)?;
                return Ok(());
            }
            return Err(LabError::usage(e.render().to_string()));
        }
    };
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Keygen(a) => keygen(a, &config, out),
        Command::Embed(a) => embed(a, &config, out),
        Command::Decode(a) => decode_cmd(a, &config, out),
        Command::Characteristic(a) => characteristic(a, &config, out),
        Command::Sweep(a) => sweep(a, &config, out),
        Command::Attack(a) => attack(a, &config, out),
        Command::Validate(a) => validate(a, &config, out),
        Command::Scenario(a) => scenario(a, &config, out),
        Command::ExportCarrier(a) => export_carrier(a, &config, out),
    }
}

fn stdout_error(e: std::io::Error) -> LabError {
    LabError::Io {
        path: "<stdout>".into(),
        message: e.to_string(),
    }
}

fn quad(config: &RunConfig) -> Result<QuadratureSpec, LabError> {
    match config.quadrature_tolerance {
        Some(t) => Ok(QuadratureSpec::new(t, QuadratureSpec::default().max_subdivisions)?),
        None => Ok(QuadratureSpec::default()),
    }
}

fn params_from(cli: Option<&str>, kappa: Option<u32>, config: &RunConfig) -> Result<LatticeParams, LabError> {
    let spec = match cli {
        Some(s) => s.to_string(),
        None => config.params_spec()?.unwrap_or_else(|| DEFAULT_PARAMS.to_string()),
    };
    ParamSpec::parse(&spec)?.resolve(kappa.or(config.kappa))
}

fn entropy_seed() -> Result<u64, LabError> {
    let mut b = [0u8; 8];
    getrandom::fill(&mut b).map_err(|e| LabError::usage(format!("no system entropy: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

/// Explicit seed, then the configured seed, then `fallback`.
fn seed_or(cli: Option<u64>, config: &RunConfig, fallback: impl FnOnce() -> Result<u64, LabError>) -> Result<u64, LabError> {
    match cli.or(config.seed) {
        Some(s) => Ok(s),
        None => fallback(),
    }
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, LabError> {
    v.ok_or_else(|| LabError::usage(format!("missing {what}")))
}

fn create(path: &Path, config: &RunConfig) -> Result<(PathBuf, BufWriter<File>), LabError> {
    let path = resolve_output(path, config);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    let file = File::create(&path).map_err(|e| LabError::io(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

/// Runs `write` against the output file, or `out` when no path is given.
fn emit<F>(path: Option<&Path>, config: &RunConfig, out: &mut dyn Write, write: F) -> Result<(), LabError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), LabError>,
{
    match path {
        Some(p) => {
            let (resolved, mut file) = create(p, config)?;
            write(&mut file)?;
            file.flush().map_err(|e| LabError::io(&resolved, e))
        }
        None => write(out),
    }
}

fn load_key(path: &Path) -> Result<SecretKey, LabError> {
    KeyFile::read(path)?.to_key()
}

fn keygen(a: KeygenArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let l = require(a.latent_dim.or(config.latent_dim), "--L")?;
    let m = require(a.m_prime.or(config.m_prime), "--m-prime")?;
    let mut key = match a.seed.or(config.seed) {
        Some(seed) => SecretKey::generate(l, m, &mut RngStream::new(seed, STREAM_KEYGEN))?,
        None => {
            let mut bytes = [0u8; 32];
            getrandom::fill(&mut bytes).map_err(|e| LabError::usage(format!("no system entropy: {e}")))?;
            SecretKey::new(bytes, l, m)?
        }
    };
    key.nonce = derive_carrier(&key)?.nonce();
    let path = resolve_output(&a.out, config);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    KeyFile::from_key(&key).write(&path)?;
    writeln!(out, "fingerprint: {}", fingerprint(&key)).map_err(stdout_error)?;
    writeln!(out, "key: {}", path.display()).map_err(stdout_error)
}

fn embed(a: EmbedArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let key = load_key(&a.key)?;
    let carrier = derive_carrier(&key)?;
    let params = params_from(a.params.as_deref(), a.kappa, config)?;
    let code = CodeSpec::parse(&a.code)?;
    let codeword = match (&a.codeword, &a.message) {
        (Some(c), None) => {
            if code != CodeSpec::None {
                return Err(LabError::usage("--code applies to --message, not --codeword"));
            }
            parse_bits(c)?
        }
        (None, Some(m)) => {
            let msg = parse_bits(m)?;
            match code {
                CodeSpec::None => msg,
                CodeSpec::Repetition(r) => RepetitionCode::new(r)?.encode(&msg)?,
            }
        }
        _ => return Err(LabError::usage("give exactly one of --codeword and --message")),
    };
    if codeword.len() != key.codeword_len {
        return Err(LabError::usage(format!(
            "the key carries {} bits but {} were given",
            key.codeword_len,
            codeword.len()
        )));
    }
    let seed = seed_or(a.seed, config, entropy_seed)?;
    let mut rng = RngStream::new(seed, STREAM_EMBED);
    let z_u = sample_watermark(&params, &codeword, &mut rng)?;
    let mut z = embed_latent(&carrier, &z_u, &mut rng)?;
    ssb_core::channel::add_awgn(&mut z, a.sigma, &mut rng)?;
    let path = resolve_output(&a.out, config);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    write_latent_file(&path, &z)?;
    writeln!(out, "embedded {} bits into a latent of dimension {}", codeword.len(), z.len()).map_err(stdout_error)?;
    writeln!(out, "latent: {}", path.display()).map_err(stdout_error)
}

fn decode_cmd(a: DecodeArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let key = load_key(&a.key)?;
    let carrier = derive_carrier(&key)?;
    let z = read_latent_file(&a.latent)?;
    if z.len() != key.latent_dim {
        return Err(LabError::usage(format!(
            "latent has dimension {} but the key expects {}",
            z.len(),
            key.latent_dim
        )));
    }
    let params = params_from(a.params.as_deref(), a.kappa, config)?;
    let codeword = decode(&carrier, &z, params.delta_coarse())?;
    let message = match CodeSpec::parse(&a.code)? {
        CodeSpec::None => None,
        CodeSpec::Repetition(r) => Some(RepetitionCode::new(r)?.decode(&codeword)?),
    };
    let decoded = message.as_ref().unwrap_or(&codeword);
    let accuracy = match &a.reference {
        Some(r) => {
            let reference = parse_bits(r)?;
            if reference.len() != decoded.len() {
                return Err(LabError::usage(format!(
                    "reference has {} bits, decoded {}",
                    reference.len(),
                    decoded.len()
                )));
            }
            let same = reference.iter().zip(decoded).filter(|(x, y)| x == y).count();
            Some(same as f64 / reference.len() as f64)
        }
        None => None,
    };
    if a.json {
        let v = json!({
            "version": 1,
            "codeword": format_bits(&codeword),
            "message": message.as_deref().map(format_bits),
            "bit_accuracy": accuracy,
        });
        writeln!(out, "{v}").map_err(stdout_error)
    } else {
        writeln!(out, "codeword: {}", format_bits(&codeword)).map_err(stdout_error)?;
        if let Some(m) = &message {
            writeln!(out, "message: {}", format_bits(m)).map_err(stdout_error)?;
        }
        if let Some(acc) = accuracy {
            writeln!(out, "bit_accuracy: {acc}").map_err(stdout_error)?;
        }
        Ok(())
    }
}

fn params_comment(params: &LatticeParams) -> String {
    format!(
        "lattice: delta={} delta_fine={} kappa={}",
        params.delta_coarse(),
        params.delta_fine(),
        params.kappa()
    )
}

fn preset_levels(names: &[String]) -> Result<Vec<NoiseLevel>, LabError> {
    names
        .iter()
        .map(|n| {
            let p = lookup_preset_name(n).ok_or_else(|| LabError::usage(format!("unknown noise preset {n:?}")))?;
            Ok(NoiseLevel::new(p.name(), p.sigma()))
        })
        .collect()
}

fn characteristic(a: CharacteristicArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let params = params_from(a.params.as_deref(), a.kappa, config)?;
    let mut sigmas = match &a.sigma {
        Some(s) => parse_real_list(s)?,
        None if a.preset.is_empty() => vec![0.21, 0.42, 1.0],
        None => Vec::new(),
    };
    sigmas.extend(preset_levels(&a.preset)?.iter().map(|l| l.sigma));
    let n_mc = a.n_mc.or(config.n_mc).unwrap_or(100_000);
    let seed = seed_or(a.seed, config, || Ok(0))?;
    let points = channel_curve(&params, &sigmas, n_mc, &quad(config)?, &RngStream::new(seed, STREAM_CHARACTERISTIC))?;
    let comments = vec![
        "flip probability of one codeword bit under additive white Gaussian noise".to_string(),
        params_comment(&params),
        format!("monte carlo: n={n_mc} seed={seed}; presets use sigma = sqrt(variance)"),
    ];
    emit(a.out.as_deref(), config, out, |w| {
        reports::write_characteristic(w, &comments, &params, &points)
    })
}

fn sweep(a: SweepArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let deltas = match &a.deltas {
        Some(s) => parse_real_list(s)?,
        None => default_delta_grid(),
    };
    let fractions = match &a.fractions {
        Some(s) => parse_real_list(s)?,
        None => default_fine_fraction_grid(),
    };
    let rows = sweep_surface(&deltas, &fractions, a.alpha, a.sigma, &quad(config)?)?;
    let comments = vec![
        format!("characteristic surface at alpha={} sigma={}", a.alpha, a.sigma),
        format!(
            "grid: delta in {{{}}}, delta_fine/delta in {{{}}}",
            join(&deltas),
            join(&fractions)
        ),
        "fidelity in nats per element; eta = inf means perfect security".to_string(),
    ];
    emit(a.out.as_deref(), config, out, |w| reports::write_surface(w, &comments, &rows))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn attack(a: AttackArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let l = a.latent_dim.or(config.latent_dim).unwrap_or(512);
    let m = a.m_prime.or(config.m_prime).unwrap_or((l / 2).max(1));
    let kappa = a.kappa.or(config.kappa);
    let params = parse_optional_params(&a.params)?.map(|s| s.resolve(kappa)).transpose()?;
    let n = parse_count(&a.n_samples, l)?;
    if n < 2 {
        return Err(LabError::usage("the attack needs at least two samples"));
    }
    let tol = a.tol.or(config.outlier_tolerance).unwrap_or(DEFAULT_OUTLIER_TOLERANCE);
    let seed = seed_or(a.seed, config, || Ok(0))?;
    let base = RngStream::new(seed, STREAM_ATTACK);
    let attack_config = AttackConfig {
        latent_dim: l,
        m_prime: m,
        params,
        n_samples: n,
        spectrum: SpectrumOptions {
            tolerance: tol,
            centered: !a.uncentered,
        },
        spoof_trials: a.spoof_trials,
    };
    let outcomes = (0..a.trials.max(1))
        .map(|t| run_attack(&attack_config, &mut base.split(t)))
        .collect::<Result<Vec<_>, _>>()?;
    let records: Vec<AttackRecord<'_>> = outcomes
        .iter()
        .map(|o| AttackRecord {
            m_prime: m,
            params,
            outcome: o,
        })
        .collect();
    let comments = vec![
        format!(
            "spectral attack: {} covariance, outlier tolerance {tol}, {} spoofing trials per attack",
            if a.uncentered { "uncentered" } else { "centered" },
            a.spoof_trials
        ),
        match &params {
            Some(p) => params_comment(p),
            None => "lattice: none (unwatermarked)".to_string(),
        },
        format!("seed={seed}"),
    ];
    emit(a.out.as_deref(), config, out, |w| reports::write_attack(w, &comments, &records))?;
    if let Some(path) = &a.histogram {
        let s = &outcomes[0].spectrum;
        let hi = s.lambda_max().max(s.mp_upper) * 1.05;
        let bins = histogram(&s.eigenvalues, a.bins, 0.0, hi)?;
        let comments = vec![format!(
            "eigenvalue histogram of trial 0; marchenko-pastur support [{}, {}]",
            s.mp_lower, s.mp_upper
        )];
        emit(Some(path), config, out, |w| reports::write_histogram(w, &comments, &bins))?;
    }
    Ok(())
}

fn validate(a: ValidateArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let l = a.latent_dim.or(config.latent_dim).unwrap_or(256);
    let m = a.m_prime.or(config.m_prime).unwrap_or((l / 2).max(1));
    let n_mc = a.n_mc.or(config.n_mc).unwrap_or(100_000);
    let seed = seed_or(a.seed, config, || Ok(0))?;
    let mut levels = Vec::new();
    if let Some(s) = &a.sigma {
        levels.extend(parse_real_list(s)?.into_iter().map(|x| NoiseLevel::new(format!("sigma={x}"), x)));
    }
    levels.extend(preset_levels(&a.preset)?);
    if levels.is_empty() {
        levels = preset_table().iter().map(|p| NoiseLevel::new(p.name(), p.sigma())).collect();
    }
    let schemes = default_schemes(l, m, a.message_bits)?;
    let rows = validate_system(&schemes, &levels, n_mc, &RngStream::new(seed, STREAM_VALIDATE), &quad(config)?)?;
    let comments = vec![
        "AWGN analog: the empirical track simulates additive white Gaussian noise in watermark space, not diffusion inversion".to_string(),
        format!("L={l} m_prime={m} message_bits={} n_mc={n_mc} seed={seed}", a.message_bits),
        "gaussian-shading rates: best repetition code at message error 1e-6; prc: literature baseline, eta = 1/L only".to_string(),
    ];
    emit(a.out.as_deref(), config, out, |w| reports::write_validation(w, &comments, &rows))
}

fn scenario(a: ScenarioArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let params = params_from(a.params.as_deref(), a.kappa, config)?;
    let (sigma, noise_label) = match (&a.sigma, &a.preset) {
        (Some(s), None) => (*s, format!("sigma={s}")),
        (None, Some(p)) => {
            let preset = lookup_preset_name(p).ok_or_else(|| LabError::usage(format!("unknown noise preset {p:?}")))?;
            (preset.sigma(), preset.name())
        }
        (None, None) => (0.0, "sigma=0".to_string()),
        (Some(_), Some(_)) => return Err(LabError::usage("give --sigma or --preset, not both")),
    };
    let mut cfg = ScenarioConfig::new(params, sigma);
    cfg.n_users = a.users;
    cfg.n_images = a.images;
    cfg.message_bits = a.message_bits;
    cfg.latent_dim = a.latent_dim.or(config.latent_dim).unwrap_or(cfg.latent_dim);
    cfg.rate_margin = a.margin;
    cfg.inject_duplicates = a.inject_duplicates;
    let seed = seed_or(a.seed, config, || Ok(0))?;
    let report = run_scenario(&cfg, &mut RngStream::new(seed, STREAM_SCENARIO))?;
    let v = json!({
        "version": 1,
        "noise": noise_label,
        "sigma": sigma,
        "delta": params.delta_coarse(),
        "delta_fine": params.delta_fine(),
        "n_users": report.n_users,
        "n_images": report.n_images,
        "message_bits": report.message_bits,
        "m_prime": report.m_prime,
        "p_theory": report.p_theory,
        "capacity": report.capacity,
        "code_rate": report.code_rate,
        "correct": report.correct,
        "attribution_accuracy": report.accuracy(),
        "bit_error_rate": report.bit_error_rate(),
        "reused_seeds": report.reused_seeds,
        "audit_passed": report.audit_passed(),
        "seed": seed,
    });
    if let Some(path) = &a.out {
        emit(Some(path), config, out, |w| {
            writeln!(w, "{}", serde_json::to_string_pretty(&v).expect("report serializes")).map_err(stdout_error)
        })?;
    }
    if a.json {
        writeln!(out, "{v}").map_err(stdout_error)
    } else {
        let text = format!(
            "users: {}\nimages: {}\ncodeword bits: {} (rate {:.4}, capacity {:.4}, p {:.6})\nattribution accuracy: {:.4} ({}/{})\nbit error rate: {:.6}\nseed audit: {}\n",
            report.n_users,
            report.n_images,
            report.m_prime,
            report.code_rate,
            report.capacity,
            report.p_theory,
            report.accuracy(),
            report.correct,
            report.n_images,
            report.bit_error_rate(),
            if report.audit_passed() {
                "passed".to_string()
            } else {
                format!("FLAGGED {} reused seed(s)", report.reused_seeds.len())
            }
        );
        out.write_all(text.as_bytes()).map_err(stdout_error)
    }
}

fn export_carrier(a: ExportCarrierArgs, config: &RunConfig, out: &mut dyn Write) -> Result<(), LabError> {
    let key = load_key(&a.key)?;
    let carrier = derive_carrier(&key)?;
    let comments = vec![format!(
        "carrier of key {}: L={} m_prime={} (row-major)",
        fingerprint(&key),
        key.latent_dim,
        key.codeword_len
    )];
    emit(a.out.as_deref(), config, out, |w| reports::write_carrier(w, &comments, &carrier))
}
