//! CSV report schemas. Every file starts with `#` comment lines describing
//! the run, followed by a header row.

use std::io::Write;

use ssb_core::channel::{capacity, CurvePoint};
use ssb_core::characterize::{SurfaceRow, ValidationRow};
use ssb_core::lattice::LatticeParams;
use ssb_core::security::{AttackOutcome, HistogramBin};
use ssb_core::CarrierMatrix;

use crate::LabError;

pub const CHARACTERISTIC_HEADER: [&str; 7] = ["delta", "delta_fine", "sigma", "p_theory", "p_mc", "stderr", "capacity"];
pub const SURFACE_HEADER: [&str; 9] = [
    "delta",
    "delta_fine",
    "alpha",
    "sigma",
    "p",
    "capacity",
    "fidelity_per_element",
    "eta",
    "failure",
];
pub const ATTACK_HEADER: [&str; 12] = [
    "N",
    "L",
    "m_prime",
    "delta",
    "delta_fine",
    "lambda_min",
    "lambda_max",
    "mp_lo",
    "mp_hi",
    "outliers_low",
    "outliers_high",
    "spoof_success_rate",
];
pub const VALIDATION_HEADER: [&str; 11] = [
    "scheme",
    "sigma",
    "p_theory",
    "p_empirical",
    "stderr",
    "rate_theory",
    "rate_empirical",
    "fidelity",
    "eta",
    "noise",
    "failure",
];
pub const HISTOGRAM_HEADER: [&str; 3] = ["bin_lo", "bin_hi", "count"];

/// Shortest round-trip decimal; infinities as `inf`.
pub fn real(v: f64) -> String {
    v.to_string()
}

pub fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

fn writer<W: Write>(mut out: W, comments: &[String], header: &[&str]) -> Result<csv::Writer<W>, LabError> {
    for c in comments {
        writeln!(out, "# {c}").map_err(|e| LabError::io(std::path::Path::new("<output>"), e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<(), LabError> {
    w.flush().map_err(|e| LabError::io(std::path::Path::new("<output>"), e))
}

pub fn write_characteristic<W: Write>(
    out: W,
    comments: &[String],
    params: &LatticeParams,
    points: &[CurvePoint],
) -> Result<(), LabError> {
    let mut w = writer(out, comments, &CHARACTERISTIC_HEADER)?;
    for pt in points {
        w.write_record([
            real(params.delta_coarse()),
            real(params.delta_fine()),
            real(pt.sigma),
            real(pt.p_theory),
            opt_real(pt.simulated.map(|s| s.p)),
            opt_real(pt.simulated.map(|s| s.stderr)),
            real(capacity(pt.p_theory)?),
        ])?;
    }
    finish(w)
}

pub fn write_surface<W: Write>(out: W, comments: &[String], rows: &[SurfaceRow]) -> Result<(), LabError> {
    let mut w = writer(out, comments, &SURFACE_HEADER)?;
    for r in rows {
        w.write_record([
            real(r.delta_coarse),
            real(r.delta_fine),
            real(r.alpha),
            real(r.sigma),
            opt_real(r.p),
            opt_real(r.capacity),
            opt_real(r.fidelity_per_element),
            opt_real(r.eta),
            r.failure.unwrap_or("").to_string(),
        ])?;
    }
    finish(w)
}

/// One attack trial with the lattice parameters it attacked (`None` for
/// unwatermarked content).
pub struct AttackRecord<'a> {
    pub m_prime: usize,
    pub params: Option<LatticeParams>,
    pub outcome: &'a AttackOutcome,
}

pub fn write_attack<W: Write>(out: W, comments: &[String], records: &[AttackRecord<'_>]) -> Result<(), LabError> {
    let mut w = writer(out, comments, &ATTACK_HEADER)?;
    for r in records {
        let s = &r.outcome.spectrum;
        w.write_record([
            s.n_samples.to_string(),
            s.dim.to_string(),
            r.m_prime.to_string(),
            opt_real(r.params.map(|p| p.delta_coarse())),
            opt_real(r.params.map(|p| p.delta_fine())),
            real(s.lambda_min()),
            real(s.lambda_max()),
            real(s.mp_lower),
            real(s.mp_upper),
            s.outliers_low.to_string(),
            s.outliers_high.to_string(),
            real(r.outcome.spoof_success_rate),
        ])?;
    }
    finish(w)
}

pub fn write_validation<W: Write>(out: W, comments: &[String], rows: &[ValidationRow]) -> Result<(), LabError> {
    let mut w = writer(out, comments, &VALIDATION_HEADER)?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            real(r.sigma),
            opt_real(r.p_theory),
            opt_real(r.p_empirical),
            opt_real(r.stderr),
            opt_real(r.rate_theory),
            opt_real(r.rate_empirical),
            opt_real(r.fidelity),
            real(r.eta),
            r.noise.clone(),
            r.failure.unwrap_or("").to_string(),
        ])?;
    }
    finish(w)
}

pub fn write_histogram<W: Write>(out: W, comments: &[String], bins: &[HistogramBin]) -> Result<(), LabError> {
    let mut w = writer(out, comments, &HISTOGRAM_HEADER)?;
    for b in bins {
        w.write_record([real(b.lo), real(b.hi), b.count.to_string()])?;
    }
    finish(w)
}

/// The carrier as a row-major CSV with 17 significant digits.
pub fn write_carrier<W: Write>(out: W, comments: &[String], carrier: &CarrierMatrix) -> Result<(), LabError> {
    let header: Vec<String> = (0..carrier.codeword_len()).map(|j| format!("u{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = writer(out, comments, &header)?;
    for i in 0..carrier.latent_dim() {
        let row: Vec<String> = (0..carrier.codeword_len()).map(|j| format!("{:.16e}", carrier.get(i, j))).collect();
        w.write_record(&row)?;
    }
    finish(w)
}

/// Reads a carrier CSV back into column-major data.
pub fn read_carrier<R: std::io::Read>(input: R) -> Result<CarrierMatrix, LabError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let m = r.headers()?.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| LabError::format(format!("bad carrier entry {s:?}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    let l = rows.len();
    let mut cols = vec![0.0; l * m];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            cols[j * l + i] = *v;
        }
    }
    Ok(CarrierMatrix::from_columns(l, m, cols)?)
}
