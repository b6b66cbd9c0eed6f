use std::path::Path;
use std::process::Command;

use ssb_lab::cli::run;
use ssb_lab::keyfile::KeyFile;
use ssb_lab::latent::{read_latent, read_latent_file, write_latent};
use ssb_lab::reports::{read_carrier, ATTACK_HEADER, CHARACTERISTIC_HEADER, SURFACE_HEADER, VALIDATION_HEADER};
use ssb_lab::{LabError, EXIT_USAGE};

fn ssb(args: &[&str]) -> Result<String, LabError> {
    let mut out = Vec::new();
    run(std::iter::once("ssb").chain(args.iter().copied()), &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn csv_body(text: &str) -> Vec<Vec<String>> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn keygen(dir: &Path, name: &str, l: usize, m: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(name);
    ssb(&["keygen", "--L", &l.to_string(), "--m-prime", &m.to_string(), "--seed", &seed.to_string(), "--out", p(&path)]).unwrap();
    path
}

#[test]
fn seeded_keygen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = keygen(dir.path(), "a.json", 64, 16, 5);
    let b = keygen(dir.path(), "b.json", 64, 16, 5);
    let c = keygen(dir.path(), "c.json", 64, 16, 6);
    let (a, b, c) = (KeyFile::read(&a).unwrap(), KeyFile::read(&b).unwrap(), KeyFile::read(&c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a.key_hex, c.key_hex);
    assert_eq!((a.latent_dim, a.m_prime), (64, 16));
}

#[test]
fn embed_decode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let key = keygen(dir.path(), "k.json", 128, 32, 1);
    let bits = "01101001110010100101100011110000";
    let z = dir.path().join("z.bin");
    for params in ["inf,inf", "1.6,auto", "0.8,0.2", "1.2,0"] {
        ssb(&["embed", "--key", p(&key), "--codeword", bits, "--params", params, "--seed", "9", "--out", p(&z)]).unwrap();
        assert_eq!(read_latent_file(&z).unwrap().len(), 128);
        let out = ssb(&["decode", "--key", p(&key), "--latent", p(&z), "--params", params, "--reference", bits, "--json"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["codeword"], bits, "{params}");
        assert_eq!(v["bit_accuracy"], 1.0);
    }
}

#[test]
fn repetition_code_absorbs_noise() {
    let dir = tempfile::tempdir().unwrap();
    let key = keygen(dir.path(), "k.json", 256, 112, 2);
    let message = "1011001110001111";
    let z = dir.path().join("z.bin");
    ssb(&[
        "embed", "--key", p(&key), "--message", message, "--code", "repetition:7", "--params", "inf,inf", "--sigma", "0.3",
        "--seed", "4", "--out", p(&z),
    ])
    .unwrap();
    let out = ssb(&[
        "decode", "--key", p(&key), "--latent", p(&z), "--params", "inf,inf", "--code", "repetition:7", "--reference", message,
        "--json",
    ])
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["message"], message);
}

#[test]
fn wrong_key_decodes_at_chance() {
    let dir = tempfile::tempdir().unwrap();
    let key = keygen(dir.path(), "k.json", 512, 256, 3);
    let other = keygen(dir.path(), "o.json", 512, 256, 4);
    let bits: String = (0..256).map(|i| if (i * 7 + i / 3) % 2 == 0 { '0' } else { '1' }).collect();
    let z = dir.path().join("z.bin");
    ssb(&["embed", "--key", p(&key), "--codeword", &bits, "--seed", "1", "--out", p(&z)]).unwrap();
    let out = ssb(&["decode", "--key", p(&other), "--latent", p(&z), "--reference", &bits, "--json"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let acc = v["bit_accuracy"].as_f64().unwrap();
    assert!((acc - 0.5).abs() < 0.12, "{acc}");
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let key = keygen(dir.path(), "k.json", 32, 8, 1);
    let z = dir.path().join("z.bin");
    let e = ssb(&["keygen", "--L", "8", "--m-prime", "9", "--out", p(&dir.path().join("x.json"))]).unwrap_err();
    assert_eq!(e.exit_code(), EXIT_USAGE);
    let e = ssb(&["embed", "--key", p(&key), "--codeword", "0101", "--out", p(&z)]).unwrap_err();
    assert_eq!(e.exit_code(), EXIT_USAGE);
    let e = ssb(&["embed", "--key", p(&key), "--codeword", "01010101", "--params", "inf,auto", "--out", p(&z)]).unwrap_err();
    assert_eq!(e.exit_code(), EXIT_USAGE);
    assert!(ssb(&["frobnicate"]).is_err());
    assert!(ssb(&["--help"]).unwrap().contains("keygen"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ssb");
    let dir = tempfile::tempdir().unwrap();
    let st = Command::new(bin)
        .args(["keygen", "--L", "4", "--m-prime", "8", "--out"])
        .arg(dir.path().join("k.json"))
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&st.stderr).contains("m'"));
    let st = Command::new(bin).args(["sweep", "--deltas", "1.0", "--fractions", "0.5"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}

#[test]
fn characteristic_schema_and_determinism() {
    let args = ["characteristic", "--params", "1.6,auto", "--sigma", "0.21,0.42,1.0", "--n-mc", "20000", "--seed", "3"];
    let a = ssb(&args).unwrap();
    assert_eq!(a, ssb(&args).unwrap());
    assert!(a.starts_with('#'));
    let rows = csv_body(&a);
    assert_eq!(rows[0], CHARACTERISTIC_HEADER);
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        let theory: f64 = r[3].parse().unwrap();
        let mc: f64 = r[4].parse().unwrap();
        let se: f64 = r[5].parse().unwrap();
        assert!((theory - mc).abs() <= 4.0 * se.max(1e-4), "{r:?}");
    }
    let theory_only = ssb(&["characteristic", "--params", "inf,inf", "--preset", "Sana/Identity", "--n-mc", "0"]).unwrap();
    let rows = csv_body(&theory_only);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][4], "");
    assert!((rows[1][2].parse::<f64>().unwrap() - 0.21f64.sqrt()).abs() < 1e-12);
}

#[test]
fn sweep_schema() {
    let out = ssb(&["sweep", "--alpha", "0.5", "--sigma", "0.42"]).unwrap();
    let rows = csv_body(&out);
    assert_eq!(rows[0], SURFACE_HEADER);
    assert_eq!(rows.len(), 1 + 20 * 5 + 1);
    assert!(out.lines().any(|l| l.starts_with("# grid:")));
    let last = rows.last().unwrap();
    assert_eq!((last[0].as_str(), last[1].as_str()), ("inf", "inf"));
}

#[test]
fn attack_schema_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("h.csv");
    let args = [
        "attack", "--params", "none", "--L", "64", "--m-prime", "16", "--N", "20L", "--trials", "2", "--spoof-trials", "20",
        "--seed", "1", "--histogram", p(&hist), "--bins", "10",
    ];
    let a = ssb(&args).unwrap();
    assert_eq!(a, ssb(&args).unwrap());
    let rows = csv_body(&a);
    assert_eq!(rows[0], ATTACK_HEADER);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "1280");
    assert_eq!(rows[1][3], "");
    let h = csv_body(&std::fs::read_to_string(&hist).unwrap());
    assert_eq!(h.len(), 11);
    let total: u64 = h[1..].iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 64);
}

#[test]
fn validate_schema() {
    let out = ssb(&["validate", "--L", "64", "--m-prime", "32", "--n-mc", "10000", "--sigma", "0.42", "--preset", "Sana/JPEG QF50"])
        .unwrap();
    assert!(out.starts_with("# AWGN analog"));
    let rows = csv_body(&out);
    assert_eq!(rows[0], VALIDATION_HEADER);
    assert_eq!(rows.len(), 1 + 4 * 2);
    assert!(rows.iter().any(|r| r[9] == "Sana/JPEG QF50"));
}

#[test]
fn carrier_csv_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let key = keygen(dir.path(), "k.json", 96, 24, 11);
    let out = ssb(&["export-carrier", "--key", p(&key)]).unwrap();
    let u = read_carrier(out.as_bytes()).unwrap();
    assert_eq!((u.latent_dim(), u.codeword_len()), (96, 24));
    assert!(u.orthonormality_error() < 1e-12);
    let original = ssb_core::keying::derive_carrier(&KeyFile::read(&key).unwrap().to_key().unwrap()).unwrap();
    for r in 0..96 {
        for c in 0..24 {
            assert!((u.get(r, c) - original.get(r, c)).abs() < 1e-12);
        }
    }
}

#[test]
fn latent_format_rejects_damage() {
    let z = [0.5, -1.25, 3.0];
    let mut buf = Vec::new();
    write_latent(&mut buf, &z).unwrap();
    assert_eq!(&read_latent(&buf[..]).unwrap()[..], &z);
    assert!(read_latent(&buf[..buf.len() - 1]).is_err());
    let mut extra = buf.clone();
    extra.push(0);
    assert!(read_latent(&extra[..]).is_err());
    let mut bad = buf.clone();
    bad[0] = b'X';
    assert!(read_latent(&bad[..]).is_err());
}

#[test]
fn scenario_json_and_audit() {
    let out = ssb(&["scenario", "--users", "20", "--images", "100", "--sigma", "0", "--json"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["attribution_accuracy"], 1.0);
    assert_eq!(v["audit_passed"], true);
    let out = ssb(&["scenario", "--users", "20", "--images", "100", "--inject-duplicates", "2", "--json"]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["audit_passed"], false);
    assert_eq!(v["reused_seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("L = 48\nm_prime = 12\nseed = 7\noutput_path = \"{}\"\n", p(dir.path()))).unwrap();
    ssb(&["--config", p(&cfg), "keygen", "--out", "key.json"]).unwrap();
    let k = KeyFile::read(&dir.path().join("key.json")).unwrap();
    assert_eq!((k.latent_dim, k.m_prime), (48, 12));
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(ssb(&["--config", p(&cfg), "sweep"]).unwrap_err().exit_code(), EXIT_USAGE);
}
