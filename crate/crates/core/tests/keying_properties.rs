use proptest::prelude::*;
use ssb_core::keying::{decode, derive_carrier, embed_latent, project_to_watermark, SecretKey};
use ssb_core::lattice::{covering_kappa, embedding_moments, sample_watermark, solve_perfect_security_delta, LatticeParams};
use ssb_core::numerics::std_normal_cdf;
use ssb_core::security::{empirical_covariance, theoretical_latent_covariance};
use ssb_core::RngStream;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn noiseless_roundtrip(
        key_bytes in any::<[u8; 32]>(),
        l in 1usize..48,
        frac in 0.0f64..=1.0,
        delta in prop_oneof![Just(f64::INFINITY), 0.2f64..4.0],
        ratio in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let m = ((l as f64 * frac).ceil() as usize).clamp(1, l);
        let key = SecretKey::new(key_bytes, l, m).unwrap();
        let u = derive_carrier(&key).unwrap();
        prop_assert!(u.orthonormality_error() < 1e-9);
        let params = if delta.is_finite() {
            LatticeParams::new(delta, ratio * delta, covering_kappa(delta)).unwrap()
        } else {
            LatticeParams::sign()
        };
        let mut rng = RngStream::new(seed, 3);
        let c: Vec<u8> = (0..m).map(|_| rng.bit()).collect();
        let w = sample_watermark(&params, &c, &mut rng).unwrap();
        let z = embed_latent(&u, &w, &mut rng).unwrap();
        let back = project_to_watermark(&u, &z).unwrap();
        for (a, b) in back.iter().zip(w.iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert_eq!(decode(&u, &z, params.delta_coarse()).unwrap(), c);
    }
}

#[test]
fn carriers_are_spread() {
    for seed in 0..100 {
        let key = SecretKey::generate(512, 256, &mut RngStream::new(seed, 5)).unwrap();
        let u = derive_carrier(&key).unwrap();
        assert_eq!(u.nonce(), 0, "seed {seed} needed a redraw");
        for j in 0..256 {
            assert!(u.column(j).iter().all(|x| x.abs() < 0.9));
        }
    }
}

/// Kolmogorov-Smirnov statistic of `xs` against N(0, 1).
fn ks_normal(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn projected_noise_is_standard_normal() {
    let (l, m, n) = (32, 4, 100_000);
    let key = SecretKey::generate(l, m, &mut RngStream::new(1, 0)).unwrap();
    let u = derive_carrier(&key).unwrap();
    let mut rng = RngStream::new(1, 1);
    let mut coords = vec![Vec::with_capacity(n); m];
    for _ in 0..n {
        let z: Vec<f64> = (0..l).map(|_| rng.standard_normal()).collect();
        for (j, v) in project_to_watermark(&u, &z).unwrap().iter().enumerate() {
            coords[j].push(*v);
        }
    }
    for xs in coords {
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
        assert!(mean.abs() < 4.0 / nf.sqrt());
        assert!((var - 1.0).abs() < 4.0 * (2.0 / nf).sqrt());
        // 0.01 critical value of sqrt(n) D.
        assert!(nf.sqrt() * ks_normal(xs) < 1.628);
    }
}

#[test]
fn decoded_noise_bits_are_fair() {
    let (l, m, n) = (64, 8, 10_000);
    let key = SecretKey::generate(l, m, &mut RngStream::new(2, 0)).unwrap();
    let u = derive_carrier(&key).unwrap();
    let mut rng = RngStream::new(2, 1);
    let mut ones = vec![0usize; m];
    for _ in 0..n {
        let z: Vec<f64> = (0..l).map(|_| rng.standard_normal()).collect();
        for (j, b) in decode(&u, &z, 1.6).unwrap().iter().enumerate() {
            ones[j] += *b as usize;
        }
    }
    let bound = 3.0 * (0.25 / n as f64).sqrt();
    for c in ones {
        assert!((c as f64 / n as f64 - 0.5).abs() <= bound);
    }
}

#[test]
fn latent_covariance_law() {
    let (l, m) = (64, 24);
    let params = LatticeParams::sign();
    let key = SecretKey::generate(l, m, &mut RngStream::new(3, 0)).unwrap();
    let u = derive_carrier(&key).unwrap();
    let mut rng = RngStream::new(3, 1);
    let c: Vec<u8> = (0..m).map(|_| rng.bit()).collect();
    let samples: Vec<_> = (0..10 * l)
        .map(|_| {
            let w = sample_watermark(&params, &c, &mut rng).unwrap();
            embed_latent(&u, &w, &mut rng).unwrap()
        })
        .collect();
    let emp = empirical_covariance(&samples, true).unwrap();
    let sigma_sq = embedding_moments(&params).unwrap().sigma_sq;
    let theory = theoretical_latent_covariance(&u, sigma_sq);
    let frob = emp.iter().zip(&theory).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(frob <= 0.15 * l as f64, "{frob}");
}

#[test]
fn perfect_security_latents_have_unit_energy() {
    let (l, m) = (4096, 2048);
    let fine = solve_perfect_security_delta(1.6).unwrap();
    let params = LatticeParams::new(1.6, fine, 10).unwrap();
    // Unit variance in the carrier span, but the signed mean adds mu^2 to
    // the second moment there.
    let mu = embedding_moments(&params).unwrap().mu;
    let expected = 1.0 + (m as f64 / l as f64) * mu * mu;
    let key = SecretKey::generate(l, m, &mut RngStream::new(4, 0)).unwrap();
    let u = derive_carrier(&key).unwrap();
    let mut rng = RngStream::new(4, 1);
    let mut total = 0.0;
    for _ in 0..100 {
        let c: Vec<u8> = (0..m).map(|_| rng.bit()).collect();
        let w = sample_watermark(&params, &c, &mut rng).unwrap();
        let z = embed_latent(&u, &w, &mut rng).unwrap();
        let energy = z.iter().map(|x| x * x).sum::<f64>() / l as f64;
        total += energy;
    }
    let mean = total / 100.0;
    assert!((mean - expected).abs() <= 0.05, "{mean} vs {expected}");
}
