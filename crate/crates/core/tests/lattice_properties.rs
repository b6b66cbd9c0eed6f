use proptest::prelude::*;
use ssb_core::lattice::{
    bit_sign, covering_kappa, embedding_moments, lattice_decide, sample_watermark, LatticeParams,
};
use ssb_core::RngStream;

fn params_strategy() -> impl Strategy<Value = LatticeParams> {
    prop_oneof![
        Just(LatticeParams::sign()),
        (0.1f64..5.0, 0.0f64..=1.0)
            .prop_map(|(d, r)| LatticeParams::new(d, r * d, covering_kappa(d)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decode_what_you_sample(
        params in params_strategy(),
        codeword in prop::collection::vec(0u8..=1, 1..64),
        seed in any::<u64>(),
    ) {
        let w = sample_watermark(&params, &codeword, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert_eq!(lattice_decide(&w, params.delta_coarse()), codeword);
    }

    #[test]
    fn huge_step_acts_as_sign(x in -10.0f64..10.0) {
        prop_assume!(x != 0.0);
        prop_assert_eq!(lattice_decide(&[x], 1e6), lattice_decide(&[x], f64::INFINITY));
    }
}

/// Sample mean and variance of sign(c) z, with standard errors.
fn unsigned_stats(params: &LatticeParams, n: usize, seed: u64) -> (f64, f64, f64, f64) {
    let codeword: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let w = sample_watermark(params, &codeword, &mut RngStream::new(seed, 11)).unwrap();
    let u: Vec<f64> = w.iter().zip(&codeword).map(|(x, &c)| bit_sign(c) * x).collect();
    let nf = n as f64;
    let mean = u.iter().sum::<f64>() / nf;
    let m2 = u.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m4 = u.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    (mean, (m2 / nf).sqrt(), m2, ((m4 - m2 * m2) / nf).sqrt())
}

#[test]
fn moments_match_simulation() {
    let n = 400_000;
    let mut seed = 0;
    for delta in [0.4, 0.8, 1.6, 3.2, f64::INFINITY] {
        let fines: Vec<f64> = if delta.is_finite() {
            vec![0.0, delta / 2.0, delta]
        } else {
            vec![f64::INFINITY]
        };
        for fine in fines {
            seed += 1;
            let params = LatticeParams::new(delta, fine, covering_kappa(delta)).unwrap();
            let m = embedding_moments(&params).unwrap();
            let (mean, se_mean, var, se_var) = unsigned_stats(&params, n, seed);
            assert!((mean - m.mu).abs() <= 4.0 * se_mean, "({delta},{fine}) mean {mean} vs {}", m.mu);
            // Point masses have zero variance spread; allow float noise.
            let tol = (4.0 * se_var).max(1e-12);
            assert!((var - m.sigma_sq).abs() <= tol, "({delta},{fine}) var {var} vs {}", m.sigma_sq);
        }
    }
}

#[test]
fn fine_step_limits() {
    for delta in [0.4, 0.8, 1.6, 3.2] {
        let k = covering_kappa(delta);
        let full = embedding_moments(&LatticeParams::new(delta, delta, k).unwrap()).unwrap();
        // Full-coarse-cell oracle: truncated moments on [a_k, b_k].
        let (mut mu, mut second) = (0.0, 0.0);
        let mut total = 0.0;
        for j in -(k as i64)..=(k as i64) {
            let a = 2.0 * j as f64 * delta;
            let b = a + delta;
            let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
            let z = ssb_core::numerics::normal_interval_mass(a, b);
            if z < 1e-300 {
                continue;
            }
            let w = 2.0 * z;
            total += w;
            mu += w * (phi(a) - phi(b)) / z;
            second += w * (1.0 - (b * phi(b) - a * phi(a)) / z);
        }
        mu /= total;
        second /= total;
        assert!((full.mu - mu).abs() < 1e-9);
        assert!((full.sigma_sq - (second - mu * mu)).abs() < 1e-9);

        let zero = embedding_moments(&LatticeParams::new(delta, 0.0, k).unwrap()).unwrap();
        let tiny = embedding_moments(&LatticeParams::new(delta, 1e-6, k).unwrap()).unwrap();
        assert!((zero.mu - tiny.mu).abs() < 1e-3);
        assert!((zero.sigma_sq - tiny.sigma_sq).abs() < 1e-3);
    }
}
