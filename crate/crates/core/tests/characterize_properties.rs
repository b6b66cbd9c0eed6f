use ssb_core::channel::flip_probability_theoretical;
use ssb_core::characterize::{
    default_delta_grid, default_fine_fraction_grid, default_schemes, fidelity_per_element, sweep_surface,
    validate_system, NoiseLevel,
};
use ssb_core::lattice::{covering_kappa, LatticeParams};
use ssb_core::numerics::QuadratureSpec;
use ssb_core::RngStream;

#[test]
fn fidelity_is_nonnegative_on_the_sweep() {
    let rows = sweep_surface(&default_delta_grid(), &default_fine_fraction_grid(), 0.5, 0.42, &QuadratureSpec::default()).unwrap();
    for r in rows {
        assert!(r.fidelity_per_element.unwrap() >= 0.0, "{r:?}");
        let c = r.capacity.unwrap();
        assert!((0.0..=1.0).contains(&c));
    }
}

#[test]
fn small_steps_trade_capacity_for_fidelity() {
    // Along delta_fine = delta, shrinking the coarse step drives the
    // watermark toward the plain Gaussian (fidelity -> 0) while the flip
    // probability at fixed noise rises.
    let quad = QuadratureSpec::default();
    let sigma = 0.42;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..50 {
        let delta = 4.0 - (4.0 - 0.1) * i as f64 / 49.0;
        let params = LatticeParams::new(delta, delta, covering_kappa(delta)).unwrap();
        let f = fidelity_per_element(&params).unwrap();
        let p = flip_probability_theoretical(&params, sigma, &quad).unwrap();
        if let Some((pf, pp)) = prev {
            assert!(f <= pf + 1e-12, "fidelity at {delta}: {f} > {pf}");
            assert!(p >= pp - 1e-12, "p at {delta}: {p} < {pp}");
        }
        prev = Some((f, p));
    }
    let (f, _) = prev.unwrap();
    assert!(f < 1e-3);
}

#[test]
fn vanishing_noise_gives_full_capacity() {
    let rows = sweep_surface(&default_delta_grid(), &default_fine_fraction_grid(), 0.5, 1e-9, &QuadratureSpec::default()).unwrap();
    for r in rows {
        assert!(r.capacity.unwrap() > 1.0 - 1e-5, "{r:?}");
    }
}

#[test]
fn validation_is_deterministic() {
    let schemes = default_schemes(256, 128, 32).unwrap();
    let levels = [NoiseLevel::new("sigma=1", 1.0), NoiseLevel::new("Sana/Identity", 0.21f64.sqrt())];
    let quad = QuadratureSpec::default();
    let a = validate_system(&schemes, &levels, 10_000, &RngStream::new(8, 0), &quad).unwrap();
    let b = validate_system(&schemes, &levels, 10_000, &RngStream::new(8, 0), &quad).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
    let sign = &a[0];
    assert!((sign.p_theory.unwrap() - 0.25).abs() < 1e-9);
    assert!((sign.p_empirical.unwrap() - 0.25).abs() <= 4.0 * sign.stderr.unwrap());
    assert!(a[2].eta.is_infinite() || a[2].eta > 0.0);
    assert!(a[3].eta.is_infinite());
    assert_eq!(a[1].noise, "Sana/Identity");
    assert_eq!(a[6].eta, 1.0 / 256.0);
    assert!(a[6].p_theory.is_none());
}
