use proptest::prelude::*;
use wpsn::peb::{
    concavity_threshold, friis_gain, g_asymptotic, g_asymptotic_derivative, g_hat, g_hat_derivative,
    qualify_gain, ChannelConfig, EstimatorKind, Expectation, MonteCarloGain, PebGainModel,
};
use wpsn::special::gamma_p_inv;
use wpsn::units::{dbm_to_watts, watts_to_dbm};

// central difference with a relative step
fn fd(f: impl Fn(f64) -> f64, p: f64) -> f64 {
    let h = 1e-5 * p;
    (f(p + h) - f(p - h)) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // P is sampled through x = P s / (Nt n) so the curve is never flat to
    // working precision at the sample point.
    #[test]
    fn g_hat_derivative_matches_finite_difference(
        log_x in -4.0f64..2.0,
        nt in 2usize..256,
        log_s in -9.0f64..-3.0,
        log_n in -15.0f64..-9.0,
    ) {
        let (s, n) = (10f64.powf(log_s), 10f64.powf(log_n));
        let p = 10f64.powf(log_x) * nt as f64 * n / s;
        let exact = g_hat_derivative(s, nt, n, p);
        let approx = fd(|q| g_hat(s, nt, n, q), p);
        prop_assert!((approx / exact - 1.0).abs() < 1e-4, "{exact} vs {approx}");
    }

    #[test]
    fn g_asymptotic_derivative_matches_finite_difference(
        log_x in -4.0f64..2.0,
        nt in 1usize..1024,
        log_s in -10.0f64..-4.0,
        log_n in -15.0f64..-9.0,
    ) {
        let (s, n) = (10f64.powf(log_s), 10f64.powf(log_n));
        let p = 10f64.powf(log_x) * nt as f64 * n / s;
        let exact = g_asymptotic_derivative(s, nt, n, p);
        let approx = fd(|q| g_asymptotic(s, nt, n, q), p);
        prop_assert!((approx / exact - 1.0).abs() < 1e-4, "{exact} vs {approx}");
    }

    #[test]
    fn g_hat_is_increasing_concave_and_bounded(
        log_x in -4.0f64..2.0,
        ratio in 1.01f64..100.0,
        nt in 2usize..256,
    ) {
        let (s, n) = (1e-6, 1e-12);
        let p = 10f64.powf(log_x) * nt as f64 * n / s;
        let q = p * ratio;
        prop_assert!(g_hat(s, nt, n, q) > g_hat(s, nt, n, p));
        prop_assert!(g_hat_derivative(s, nt, n, q) < g_hat_derivative(s, nt, n, p));
        prop_assert!(g_hat(s, nt, n, q) <= s);
        prop_assert!(g_hat(s, nt, n, 0.0) >= s / nt as f64 * (1.0 - 1e-12));
    }
}

#[test]
fn friis_matches_decibel_form() {
    // FSPL(dB) = 20 log10(d) + 20 log10(f) + 20 log10(4 pi / c)
    for (f, d) in [(915e6f64, 1.0f64), (915e6, 11.69), (2.4e9, 50.0)] {
        let db = 20.0 * d.log10() + 20.0 * f.log10() + 20.0 * (4.0 * std::f64::consts::PI / 2.998e8).log10();
        let g = friis_gain(f, d).unwrap();
        assert!((-10.0 * g.log10() - db).abs() < 1e-9, "{f} {d}");
    }
    assert!(friis_gain(915e6, 0.0).is_err());
    assert!(friis_gain(-1.0, 1.0).is_err());
}

#[test]
fn chi_square_quantile_reference() {
    // scipy.special.gammaincinv(16, 0.99)
    let q = gamma_p_inv(16.0, 0.99);
    assert!((q - 26.742885918117675).abs() < 1e-8, "{q}");
}

#[test]
fn concavity_threshold_example() {
    let noise = dbm_to_watts(-120.0);
    let q = gamma_p_inv(16.0, 0.99);
    assert!((q - 26.74).abs() < 0.005);

    // received-power threshold P |h|^2 does not depend on the channel
    let h2 = 16e-7;
    let p = concavity_threshold(16, noise, h2);
    let received = watts_to_dbm(p * h2);
    assert!((received - (-89.77)).abs() < 0.01, "{received}");
    let by_hand = (2.0 * 3f64.sqrt() - 1.0) * q * 16.0 * noise;
    assert!((p * h2 / by_hand - 1.0).abs() < 1e-12);

    // with the 70 dB loss applied to |h|^2 as a whole the transmit threshold is about -20 dBm
    let tx = watts_to_dbm(concavity_threshold(16, noise, 1e-7));
    assert!((tx - (-20.0)).abs() < 0.5, "{tx}");
}

fn mc(seed: u64, nt: usize, samples: usize, est: &EstimatorKind) -> MonteCarloGain {
    let cfg = ChannelConfig {
        n_antennas: nt,
        rng_seed: seed,
        ..Default::default()
    };
    MonteCarloGain::new(est, &cfg, 11.69, samples, Expectation::ChannelAndNoise).unwrap()
}

#[test]
fn monte_carlo_is_deterministic() {
    for est in [EstimatorKind::LeastSquares, EstimatorKind::Mmse { covariance: None }] {
        let a = mc(7, 16, 200, &est);
        let b = mc(7, 16, 200, &est);
        let c = mc(8, 16, 200, &est);
        for p in [1e-6, 1e-3, 1.0] {
            assert_eq!(a.gain(p).to_bits(), b.gain(p).to_bits());
            assert_ne!(a.gain(p), c.gain(p));
        }
    }
}

#[test]
fn monte_carlo_respects_ceiling() {
    for est in [EstimatorKind::LeastSquares, EstimatorKind::Mmse { covariance: None }] {
        let g = mc(3, 16, 300, &est);
        for p in [0.0, 1e-6, 1e-3, 1.0] {
            let r = g.sample_ratios(p);
            assert!(r.iter().all(|&x| x > 0.0 && x.is_finite()));
        }
        // |b^H h|^2 / |b|^2 <= |h|^2 per sample, so the mean stays below the plateau
        assert!(g.gain(1.0) <= g.sigma_h2() * (1.0 + 1e-12));
    }
}

#[test]
fn large_array_approaches_asymptotic_gain() {
    // per-element power 1e-8 at this distance
    let lambda = 2.998e8 / 915e6;
    let d = lambda / (4.0 * std::f64::consts::PI * 1e-4);
    let cfg = ChannelConfig {
        n_antennas: 512,
        rng_seed: 1,
        ..Default::default()
    };
    let g = MonteCarloGain::new(&EstimatorKind::LeastSquares, &cfg, d, 300, Expectation::ChannelAndNoise).unwrap();
    let s = friis_gain(915e6, d).unwrap();
    assert!((s / 1e-8 - 1.0).abs() < 1e-9);
    // the LS gain exceeds the limit by a factor 1 + n / (P s); compare where that is small
    for p in [1e-2, 1e-1, 1.0] {
        let a = g_asymptotic(s, 512, 1e-12, p);
        let rel = (g.gain(p) / a - 1.0).abs();
        assert!(rel < 0.03, "P={p}: {rel}");
    }
}

#[test]
fn closed_forms_qualify() {
    let r = PebGainModel::rational(1e-6, 32, 1e-12);
    assert!(qualify_gain(&r, 1.0).passes());
    let a = PebGainModel::asymptotic(1e-8, 512, 1e-12);
    assert!(qualify_gain(&a, 1.0).passes());
}

#[test]
fn noise_only_gain_is_concave_above_threshold() {
    let cfg = ChannelConfig {
        n_antennas: 16,
        noise_power: 1e-15,
        rng_seed: 4,
        ..Default::default()
    };
    let g = MonteCarloGain::new(&EstimatorKind::LeastSquares, &cfg, 11.69, 2000, Expectation::NoiseOnly).unwrap();
    let h2 = g.sigma_h2();
    let p0 = concavity_threshold(16, 1e-15, h2);
    let model = PebGainModel::MonteCarlo(std::sync::Arc::new(g));
    let grid = wpsn::peb::log_grid(p0, p0 * 1e4, 50);
    let rep = wpsn::peb::qualify_gain_on(&model, &grid);
    assert!(rep.concave && rep.bounded, "{rep:?}");
}
