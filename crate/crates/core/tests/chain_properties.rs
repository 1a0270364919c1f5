mod common;

use approx::assert_relative_eq;
use kerr_qnd::analytic::{dns2_coherent, noise_variance_closed_form, with_optimal_angles};
use kerr_qnd::chain::{gain, measurement_error, noise_variance, noise_variance_forward};
use kerr_qnd::ChainConfig;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

#[test]
fn variance_matches_closed_form_on_random_configs() {
    let mut rng = common::rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let cfg = common::random_config(&mut rng);
        let closed = noise_variance_closed_form(&cfg);
        for got in [noise_variance(&cfg).unwrap(), noise_variance_forward(&cfg).unwrap()] {
            worst = worst.max((got - closed).abs() / closed);
        }
    }
    assert!(worst <= 1e-9, "worst relative error {worst:e}");
}

#[test]
fn coherent_reduction() {
    for eta in [0.5, 0.9, 0.99] {
        for k in 0..=8 {
            let n_p = 10f64.powf(4.0 + 0.5 * k as f64);
            let cfg = ChainConfig {
                n_p,
                gamma_x: common::GX,
                gamma_s: common::GS,
                eta,
                r: 0.0,
                theta: 0.0,
                big_r: 0.0,
                phi: 0.0,
                zeta: FRAC_PI_2,
            };
            let coherent = dns2_coherent(n_p, common::GX, common::GS, eta);
            let best = measurement_error(&with_optimal_angles(&cfg)).unwrap().delta_ns;
            assert_relative_eq!(best.powi(2), coherent, max_relative = 1e-9);

            // the plain phase readout keeps the full SPM noise, not just its lossy part
            let phase = measurement_error(&cfg).unwrap().delta_ns;
            let spm = n_p * common::GS.powi(2) / common::GX.powi(2);
            assert_relative_eq!(phase.powi(2), coherent + eta * spm, max_relative = 1e-9);
        }
    }
}

proptest! {
    #[test]
    fn gain_scales_as_sqrt_np(seed in 0u64..1000) {
        let cfg = common::random_config(&mut common::rng(seed));
        let doubled = ChainConfig { n_p: 2.0 * cfg.n_p, ..cfg };
        let ratio = gain(&doubled) / gain(&cfg);
        prop_assert!((ratio - 2f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn error_non_increasing_in_eta(seed in 0u64..1000, e1 in 0.05..1.0f64, e2 in 0.05..1.0f64) {
        let cfg = common::random_config(&mut common::rng(seed));
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let a = measurement_error(&ChainConfig { eta: lo, ..cfg });
        let b = measurement_error(&ChainConfig { eta: hi, ..cfg });
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(b.delta_ns <= a.delta_ns * (1.0 + 1e-12));
        }
    }
}
