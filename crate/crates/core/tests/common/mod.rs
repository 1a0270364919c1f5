#![allow(dead_code)]

use kerr_qnd::ChainConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub const GX: f64 = 0.85e-5;
pub const GS: f64 = 0.425e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Random configuration over the validated parameter box, angles included.
pub fn random_config(rng: &mut impl Rng) -> ChainConfig {
    use std::f64::consts::PI;
    ChainConfig {
        n_p: log_uniform(rng, 1e3, 1e9),
        gamma_x: GX,
        gamma_s: log_uniform(rng, 1e-7, 1e-4),
        eta: rng.random_range(0.5..1.0),
        r: rng.random_range(0.0..2.5),
        theta: rng.random_range(0.0..PI),
        big_r: rng.random_range(0.0..5.0),
        phi: rng.random_range(0.0..PI),
        zeta: rng.random_range(0.0..PI),
    }
}
