//! Sampling check of the linear photon-number estimator.
//!
//! Each sample draws the squeezed input quadratures, a vacuum loss
//! quadrature and an injected signal fluctuation, forms the homodyne
//! output `d = d₀ + G·δN_s` and the estimate `d/G`. Samples are split into
//! fixed-size chunks, chunk `k` draws from stream `k` of the seed, and the
//! chunk statistics are merged pairwise in index order, so results do not
//! depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{gain, measured_direction, measurement_error, ChainConfig};
use crate::error::{Error, Result};
use crate::gaussian::{squeeze_matrix, Quad2, VACUUM_VARIANCE};

/// Samples per chunk (one RNG stream each).
pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Standard deviation of the injected signal fluctuation `δN_s`, photons.
    pub injected_dns: f64,
    pub chain: ChainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    /// Least-squares slope of `d` against `δN_s`; `None` without injected signal.
    pub empirical_gain: Option<f64>,
    pub stderr_gain: Option<f64>,
    /// Sample standard deviation of `d/G − δN_s`.
    pub empirical_dns: f64,
    pub stderr_dns: f64,
    pub analytic_gain: f64,
    pub analytic_dns: f64,
    pub n_samples: usize,
}

/// Generator for substream `stream_id` of `seed`. Streams never overlap.
pub fn seeded_stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Running means and co-moments of (signal, output, estimator error).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean_s: f64,
    mean_d: f64,
    mean_e: f64,
    m2_s: f64,
    m2_d: f64,
    m2_e: f64,
    c_sd: f64,
}

impl Moments {
    fn push(&mut self, s: f64, d: f64, e: f64) {
        self.n += 1.0;
        let ds = s - self.mean_s;
        let dd = d - self.mean_d;
        let de = e - self.mean_e;
        self.mean_s += ds / self.n;
        self.mean_d += dd / self.n;
        self.mean_e += de / self.n;
        self.m2_s += ds * (s - self.mean_s);
        self.m2_d += dd * (d - self.mean_d);
        self.m2_e += de * (e - self.mean_e);
        self.c_sd += ds * (d - self.mean_d);
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let w = a.n * b.n / n;
        let (ds, dd, de) = (b.mean_s - a.mean_s, b.mean_d - a.mean_d, b.mean_e - a.mean_e);
        Self {
            n,
            mean_s: a.mean_s + ds * b.n / n,
            mean_d: a.mean_d + dd * b.n / n,
            mean_e: a.mean_e + de * b.n / n,
            m2_s: a.m2_s + b.m2_s + ds * ds * w,
            m2_d: a.m2_d + b.m2_d + dd * dd * w,
            m2_e: a.m2_e + b.m2_e + de * de * w,
            c_sd: a.c_sd + b.c_sd + ds * dd * w,
        }
    }
}

fn merge_pairwise(chunks: &[Moments]) -> Moments {
    match chunks.len() {
        0 => Moments::default(),
        1 => chunks[0],
        n => {
            let (l, r) = chunks.split_at(n / 2);
            Moments::merge(merge_pairwise(l), merge_pairwise(r))
        }
    }
}

pub fn run(cfg: &McConfig) -> Result<McReport> {
    if cfg.n_samples < 2 {
        return Err(Error::invalid(
            "n_samples",
            format!("need at least 2 samples, got {}", cfg.n_samples),
        ));
    }
    if !(cfg.injected_dns >= 0.0) || !cfg.injected_dns.is_finite() {
        return Err(Error::invalid(
            "injected_dns",
            format!("must be finite and >= 0, got {}", cfg.injected_dns),
        ));
    }
    let analytic = measurement_error(&cfg.chain)?;
    let chain = cfg.chain;
    let g = gain(&chain);
    let squeeze = squeeze_matrix(chain.input_squeeze());
    let v = measured_direction(&chain);
    let (amp_in, amp_loss) = (chain.eta.sqrt(), (1.0 - chain.eta).sqrt());
    let sigma_vac = VACUUM_VARIANCE.sqrt();

    let n_chunks = cfg.n_samples.div_ceil(CHUNK);
    let chunks: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_stream(cfg.seed, k as u64);
            let len = CHUNK.min(cfg.n_samples - k * CHUNK);
            let mut m = Moments::default();
            for _ in 0..len {
                let z0: f64 = StandardNormal.sample(&mut rng);
                let z1: f64 = StandardNormal.sample(&mut rng);
                let zl: f64 = StandardNormal.sample(&mut rng);
                let zs: f64 = StandardNormal.sample(&mut rng);
                let x = squeeze * Quad2::new(sigma_vac * z0, sigma_vac * z1);
                let d0 = amp_in * v.dot(x) + amp_loss * sigma_vac * zl;
                let s = cfg.injected_dns * zs;
                let d = d0 + g * s;
                m.push(s, d, d / g - s);
            }
            m
        })
        .collect();
    let m = merge_pairwise(&chunks);

    let n = m.n;
    let empirical_dns = (m.m2_e / (n - 1.0)).sqrt();
    let (empirical_gain, stderr_gain) = if m.m2_s > 0.0 && n > 2.0 {
        let slope = m.c_sd / m.m2_s;
        let resid = ((m.m2_d - slope * m.c_sd) / (n - 2.0)).max(0.0);
        (Some(slope), Some((resid / m.m2_s).sqrt()))
    } else {
        (None, None)
    };
    Ok(McReport {
        empirical_gain,
        stderr_gain,
        empirical_dns,
        stderr_dns: empirical_dns / (2.0 * (n - 1.0)).sqrt(),
        analytic_gain: analytic.gain,
        analytic_dns: analytic.delta_ns,
        n_samples: cfg.n_samples,
    })
}
