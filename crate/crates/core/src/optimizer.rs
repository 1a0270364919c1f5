//! Derivative-free minimization of the chain error, used as an oracle for
//! the closed-form optimal angles and probe power.
//!
//! Angles: a fixed coarse grid over one period `[−π/2, π/2)³` (every matrix
//! depends on twice the angle), Nelder–Mead from the best
//! cells, then restarts from a perturbed incumbent until a restart stops
//! improving. Probe power: golden-section search on `ln N_p` of the
//! angle-optimized error. Nothing here is random, so identical inputs give
//! identical results.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{measurement_error, ChainConfig};
use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub theta: f64,
    pub phi: f64,
    pub zeta: f64,
    /// Set by [`minimize_np`].
    pub n_p: Option<f64>,
    /// Minimal `ΔN_s²`, photons².
    pub best_value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSearch {
    /// Relative value tolerance. Each simplex runs until its value spread is
    /// below `tol·(1 + |best|)/100`; restarts stop once one improves the
    /// incumbent by less than `tol·(1 + |best|)`.
    pub tol: f64,
    /// Simplex diameter (radians) required in addition to the value spread.
    pub x_tol: f64,
    pub max_evaluations: usize,
    /// Grid points per angle over `[0, π)`.
    pub grid_points: usize,
    /// Number of best grid cells refined by the simplex.
    pub starts: usize,
    /// Upper bound on restarts from the incumbent. A single simplex run may
    /// use at most `max_evaluations / (2·starts)`.
    pub max_restarts: usize,
}

impl Default for AngleSearch {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            x_tol: 1e-9,
            max_evaluations: 100_000,
            grid_points: 16,
            starts: 5,
            max_restarts: 100,
        }
    }
}

impl AngleSearch {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points", "need at least 2 points per angle"));
        }
        if self.starts == 0 {
            return Err(Error::invalid("starts", "need at least one start"));
        }
        Ok(())
    }
}

/// `ΔN_s²` at the given angles; gain-blind points are `+∞`.
pub fn angle_objective(cfg: &ChainConfig, x: [f64; 3]) -> f64 {
    match measurement_error(&cfg.with_angles(x[0], x[1], x[2])) {
        Ok(out) => out.delta_ns * out.delta_ns,
        Err(_) => f64::INFINITY,
    }
}

/// Total order on (value, params) so that merges never depend on evaluation order.
fn rank(a: &(f64, [f64; 3]), b: &(f64, [f64; 3])) -> Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| a.1[0].total_cmp(&b.1[0]))
        .then_with(|| a.1[1].total_cmp(&b.1[1]))
        .then_with(|| a.1[2].total_cmp(&b.1[2]))
}

/// Minimizes `ΔN_s²` over `(θ, φ, ζ)`. The angles stored in `cfg` are ignored.
///
/// The search runs on `[−π/2, π/2)`, where strong SPM pushes the optimal
/// `φ` towards 0 and f64 still resolves it; reported angles are wrapped to `[0, π)`.
pub fn minimize_angles(cfg: &ChainConfig, search: &AngleSearch) -> Result<OptimizationResult> {
    search.validate()?;
    cfg.with_angles(0.0, 0.0, 0.0).validate()?;

    let n = search.grid_points;
    let step = PI / n as f64;
    let mut grid: Vec<(f64, [f64; 3])> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let x = [
                -FRAC_PI_2 + (idx / (n * n)) as f64 * step,
                -FRAC_PI_2 + ((idx / n) % n) as f64 * step,
                -FRAC_PI_2 + (idx % n) as f64 * step,
            ];
            (angle_objective(cfg, x), x)
        })
        .collect();
    let mut evaluations = grid.len();
    grid.sort_by(rank);

    let f = |x: [f64; 3]| angle_objective(cfg, x);
    let local_budget = search.max_evaluations / (2 * search.starts).max(1);
    let mut best: Option<(f64, [f64; 3])> = None;
    for &(_, x0) in grid.iter().take(search.starts) {
        let budget = local_budget.min(search.max_evaluations.saturating_sub(evaluations));
        let run = nelder_mead(f, x0, 0.5 * step, 1e-2 * search.tol, search.x_tol, budget);
        evaluations += run.evaluations;
        let cand = (run.value, run.x);
        if best.is_none_or(|b| rank(&cand, &b) == Ordering::Less) {
            best = Some(cand);
        }
    }
    let (mut best_value, mut best_x) = best.expect("at least one start");

    // Restart from the incumbent with a fresh simplex until a converged
    // restart no longer improves: a collapsed simplex can stall on the
    // gain-blind manifold or in a narrow curved valley.
    let mut converged = false;
    for _ in 0..search.max_restarts {
        let budget = local_budget.min(search.max_evaluations.saturating_sub(evaluations));
        if budget == 0 {
            break;
        }
        let start = best_x;
        let run = nelder_mead(f, best_x, 0.1 * step, 1e-2 * search.tol, search.x_tol, budget);
        evaluations += run.evaluations;
        let before = best_value;
        if run.value < best_value {
            best_value = run.value;
            best_x = run.x;
        }
        // coordinate refinement: one line search per axis and along the
        // last displacement, which follows curved valleys a collapsed simplex crawls along
        let moved = [best_x[0] - start[0], best_x[1] - start[1], best_x[2] - start[2]];
        let directions = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], moved];
        for dir in directions {
            let (x, v, evals) = line_minimize(f, best_x, best_value, dir, 0.1 * step, search.x_tol);
            evaluations += evals;
            if v < best_value {
                best_value = v;
                best_x = x;
            }
        }
        let improved = before - best_value > search.tol * (1.0 + best_value.abs());
        if run.converged && !improved {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { evaluations });
    }

    if !best_value.is_finite() {
        return Err(Error::ZeroGain);
    }
    Ok(OptimizationResult {
        theta: best_x[0].rem_euclid(PI),
        phi: best_x[1].rem_euclid(PI),
        zeta: best_x[2].rem_euclid(PI),
        n_p: None,
        best_value,
        evaluations,
        converged,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadRun {
    pub x: [f64; 3],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead on three variables with the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead(
    f: impl Fn([f64; 3]) -> f64,
    x0: [f64; 3],
    initial_step: f64,
    tol: f64,
    x_tol: f64,
    max_evaluations: usize,
) -> NelderMeadRun {
    let mut simplex: Vec<(f64, [f64; 3])> = Vec::with_capacity(4);
    simplex.push((f(x0), x0));
    for i in 0..3 {
        let mut x = x0;
        x[i] += initial_step;
        simplex.push((f(x), x));
    }
    let mut evaluations = 4;
    let done = |s: &[(f64, [f64; 3])]| {
        let (lo, hi) = (s[0].0, s[3].0);
        let spread_ok = hi.is_finite() && hi - lo <= tol * (1.0 + lo.abs());
        let diameter = s[1..]
            .iter()
            .map(|(_, x)| (0..3).map(|k| (x[k] - s[0].1[k]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        // a simplex collapsed to the spacing of f64 cannot improve any further
        let magnitude = s[0].1.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let collapsed = diameter <= 4.0 * f64::EPSILON * magnitude;
        (spread_ok && diameter <= x_tol) || collapsed
    };

    loop {
        simplex.sort_by(rank);
        if done(&simplex) {
            return NelderMeadRun {
                x: simplex[0].1,
                value: simplex[0].0,
                evaluations,
                converged: true,
            };
        }
        if evaluations >= max_evaluations {
            return NelderMeadRun {
                x: simplex[0].1,
                value: simplex[0].0,
                evaluations,
                converged: false,
            };
        }

        let mut centroid = [0.0; 3];
        for (_, x) in &simplex[..3] {
            for k in 0..3 {
                centroid[k] += x[k] / 3.0;
            }
        }
        let along = |t: f64| {
            let w = simplex[3].1;
            [
                centroid[0] + t * (w[0] - centroid[0]),
                centroid[1] + t * (w[1] - centroid[1]),
                centroid[2] + t * (w[2] - centroid[2]),
            ]
        };

        let xr = along(-1.0);
        let fr = f(xr);
        evaluations += 1;
        if fr < simplex[0].0 {
            let xe = along(-2.0);
            let fe = f(xe);
            evaluations += 1;
            simplex[3] = if fe < fr { (fe, xe) } else { (fr, xr) };
            continue;
        }
        if fr < simplex[2].0 {
            simplex[3] = (fr, xr);
            continue;
        }
        let (xc, fc) = if fr < simplex[3].0 {
            let xc = along(-0.5);
            (xc, f(xc))
        } else {
            let xc = along(0.5);
            (xc, f(xc))
        };
        evaluations += 1;
        if fc < simplex[3].0.min(fr) {
            simplex[3] = (fc, xc);
            continue;
        }
        let best = simplex[0].1;
        for v in simplex.iter_mut().skip(1) {
            let x = [
                best[0] + 0.5 * (v.1[0] - best[0]),
                best[1] + 0.5 * (v.1[1] - best[1]),
                best[2] + 0.5 * (v.1[2] - best[2]),
            ];
            *v = (f(x), x);
        }
        evaluations += 3;
    }
}

/// Minimizes `f` along `x0 + t·dir`: expands a bracket from `±step` by
/// doubling, then narrows it by golden section until it is below `x_tol`
/// (in units of the largest component of `dir`).
fn line_minimize(
    f: impl Fn([f64; 3]) -> f64,
    x0: [f64; 3],
    f0: f64,
    dir: [f64; 3],
    step: f64,
    x_tol: f64,
) -> ([f64; 3], f64, usize) {
    let norm = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(norm > 0.0) || !f0.is_finite() {
        return (x0, f0, 0);
    }
    let d = [dir[0] / norm, dir[1] / norm, dir[2] / norm];
    let at = |t: f64| [x0[0] + t * d[0], x0[1] + t * d[1], x0[2] + t * d[2]];
    let mut evaluations = 0;

    let mut h = step;
    let fp = f(at(h));
    evaluations += 1;
    if !(fp < f0) {
        let fm = f(at(-h));
        evaluations += 1;
        if !(fm < f0) {
            // already bracketed by ±step
            return refine_bracket(&f, &at, -h, h, x0, f0, x_tol, evaluations);
        }
        h = -h;
    }
    // walk downhill, doubling, until the value rises
    let (mut a, mut b) = (0.0, h);
    let mut fb = f(at(b));
    evaluations += 1;
    for _ in 0..60 {
        let c = b + 2.0 * (b - a);
        let fc = f(at(c));
        evaluations += 1;
        if !(fc < fb) {
            let (lo, hi) = if a < c { (a, c) } else { (c, a) };
            return refine_bracket(&f, &at, lo, hi, at(b), fb, x_tol, evaluations);
        }
        a = b;
        b = c;
        fb = fc;
    }
    (at(b), fb, evaluations)
}

#[allow(clippy::too_many_arguments)]
fn refine_bracket(
    f: &impl Fn([f64; 3]) -> f64,
    at: &impl Fn(f64) -> [f64; 3],
    lo: f64,
    hi: f64,
    x_best: [f64; 3],
    f_best: f64,
    x_tol: f64,
    evaluations: usize,
) -> ([f64; 3], f64, usize) {
    let tol = x_tol.max(4.0 * f64::EPSILON * (hi - lo).abs());
    let (t, v, evals) = golden_section(|t| Ok(f(at(t))), lo, hi, tol).expect("infallible objective");
    if v < f_best {
        (at(t), v, evaluations + evals)
    } else {
        (x_best, f_best, evaluations + evals)
    }
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`; stops when the
/// bracket is narrower than `tol`. Returns `(x, f(x), evaluations)`.
pub fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64, usize)> {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut evaluations = 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    Ok((x, fx, evaluations + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSearch {
    /// Bracket on `N_p`, searched in `ln N_p`.
    pub bracket: (f64, f64),
    /// Final bracket width in `ln N_p` (≈ relative precision on `N_p`).
    pub tol: f64,
    pub angles: AngleSearch,
}

impl Default for PowerSearch {
    fn default() -> Self {
        Self {
            bracket: (1e2, 1e12),
            tol: 1e-7,
            angles: AngleSearch::default(),
        }
    }
}

/// Minimizes the angle-optimized `ΔN_s²` over the probe photon number.
pub fn minimize_np(cfg: &ChainConfig, search: &PowerSearch) -> Result<OptimizationResult> {
    let (lo, hi) = search.bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "bracket",
            format!("need 0 < lo < hi, got ({lo}, {hi})"),
        ));
    }
    if !(search.tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {}", search.tol)));
    }
    let (u_lo, u_hi) = (lo.ln(), hi.ln());
    let mut inner_evals = 0usize;
    let (u, _, _) = golden_section(
        |u| {
            let res = minimize_angles(&ChainConfig { n_p: u.exp(), ..*cfg }, &search.angles)?;
            inner_evals += res.evaluations;
            Ok(res.best_value)
        },
        u_lo,
        u_hi,
        search.tol,
    )?;
    let edge = 1e-3 * (u_hi - u_lo);
    if u - u_lo < edge || u_hi - u < edge {
        return Err(Error::NoFiniteOptimum(format!(
            "the error is monotone across n_p in [{lo:e}, {hi:e}]"
        )));
    }
    let n_p = u.exp();
    let best = minimize_angles(&ChainConfig { n_p, ..*cfg }, &search.angles)?;
    Ok(OptimizationResult {
        n_p: Some(n_p),
        evaluations: inner_evals + best.evaluations,
        ..best
    })
}
