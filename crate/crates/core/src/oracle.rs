//! Brute-force reference solvers: an exhaustive grid for up to four relays and
//! a multistart steepest-ascent search on the exact secrecy rate.
//!
//! Neither relies on degradedness or on any of the structural results used by
//! the other solvers, so they serve as independent checks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::iterative::Mode;
use crate::network::{
    compute_beta_max, snr_unchecked, Diagnostics, Method, NetworkInstance, SolveResult,
};
use crate::numerics::least_distance;

pub const GRID_MAX_RELAYS: usize = 4;
pub const MULTISTART_MAX_RELAYS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Grid points per dimension; odd so that `β_i = 0` lies on the grid.
    pub resolution: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Gradient steps per start.
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            resolution: 101,
            n_starts: 100,
            seed: 0,
            mode: Mode::Individual,
            max_steps: 2000,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 3 || self.resolution % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be odd and >= 3, got {}",
                self.resolution
            )));
        }
        if self.n_starts == 0 {
            return Err(Error::InvalidParameter("n_starts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Secrecy rate without argument checks; `beta` must have length `net.m`.
fn rate_fast(net: &NetworkInstance, gamma: f64, beta: &[f64]) -> f64 {
    let snr_d = snr_unchecked(&net.h_s, &net.h_d, beta, gamma);
    let worst = net
        .h_e
        .iter()
        .map(|row| snr_unchecked(&net.h_s, row, beta, gamma))
        .fold(0.0, f64::max);
    0.5 * ((1.0 + snr_d) / (1.0 + worst)).log2()
}

/// `∂SNR/∂β` for one receiver, added into `out` with weight `w`.
fn add_snr_gradient(net: &NetworkInstance, gamma: f64, h_l: &[f64], beta: &[f64], w: f64, out: &mut [f64]) {
    let mut a = 0.0;
    let mut b = 1.0;
    for i in 0..net.m {
        a += net.h_s[i] * beta[i] * h_l[i];
        b += (beta[i] * h_l[i]).powi(2);
    }
    for i in 0..net.m {
        let da = net.h_s[i] * h_l[i];
        let db = 2.0 * beta[i] * h_l[i] * h_l[i];
        out[i] += w * gamma * (2.0 * a * da * b - a * a * db) / (b * b);
    }
}

/// Relative gap under which eavesdropper SNRs count as tied.
const TIE_TOL: f64 = 1e-12;

/// Gradient of the secrecy rate. Where several eavesdroppers share the largest
/// SNR their gradients are averaged.
pub fn rate_gradient(net: &NetworkInstance, beta: &[f64]) -> Result<Vec<f64>> {
    crate::network::snr(net, beta, crate::network::Receiver::Destination)?;
    Ok(rate_gradient_unchecked(net, net.gamma_s(), beta))
}

fn rate_gradient_unchecked(net: &NetworkInstance, gamma: f64, beta: &[f64]) -> Vec<f64> {
    let scale = 0.5 / std::f64::consts::LN_2;
    let mut grad = vec![0.0; net.m];
    let snr_d = snr_unchecked(&net.h_s, &net.h_d, beta, gamma);
    add_snr_gradient(net, gamma, &net.h_d, beta, scale / (1.0 + snr_d), &mut grad);

    let snrs: Vec<f64> = net
        .h_e
        .iter()
        .map(|row| snr_unchecked(&net.h_s, row, beta, gamma))
        .collect();
    let worst = snrs.iter().copied().fold(0.0, f64::max);
    if worst > 0.0 {
        let active: Vec<usize> = (0..net.k)
            .filter(|&k| snrs[k] >= worst * (1.0 - TIE_TOL))
            .collect();
        let w = -scale / (1.0 + worst) / active.len() as f64;
        for k in active {
            add_snr_gradient(net, gamma, &net.h_e[k], beta, w, &mut grad);
        }
    }
    grad
}

fn grid_value(j: usize, resolution: usize, half_width: f64) -> f64 {
    half_width * (2.0 * j as f64 / (resolution - 1) as f64 - 1.0)
}

/// Exhaustive search over a `resolution^M` grid on the box (individual mode)
/// or on the box of half-width `sqrt(β_tot)` intersected with the ball
/// `Σβ_i² ≤ β_tot` (sum mode).
pub fn grid_search(net: &NetworkInstance, cfg: &OracleConfig) -> Result<SolveResult> {
    net.check()?;
    cfg.validate()?;
    if net.m > GRID_MAX_RELAYS {
        return Err(Error::TooLarge {
            solver: "grid oracle",
            relays: net.m,
            limit: GRID_MAX_RELAYS,
        });
    }
    let (m, res) = (net.m, cfg.resolution);
    let beta_max = compute_beta_max(net);
    let total: f64 = beta_max.iter().map(|b| b * b).sum();
    let half: Vec<f64> = match cfg.mode {
        Mode::Individual => beta_max.clone(),
        Mode::Sum => vec![total.sqrt(); m],
    };
    let inside = |beta: &[f64]| match cfg.mode {
        Mode::Individual => true,
        Mode::Sum => beta.iter().map(|b| b * b).sum::<f64>() <= total * (1.0 + 1e-12),
    };
    let gamma = net.gamma_s();
    let decode = |mut idx: usize, beta: &mut [f64], digits: &mut [usize]| {
        for i in (0..m).rev() {
            digits[i] = idx % res;
            beta[i] = grid_value(digits[i], res, half[i]);
            idx /= res;
        }
    };

    // rate(β) = rate(−β): the first coordinate only needs its non-negative half
    let first = (res - 1) / 2;
    let rest = res.pow(m as u32 - 1);
    let start = first * rest;
    let count = res.pow(m as u32);
    let (best_idx, best_rate) = (start..count)
        .into_par_iter()
        .map_init(
            || (vec![0.0; m], vec![0; m]),
            |(beta, digits), idx| {
                decode(idx, beta, digits);
                if inside(beta) {
                    (idx, rate_fast(net, gamma, beta))
                } else {
                    (idx, f64::NEG_INFINITY)
                }
            },
        )
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );

    let mut beta = vec![0.0; m];
    let mut digits = vec![0; m];
    decode(best_idx, &mut beta, &mut digits);
    // largest rate change to an on-grid axis neighbour of the best point
    let mut bound = 0.0f64;
    for i in 0..m {
        for step in [-1i64, 1] {
            let j = digits[i] as i64 + step;
            if j < 0 || j >= res as i64 {
                continue;
            }
            let mut nb = beta.clone();
            nb[i] = grid_value(j as usize, res, half[i]);
            if inside(&nb) {
                bound = bound.max((rate_fast(net, gamma, &nb) - best_rate).abs());
            }
        }
    }
    let diagnostics = Diagnostics {
        iterations: Some(count - start),
        resolution_bound: Some(bound),
        flags: vec![format!("resolution={res}")],
        ..Diagnostics::default()
    };
    SolveResult::evaluate(net, beta, Method::OracleGrid, diagnostics)
}

fn project(beta: &mut [f64], beta_max: &[f64], total: f64, mode: Mode) {
    match mode {
        Mode::Individual => {
            for (b, m) in beta.iter_mut().zip(beta_max) {
                *b = b.clamp(-m, *m);
            }
        }
        Mode::Sum => {
            let norm2: f64 = beta.iter().map(|b| b * b).sum();
            if norm2 > total {
                let s = (total / norm2).sqrt();
                beta.iter_mut().for_each(|b| *b *= s);
            }
        }
    }
}

const ARMIJO: f64 = 0.01;
const BACKTRACK: f64 = 0.5;
/// Initial and final width, in bits, of the band of eavesdroppers treated as active.
const EPS_START: f64 = 1e-3;
const EPS_MIN: f64 = 1e-13;

/// Secrecy rate against each eavesdropper separately, with gradients. With no
/// eavesdropper the single piece is the destination rate.
fn rate_pieces(net: &NetworkInstance, gamma: f64, beta: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let scale = 0.5 / std::f64::consts::LN_2;
    let snr_d = snr_unchecked(&net.h_s, &net.h_d, beta, gamma);
    let mut grad_d = vec![0.0; net.m];
    add_snr_gradient(net, gamma, &net.h_d, beta, scale / (1.0 + snr_d), &mut grad_d);
    if net.k == 0 {
        return (vec![0.5 * (1.0 + snr_d).log2()], vec![grad_d]);
    }
    net.h_e
        .iter()
        .map(|row| {
            let snr_k = snr_unchecked(&net.h_s, row, beta, gamma);
            let mut g = grad_d.clone();
            add_snr_gradient(net, gamma, row, beta, -scale / (1.0 + snr_k), &mut g);
            (0.5 * ((1.0 + snr_d) / (1.0 + snr_k)).log2(), g)
        })
        .unzip()
}

/// Steepest feasible ascent direction for the worst of the active pieces:
/// `min ‖d‖` subject to `g_k·d ≥ 1` for every active piece and `d` pointing
/// into the feasible set at active bounds. `None` when no such direction exists.
fn ascent_direction(
    beta: &[f64],
    grads: &[&Vec<f64>],
    beta_max: &[f64],
    total: f64,
    mode: Mode,
) -> Option<Vec<f64>> {
    let m = beta.len();
    let mut rows: Vec<(Vec<f64>, f64)> = grads.iter().map(|g| ((*g).clone(), 1.0)).collect();
    match mode {
        Mode::Individual => {
            for i in 0..m {
                let edge = beta_max[i] * (1.0 - 1e-12);
                if beta[i].abs() >= edge {
                    let mut row = vec![0.0; m];
                    row[i] = -beta[i].signum();
                    rows.push((row, 0.0));
                }
            }
        }
        Mode::Sum => {
            let norm2: f64 = beta.iter().map(|b| b * b).sum();
            if norm2 >= total * (1.0 - 1e-12) {
                rows.push((beta.iter().map(|b| -b).collect(), 0.0));
            }
        }
    }
    let g = DMatrix::from_fn(rows.len(), m, |r, c| rows[r].0[c]);
    let h = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    match least_distance(&g, &h) {
        Ok(Some((d, _))) => Some(d.iter().copied().collect()),
        _ => None,
    }
}

/// Ascent from `beta` on the exact (nonsmooth) rate. Each step moves along the
/// steepest feasible ascent direction of the eavesdroppers within `eps` bits of
/// the worst one; `eps` shrinks whenever no progress is possible. Returns the
/// final rate and step count.
fn ascend(
    net: &NetworkInstance,
    gamma: f64,
    beta: &mut Vec<f64>,
    beta_max: &[f64],
    total: f64,
    cfg: &OracleConfig,
) -> (f64, usize) {
    let mut rate = rate_fast(net, gamma, beta);
    let mut eps = EPS_START;
    let mut step = 1.0;
    let mut trial = vec![0.0; beta.len()];
    let scale = 1.0 + beta_max.iter().copied().fold(0.0, f64::max);
    for iter in 0..cfg.max_steps {
        let (rates, grads) = rate_pieces(net, gamma, beta);
        let worst = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let active: Vec<&Vec<f64>> = rates
            .iter()
            .zip(&grads)
            .filter(|(r, _)| **r <= worst + eps)
            .map(|(_, g)| g)
            .collect();
        let mut accepted = false;
        if let Some(d) = ascent_direction(beta, &active, beta_max, total, cfg.mode) {
            let mut t = step;
            while t > 1e-14 {
                for i in 0..beta.len() {
                    trial[i] = beta[i] + t * d[i];
                }
                project(&mut trial, beta_max, total, cfg.mode);
                let predicted = active
                    .iter()
                    .map(|g| (0..beta.len()).map(|i| g[i] * (trial[i] - beta[i])).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                let new_rate = rate_fast(net, gamma, &trial);
                if predicted > 0.0 && new_rate >= rate + ARMIJO * predicted {
                    let moved = (0..beta.len())
                        .map(|i| (trial[i] - beta[i]).abs())
                        .fold(0.0, f64::max);
                    std::mem::swap(beta, &mut trial);
                    rate = new_rate;
                    accepted = moved > 1e-13 * scale;
                    step = 2.0 * t;
                    break;
                }
                t *= BACKTRACK;
            }
        }
        if !accepted {
            if eps <= EPS_MIN {
                return (rate, iter);
            }
            eps = (eps * 0.1).max(EPS_MIN);
            step = 1.0;
        }
    }
    (rate, cfg.max_steps)
}

/// Best of `n_starts` steepest-ascent runs from uniform points of the
/// relay box. Starts are drawn up front from `ChaCha8Rng::seed_from_u64(seed)`,
/// so the result does not depend on how the ascents are scheduled.
pub fn multistart_search(net: &NetworkInstance, cfg: &OracleConfig) -> Result<SolveResult> {
    net.check()?;
    cfg.validate()?;
    if net.m > MULTISTART_MAX_RELAYS {
        return Err(Error::TooLarge {
            solver: "multistart oracle",
            relays: net.m,
            limit: MULTISTART_MAX_RELAYS,
        });
    }
    let beta_max = compute_beta_max(net);
    let total: f64 = beta_max.iter().map(|b| b * b).sum();
    let gamma = net.gamma_s();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let starts: Vec<Vec<f64>> = (0..cfg.n_starts)
        .map(|_| beta_max.iter().map(|b| b * rng.random_range(-1.0..=1.0)).collect())
        .collect();

    let runs: Vec<(f64, usize, Vec<f64>)> = starts
        .into_par_iter()
        .map(|mut beta| {
            let (rate, steps) = ascend(net, gamma, &mut beta, &beta_max, total, cfg);
            (rate, steps, beta)
        })
        .collect();
    let steps: usize = runs.iter().map(|r| r.1).sum();
    let best = runs
        .into_iter()
        .enumerate()
        .fold(None::<(usize, f64, Vec<f64>)>, |acc, (i, (rate, _, beta))| match acc {
            Some(a) if a.1 >= rate => Some(a),
            _ => Some((i, rate, beta)),
        })
        .expect("n_starts >= 1");

    let diagnostics = Diagnostics {
        iterations: Some(steps),
        flags: vec![format!("starts={}", cfg.n_starts), format!("best_start={}", best.0)],
        ..Diagnostics::default()
    };
    SolveResult::evaluate(net, best.2, Method::OracleMultistart, diagnostics)
}
