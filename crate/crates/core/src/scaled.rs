//! Optimal amplification when the eavesdropper channel is a scalar multiple of
//! the destination channel, `h_e = α·h_d` with `0 < α < 1`, under individual
//! relay power constraints.
//!
//! In the variables `ω_i = h_i,d·β_i` the rate depends on `ω` only through
//! `Ψ = (g_sᵗω)²` and `r² = ωᵗω`. The solver first tries the unconstrained
//! optimum `ω* = g_s/‖g_s‖·r*`. If that breaks a relay bound it clamps the
//! relays in order of decreasing `g_s,i/ω_i,max`, one more at a time, and puts
//! the remaining relays along `λ_m·g_s` with `λ_m` the positive root of a
//! quartic.
//!
//! Signs: the box `|ω_i| ≤ ω_i,max` is symmetric, so everything is solved on
//! `|g_s|` and the sign of each `g_s,i` is restored at the end.

use crate::error::{Error, Result};
use crate::network::{compute_beta_max, Diagnostics, Method, NetworkInstance, SolveResult};
use crate::numerics::{positive_quartic_root, QuarticCoeffs};

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProblem {
    /// `g_s,i = sqrt(P_s/σ²)·h_s,i`.
    pub g_s: Vec<f64>,
    /// `ω_i,max = |h_i,d|·β_i,max`.
    pub omega_max: Vec<f64>,
    pub alpha: f64,
}

/// Relay order by `|g_s,i|/ω_i,max` (descending, ties by index) with the
/// prefix/suffix sums indexed by prefix size `m = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedPrefix {
    /// `order[j]` is the original (0-based) index of the j-th ordered relay.
    pub order: Vec<usize>,
    /// `p[m] = Σ_{i≤m} |g_(i)|·ω_(i),max`.
    pub p: Vec<f64>,
    /// `q[m] = Σ_{i≤m} ω_(i),max²`.
    pub q: Vec<f64>,
    /// `s[m] = Σ_{i>m} g_(i)²`.
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSolution {
    /// Signed `ω` in original relay order.
    pub omega: Vec<f64>,
    /// Number of ordered relays clamped to their bound.
    pub active_prefix: usize,
    pub ordering: OrderedPrefix,
    /// `λ_m` used on the free relays, when any remain.
    pub lambda: Option<f64>,
}

const SCALE_TOL: f64 = 1e-9;

impl ScaledProblem {
    pub fn new(g_s: Vec<f64>, omega_max: Vec<f64>, alpha: f64) -> Result<Self> {
        if g_s.len() != omega_max.len() {
            return Err(Error::Dimension {
                field: "omega_max",
                expected: g_s.len(),
                got: omega_max.len(),
            });
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if omega_max.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter("omega_max entries must be > 0".into()));
        }
        Ok(Self { g_s, omega_max, alpha })
    }

    /// Builds the problem from a single-eavesdropper network with `h_e = α·h_d`.
    pub fn from_network(net: &NetworkInstance, alpha: f64) -> Result<Self> {
        net.check()?;
        if net.k != 1 {
            return Err(Error::NotScaled(format!(
                "expected exactly one eavesdropper, got {}",
                net.k
            )));
        }
        for (i, (e, d)) in net.h_e[0].iter().zip(&net.h_d).enumerate() {
            if (e - alpha * d).abs() > SCALE_TOL * d.abs() {
                return Err(Error::NotScaled(format!(
                    "relay {i}: h_e = {e} but alpha·h_d = {}",
                    alpha * d
                )));
            }
        }
        let omega_max = compute_beta_max(net)
            .iter()
            .zip(&net.h_d)
            .map(|(b, d)| b * d.abs())
            .collect();
        Self::new(net.g_s(), omega_max, alpha)
    }

    pub fn m(&self) -> usize {
        self.g_s.len()
    }

    fn g_abs(&self) -> Vec<f64> {
        self.g_s.iter().map(|g| g.abs()).collect()
    }
}

/// The common ratio `h_e/h_d` of a single-eavesdropper network, if there is one.
pub fn detect_alpha(net: &NetworkInstance) -> Option<f64> {
    if net.k != 1 || net.h_d.iter().any(|d| *d == 0.0) {
        return None;
    }
    let alpha = net.h_e[0][0] / net.h_d[0];
    let consistent = net.h_e[0]
        .iter()
        .zip(&net.h_d)
        .all(|(e, d)| (e - alpha * d).abs() <= SCALE_TOL * d.abs());
    consistent.then_some(alpha)
}

/// Rate in `ω` coordinates (bits per channel use).
pub fn omega_rate(g_s: &[f64], alpha: f64, omega: &[f64]) -> f64 {
    let psi = g_s.iter().zip(omega).map(|(g, w)| g * w).sum::<f64>().powi(2);
    let r2: f64 = omega.iter().map(|w| w * w).sum();
    let a2 = alpha * alpha;
    let num = 1.0 + psi / (1.0 + r2);
    let den = 1.0 + a2 * psi / (1.0 + a2 * r2);
    0.5 * (num / den).log2()
}

/// `ω* = g_s/‖g_s‖·r*` with `r* = 1/sqrt(α·sqrt(1 + ‖g_s‖²))`.
pub fn unconstrained_solution(prob: &ScaledProblem) -> (Vec<f64>, f64) {
    let norm2: f64 = prob.g_s.iter().map(|g| g * g).sum();
    let r_star = 1.0 / (prob.alpha * (1.0 + norm2).sqrt()).sqrt();
    if norm2 == 0.0 {
        return (vec![0.0; prob.m()], r_star);
    }
    let scale = r_star / norm2.sqrt();
    (prob.g_s.iter().map(|g| g * scale).collect(), r_star)
}

pub fn order_relays(prob: &ScaledProblem) -> OrderedPrefix {
    let g = prob.g_abs();
    let mut order: Vec<usize> = (0..prob.m()).collect();
    // stable sort keeps ascending index on ties
    order.sort_by(|&a, &b| {
        let ra = g[a] / prob.omega_max[a];
        let rb = g[b] / prob.omega_max[b];
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut p = vec![0.0];
    let mut q = vec![0.0];
    for &i in &order {
        p.push(p.last().unwrap() + g[i] * prob.omega_max[i]);
        q.push(q.last().unwrap() + prob.omega_max[i] * prob.omega_max[i]);
    }
    let mut s = vec![0.0; prob.m() + 1];
    for j in (0..prob.m()).rev() {
        s[j] = s[j + 1] + g[order[j]] * g[order[j]];
    }
    OrderedPrefix { order, p, q, s }
}

/// Region boundaries `r_1..r_M`: at `r_m` exactly the first `m` ordered relays sit on
/// their bounds. `r_m = sqrt(s_m/g_(m)²·ω_(m),max² + q_m)`, so `r_M = sqrt(q_M)`.
pub fn boundary_radii(prob: &ScaledProblem, op: &OrderedPrefix) -> Vec<f64> {
    (1..=prob.m())
        .map(|m| {
            let i = op.order[m - 1];
            let g = prob.g_s[i].abs();
            if op.s[m] == 0.0 {
                op.q[m].sqrt()
            } else if g == 0.0 {
                f64::INFINITY
            } else {
                (op.s[m] / (g * g) * prob.omega_max[i].powi(2) + op.q[m]).sqrt()
            }
        })
        .collect()
}

/// Coefficients of the stationarity quartic for the free-relay scale `λ_m`.
pub fn lambda_quartic(p: f64, q: f64, s: f64, alpha: f64, gamma_s: f64) -> QuarticCoeffs {
    let a2 = alpha * alpha;
    let base = s * (1.0 + gamma_s * s);
    QuarticCoeffs::new(
        p * (2.0 + 3.0 * gamma_s * s) / base,
        3.0 * p * p * gamma_s / base,
        p * (gamma_s * p * p * a2 + 2.0 * q * a2 + a2 + 1.0) / (s * a2 * base),
        -(1.0 + q) * (1.0 + a2 * q) / (s * a2 * base),
    )
}

/// Ratio objective maximised by `λ_m`:
/// `(1 + γ(p+sλ)²/(1+q+sλ²)) / (1 + γα²(p+sλ)²/(1+α²q+α²sλ²))`.
pub fn lambda_objective(p: f64, q: f64, s: f64, alpha: f64, gamma_s: f64, lambda: f64) -> f64 {
    let a2 = alpha * alpha;
    let lin = (p + s * lambda).powi(2);
    (1.0 + gamma_s * lin / (1.0 + q + s * lambda * lambda))
        / (1.0 + gamma_s * a2 * lin / (1.0 + a2 * q + a2 * s * lambda * lambda))
}

/// The unique positive root of the `λ_m` quartic.
pub fn lambda_root(p: f64, q: f64, s: f64, alpha: f64, gamma_s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s_m must be > 0, got {s}")));
    }
    positive_quartic_root(lambda_quartic(p, q, s, alpha, gamma_s))
}

/// Stepwise optimum in `ω` coordinates.
pub fn solve_scaled_omega(prob: &ScaledProblem) -> Result<ScaledSolution> {
    let g = prob.g_abs();
    let ordering = order_relays(prob);
    let fits = |w: f64, i: usize| w <= prob.omega_max[i] * (1.0 + 1e-12);

    let (unconstrained, _) = unconstrained_solution(prob);
    let unconstrained: Vec<f64> = unconstrained.iter().map(|w| w.abs()).collect();
    let (magnitudes, active_prefix, lambda) = if unconstrained
        .iter()
        .enumerate()
        .all(|(i, &w)| fits(w, i))
    {
        (unconstrained, 0, None)
    } else {
        let mut m = 1;
        loop {
            let mut omega = vec![0.0; prob.m()];
            for &i in &ordering.order[..m] {
                omega[i] = prob.omega_max[i];
            }
            let s = ordering.s[m];
            if m == prob.m() || s == 0.0 {
                break (omega, m, None);
            }
            // γ = 1: g already carries sqrt(P_s/σ²)
            let lambda = lambda_root(ordering.p[m], ordering.q[m], s, prob.alpha, 1.0)?;
            let next = ordering.order[m];
            if fits(lambda * g[next], next) {
                for &i in &ordering.order[m..] {
                    omega[i] = lambda * g[i];
                }
                break (omega, m, Some(lambda));
            }
            m += 1;
        }
    };

    let omega = magnitudes
        .iter()
        .zip(&prob.g_s)
        .zip(&prob.omega_max)
        .map(|((w, gs), wmax)| w.min(*wmax) * if *gs < 0.0 { -1.0 } else { 1.0 })
        .collect();
    Ok(ScaledSolution {
        omega,
        active_prefix,
        ordering,
        lambda,
    })
}

/// Optimal amplification for a single-eavesdropper network with `h_e = α·h_d`.
pub fn solve_scaled(net: &NetworkInstance, alpha: f64) -> Result<SolveResult> {
    let prob = ScaledProblem::from_network(net, alpha)?;
    let sol = solve_scaled_omega(&prob)?;
    let beta_max = compute_beta_max(net);
    let beta = sol
        .omega
        .iter()
        .zip(&net.h_d)
        .zip(&beta_max)
        .map(|((w, d), bmax)| (w / d).clamp(-bmax, *bmax))
        .collect();
    let diagnostics = Diagnostics {
        iterations: Some(sol.active_prefix + 1),
        flags: vec![format!("active_prefix={}", sol.active_prefix)],
        ..Diagnostics::default()
    };
    SolveResult::evaluate(net, beta, Method::ScaledAlpha, diagnostics)
}
