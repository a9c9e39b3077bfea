//! Outer golden-section search over the eavesdropper SNR cap `η` with a convex
//! inner problem, for a total power budget or individual relay budgets.
//!
//! With `ω_i = h_i,d·β_i` and `v = ω/sqrt(1 + ωᵗω)`, the destination SNR is
//! `(g_sᵗv)²` where `g_s = sqrt(P_s/σ²)·h_s`: the `h_i,d` factors are absorbed
//! into `ω`, so `g_s` is the inner objective vector. For fixed `η` every
//! constraint becomes `vᵗAv ≤ 1` with `A` positive definite:
//!
//! * eavesdropper `k`: `C_k(η) = (P_s/σ²)·h_sρk·h_sρkᵗ/η + I − diag(ρ_i,k²)`,
//!   with `ρ_i,k = h_i,k/h_i,d` and `h_sρk = h_s ⊙ ρ_k`;
//! * total budget `Σβ_i² ≤ β_tot`: `D_T = I + diag(1/(h_i,d²·β_tot))`;
//! * relay `i` budget: `D_i = I + e_i·e_iᵗ/(h_i,d²·β_i,max²)`.
//!
//! Maximising `g_sᵗv` over that set and then `f(η) = (1 + (g_sᵗv*)²)/(1 + η)`
//! over `η` gives the optimal amplification.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::{
    compute_beta_max, Diagnostics, EtaSample, EtaSearchState, Method, NetworkInstance, SolveResult,
};
use crate::numerics::{
    iteration_bound, rayleigh_direction, try_golden_section_max, GoldenSectionConfig, QcqpProblem,
    QcqpWorkspace, Tolerances,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Single budget `Σβ_i² ≤ Σβ_i,max²`.
    Sum,
    /// `|β_i| ≤ β_i,max` for every relay.
    Individual,
}

impl Mode {
    pub fn method(self) -> Method {
        match self {
            Mode::Sum => Method::SumIterative,
            Mode::Individual => Method::IndividualIterative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeConfig {
    /// Lower end of the search as a fraction of `η_max`.
    pub eta_lo_rel: f64,
    /// Bracket tolerance as a fraction of `η_max`.
    pub delta_rel: f64,
    /// Absolute bracket tolerance; overrides `delta_rel` when set.
    pub delta_abs: Option<f64>,
    /// Use the closed-form inner solution for one eavesdropper with a total budget.
    pub fast_path: bool,
    pub tolerances: Tolerances,
}

impl Default for IterativeConfig {
    fn default() -> Self {
        Self {
            eta_lo_rel: 1e-6,
            delta_rel: 1e-4,
            delta_abs: None,
            fast_path: true,
            tolerances: Tolerances::default(),
        }
    }
}

/// `v = ω/sqrt(1 + ωᵗω)`; always `‖v‖ < 1`.
pub fn transform_to_v(omega: &[f64]) -> Vec<f64> {
    let scale = 1.0 / (1.0 + omega.iter().map(|w| w * w).sum::<f64>()).sqrt();
    omega.iter().map(|w| w * scale).collect()
}

/// `ω = v/sqrt(1 − vᵗv)`, defined for `‖v‖ < 1`.
pub fn transform_to_omega(v: &[f64]) -> Result<Vec<f64>> {
    let rest = 1.0 - v.iter().map(|x| x * x).sum::<f64>();
    if !(rest > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "transform needs ‖v‖ < 1, got ‖v‖² = {}",
            1.0 - rest
        )));
    }
    let scale = 1.0 / rest.sqrt();
    Ok(v.iter().map(|x| x * scale).collect())
}

fn require_degraded(net: &NetworkInstance) -> Result<()> {
    match net.first_non_degraded() {
        Some((relay, eavesdropper)) => Err(Error::NotDegraded { relay, eavesdropper }),
        None => Ok(()),
    }
}

fn beta_total(net: &NetworkInstance) -> f64 {
    compute_beta_max(net).iter().map(|b| b * b).sum()
}

/// Per-eavesdropper bounds `η_k,max = (P_s/σ²)·Σ_i h_s,i²h_i,k²/(1/β_tot + h_i,k²)`
/// on the SNR any `Σβ_i² ≤ β_tot` can give eavesdropper `k`.
pub fn eta_upper_bounds(net: &NetworkInstance) -> Result<Vec<f64>> {
    net.check()?;
    if net.k == 0 {
        return Err(Error::NoEavesdropper("no eta search needed without eavesdroppers"));
    }
    let inv_total = 1.0 / beta_total(net);
    let gamma = net.gamma_s();
    Ok(net
        .h_e
        .iter()
        .map(|row| {
            gamma
                * row
                    .iter()
                    .zip(&net.h_s)
                    .map(|(e, s)| s * s * e * e / (inv_total + e * e))
                    .sum::<f64>()
        })
        .collect())
}

/// `η_max = max_k η_k,max`. Individual budgets use `β_tot = Σβ_i,max²`, so one
/// bound serves both modes.
pub fn eta_upper_bound(net: &NetworkInstance, _mode: Mode) -> Result<f64> {
    Ok(eta_upper_bounds(net)?.into_iter().fold(0.0, f64::max))
}

/// `C_k(η)` for every eavesdropper.
pub fn eavesdropper_matrices(net: &NetworkInstance, eta: f64) -> Vec<DMatrix<f64>> {
    let gamma = net.gamma_s();
    net.h_e
        .iter()
        .map(|row| {
            let rho: Vec<f64> = row.iter().zip(&net.h_d).map(|(e, d)| e / d).collect();
            let h = DVector::from_fn(net.m, |i, _| net.h_s[i] * rho[i]);
            let mut c = &h * h.transpose() * (gamma / eta);
            for i in 0..net.m {
                c[(i, i)] += 1.0 - rho[i] * rho[i];
            }
            c
        })
        .collect()
}

pub fn total_power_matrix(net: &NetworkInstance) -> DMatrix<f64> {
    let total = beta_total(net);
    DMatrix::from_diagonal(&DVector::from_fn(net.m, |i, _| 1.0 + 1.0 / (net.h_d[i].powi(2) * total)))
}

pub fn relay_power_matrices(net: &NetworkInstance) -> Vec<DMatrix<f64>> {
    compute_beta_max(net)
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut d = DMatrix::identity(net.m, net.m);
            d[(i, i)] += 1.0 / (net.h_d[i].powi(2) * b * b);
            d
        })
        .collect()
}

/// Inner problem at cap `η`: eavesdropper matrices first, then the power constraints.
pub fn build_inner_problem(net: &NetworkInstance, eta: f64, mode: Mode) -> Result<QcqpProblem> {
    net.check()?;
    require_degraded(net)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be > 0, got {eta}")));
    }
    let mut constraints = eavesdropper_matrices(net, eta);
    match mode {
        Mode::Sum => constraints.push(total_power_matrix(net)),
        Mode::Individual => constraints.extend(relay_power_matrices(net)),
    }
    Ok(QcqpProblem::new(DVector::from_vec(net.g_s()), constraints))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub v: DVector<f64>,
    /// `(g_sᵗv)²`.
    pub snr_d: f64,
    pub beta: Vec<f64>,
    /// Largest `vᵗAv` over the constraints.
    pub max_constraint: f64,
    pub path: InnerPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InnerPath {
    /// Barrier method on the full constraint set.
    Barrier,
    /// Eigenvalue test shows the power constraint is implied; closed form.
    ClosedForm,
    /// Closed form on the eavesdropper constraint alone, power constraint checked afterwards.
    ClosedFormChecked,
    /// Both constraints needed; barrier method.
    General,
}

impl InnerPath {
    fn flag(self) -> &'static str {
        match self {
            InnerPath::Barrier => "inner=barrier",
            InnerPath::ClosedForm => "inner=closed_form",
            InnerPath::ClosedFormChecked => "inner=closed_form_checked",
            InnerPath::General => "inner=general",
        }
    }
}

fn beta_from_v(net: &NetworkInstance, v: &DVector<f64>) -> Result<Vec<f64>> {
    let omega = transform_to_omega(v.as_slice())?;
    Ok(omega.iter().zip(&net.h_d).map(|(w, d)| w / d).collect())
}

fn max_constraint(p: &QcqpProblem, v: &DVector<f64>) -> f64 {
    p.constraint_values(v).into_iter().fold(f64::MIN, f64::max)
}

/// One eavesdropper under a total budget, given its matrices: maximise `(hᵗv)²`
/// subject to `vᵗCv ≤ 1` and `vᵗD_Tv ≤ 1`.
///
/// When `λ_max(D_T) < λ_min(C)` the power constraint is implied and the
/// Rayleigh direction of `C` is optimal. Otherwise the Rayleigh direction is
/// still optimal if it happens to satisfy the power constraint; failing that
/// both constraints go to the barrier solver.
pub fn fast_path_matrices(
    h: &DVector<f64>,
    c: &DMatrix<f64>,
    d_t: &DMatrix<f64>,
    ws: &mut QcqpWorkspace,
    tol: &Tolerances,
) -> Result<(DVector<f64>, f64, InnerPath)> {
    let lambda_min_c = c.clone().symmetric_eigen().eigenvalues.min();
    let lambda_max_d = d_t.clone().symmetric_eigen().eigenvalues.max();
    if lambda_max_d < lambda_min_c {
        let (v, value) = rayleigh_direction(h, c)?;
        return Ok((v, value, InnerPath::ClosedForm));
    }
    let (v, value) = rayleigh_direction(h, c)?;
    if v.dot(&(d_t * &v)) <= 1.0 {
        return Ok((v, value, InnerPath::ClosedFormChecked));
    }
    let p = QcqpProblem::new(h.clone(), vec![c.clone(), d_t.clone()]);
    let sol = ws.solve(&p, tol)?;
    Ok((sol.v, sol.objective.powi(2), InnerPath::General))
}

/// Closed-form inner solve for `K = 1` with a total budget.
pub fn single_eav_fast_path(net: &NetworkInstance, eta: f64) -> Result<(DVector<f64>, f64, InnerPath)> {
    if net.k != 1 {
        return Err(Error::InvalidParameter(format!(
            "fast path needs exactly one eavesdropper, got {}",
            net.k
        )));
    }
    let p = build_inner_problem(net, eta, Mode::Sum)?;
    fast_path_matrices(
        &p.c,
        &p.constraints[0],
        &p.constraints[1],
        &mut QcqpWorkspace::new(),
        &Tolerances::default(),
    )
}

fn inner_solve_with(
    net: &NetworkInstance,
    eta: f64,
    mode: Mode,
    cfg: &IterativeConfig,
    ws: &mut QcqpWorkspace,
) -> Result<InnerSolution> {
    let p = build_inner_problem(net, eta, mode)?;
    let (v, path) = if cfg.fast_path && mode == Mode::Sum && net.k == 1 {
        let (v, _, path) = fast_path_matrices(&p.c, &p.constraints[0], &p.constraints[1], ws, &cfg.tolerances)?;
        (v, path)
    } else {
        (ws.solve(&p, &cfg.tolerances)?.v, InnerPath::Barrier)
    };
    let snr_d = p.c.dot(&v).powi(2);
    let beta = beta_from_v(net, &v)?;
    Ok(InnerSolution {
        max_constraint: max_constraint(&p, &v),
        v,
        snr_d,
        beta,
        path,
    })
}

/// Inner optimum at a fixed cap `η`.
pub fn inner_solve(net: &NetworkInstance, eta: f64, mode: Mode) -> Result<InnerSolution> {
    let cfg = IterativeConfig {
        fast_path: false,
        ..IterativeConfig::default()
    };
    inner_solve_with(net, eta, mode, &cfg, &mut QcqpWorkspace::new())
}

/// `f(η) = (1 + SNR_d*(η))/(1 + η)`.
pub fn eta_objective(snr_d: f64, eta: f64) -> f64 {
    (1.0 + snr_d) / (1.0 + eta)
}

/// Search range `[η_l, η_max]` and tolerance `δ` implied by `cfg`.
pub fn search_config(eta_max: f64, cfg: &IterativeConfig) -> GoldenSectionConfig {
    let delta = cfg.delta_abs.unwrap_or(cfg.delta_rel * eta_max);
    GoldenSectionConfig::new(cfg.eta_lo_rel * eta_max, eta_max, delta)
}

/// Solves the power-constrained problem for a degraded network with at least
/// one eavesdropper.
pub fn solve_iterative(net: &NetworkInstance, mode: Mode, cfg: &IterativeConfig) -> Result<SolveResult> {
    net.check()?;
    require_degraded(net)?;
    let eta_max = eta_upper_bound(net, mode)?;
    let mut ws = QcqpWorkspace::new();

    if eta_max == 0.0 {
        // no eavesdropper hears the source through any relay: the cap is irrelevant
        let mut silent = net.clone();
        silent.k = 0;
        silent.h_e.clear();
        let mut constraints = Vec::new();
        match mode {
            Mode::Sum => constraints.push(total_power_matrix(net)),
            Mode::Individual => constraints.extend(relay_power_matrices(net)),
        }
        let p = QcqpProblem::new(DVector::from_vec(net.g_s()), constraints);
        let sol = ws.solve(&p, &cfg.tolerances)?;
        let diagnostics = Diagnostics {
            iterations: Some(1),
            eta_max: Some(0.0),
            inner_residual: Some(sol.gap),
            flags: vec!["eavesdroppers silent".into()],
            ..Diagnostics::default()
        };
        return SolveResult::evaluate(net, beta_from_v(net, &sol.v)?, mode.method(), diagnostics);
    }

    let gs_cfg = search_config(eta_max, cfg);
    let mut history = Vec::new();
    let mut best: Option<(f64, InnerSolution)> = None;
    let outcome = try_golden_section_max(
        |eta| {
            let inner = inner_solve_with(net, eta, mode, cfg, &mut ws)?;
            let f = eta_objective(inner.snr_d, eta);
            history.push(EtaSample {
                eta,
                inner_objective: inner.snr_d.sqrt(),
                f,
            });
            if best.as_ref().is_none_or(|(fb, _)| f > *fb) {
                best = Some((f, inner));
            }
            Ok(f)
        },
        &gs_cfg,
    )?;
    let (_, inner) = best.expect("golden section evaluates at least twice");
    let rate_star = 0.5 * outcome.f_star.log2();

    let mut flags = vec![inner.path.flag().to_string()];
    if mode == Mode::Sum {
        flags.push("total power budget: individual bounds not enforced".into());
    }
    let diagnostics = Diagnostics {
        iterations: Some(outcome.evaluations),
        eta_star: Some(outcome.eta_best),
        eta_max: Some(eta_max),
        inner_residual: Some((inner.max_constraint - 1.0).max(0.0)),
        resolution_bound: Some(gs_cfg.delta),
        flags,
        search: Some(EtaSearchState {
            bracket: outcome.bracket,
            history,
            eta_star: outcome.eta_star,
            rate_star,
        }),
    };
    let beta = match mode {
        Mode::Sum => inner.beta,
        Mode::Individual => {
            let beta_max = compute_beta_max(net);
            inner.beta.iter().zip(&beta_max).map(|(b, m)| b.clamp(-m, *m)).collect()
        }
    };
    SolveResult::evaluate(net, beta, mode.method(), diagnostics)
}

/// Largest number of `f(η)` evaluations `solve_iterative` may spend.
pub fn evaluation_budget(eta_max: f64, cfg: &IterativeConfig) -> usize {
    let gs = search_config(eta_max, cfg);
    iteration_bound(gs.eta_hi - gs.eta_lo, gs.delta) + 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodalityProbe {
    pub etas: Vec<f64>,
    pub values: Vec<f64>,
    /// Strict local maxima after merging flat stretches.
    pub local_maxima: usize,
}

impl UnimodalityProbe {
    pub fn is_unimodal(&self) -> bool {
        self.local_maxima == 1
    }
}

/// Samples `f(η)` at `points` log-spaced caps in `[η_l, η_max]` and counts the
/// strict local maxima, treating relative changes below `flat_tol` as flat.
pub fn unimodality_probe(
    net: &NetworkInstance,
    mode: Mode,
    points: usize,
    flat_tol: f64,
    cfg: &IterativeConfig,
) -> Result<UnimodalityProbe> {
    let eta_max = eta_upper_bound(net, mode)?;
    if !(eta_max > 0.0) || points < 2 {
        return Err(Error::InvalidParameter("probe needs eta_max > 0 and at least two points".into()));
    }
    let lo = cfg.eta_lo_rel * eta_max;
    let ratio = (eta_max / lo).ln();
    let mut ws = QcqpWorkspace::new();
    let etas: Vec<f64> = (0..points)
        .map(|j| lo * (ratio * j as f64 / (points - 1) as f64).exp())
        .collect();
    let values = etas
        .iter()
        .map(|&eta| inner_solve_with(net, eta, mode, cfg, &mut ws).map(|s| eta_objective(s.snr_d, eta)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(UnimodalityProbe {
        local_maxima: count_local_maxima(&values, flat_tol),
        etas,
        values,
    })
}

/// Strict local maxima of a sampled sequence (endpoints included); steps
/// smaller than `flat_tol·max(1, |y|)` count as flat.
pub fn count_local_maxima(values: &[f64], flat_tol: f64) -> usize {
    // +1 rising, -1 falling, flat steps dropped
    let trend: Vec<i8> = values
        .windows(2)
        .filter_map(|w| {
            let d = w[1] - w[0];
            if d.abs() <= flat_tol * w[0].abs().max(1.0) {
                None
            } else {
                Some(if d > 0.0 { 1 } else { -1 })
            }
        })
        .collect();
    if trend.is_empty() {
        return 1;
    }
    let mut count = usize::from(trend[0] < 0);
    count += trend.windows(2).filter(|w| w[0] > 0 && w[1] < 0).count();
    count += usize::from(*trend.last().unwrap() > 0);
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{evaluate_rate, snr, Receiver};
    use crate::zero_forcing::solve_zero_forcing;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_net(rng: &mut ChaCha8Rng, m: usize, k: usize) -> NetworkInstance {
        let h_d: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.5)).collect();
        NetworkInstance {
            m,
            k,
            h_s: (0..m).map(|_| rng.random_range(0.1..1.5)).collect(),
            h_e: (0..k)
                .map(|_| h_d.iter().map(|d| d * rng.random_range(0.0..0.99)).collect())
                .collect(),
            h_d,
            p_s: rng.random_range(0.5..10.0),
            p_r: (0..m).map(|_| rng.random_range(0.5..5.0)).collect(),
            sigma2: 1.0,
        }
    }

    fn scalar_net(h_s: f64, h_d: f64, h_e: f64, p_r: f64) -> NetworkInstance {
        NetworkInstance {
            m: 1,
            k: 1,
            h_s: vec![h_s],
            h_d: vec![h_d],
            h_e: vec![vec![h_e]],
            p_s: 1.0,
            p_r: vec![p_r],
            sigma2: 1.0,
        }
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform_to_v(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(transform_to_omega(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let v = transform_to_v(&[1.0, 0.0]);
        assert_relative_eq!(v[0], 0.5f64.sqrt(), epsilon = 1e-15);
        let w = transform_to_omega(&v).unwrap();
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-15);
        assert!(transform_to_omega(&[0.6, 0.8]).is_err());
        assert!(transform_to_omega(&[1.5]).is_err());
    }

    proptest! {
        #[test]
        fn transform_round_trip(omega in prop::collection::vec(-10.0f64..10.0, 1..6)) {
            let norm: f64 = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(norm <= 10.0);
            let v = transform_to_v(&omega);
            prop_assert!(v.iter().map(|x| x * x).sum::<f64>() < 1.0);
            let back = transform_to_omega(&v).unwrap();
            for (a, b) in back.iter().zip(&omega) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn transform_preserves_destination_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let net = {
                let (m, k) = (rng.random_range(1..6), 1);
                random_net(&mut rng, m, k)
            };
            let beta: Vec<f64> = compute_beta_max(&net).iter().map(|b| b * rng.random_range(-1.0..1.0)).collect();
            let omega: Vec<f64> = beta.iter().zip(&net.h_d).map(|(b, d)| b * d).collect();
            let v = transform_to_v(&omega);
            let lin: f64 = net.g_s().iter().zip(&v).map(|(g, x)| g * x).sum();
            let direct = snr(&net, &beta, Receiver::Destination).unwrap();
            assert!((lin * lin - direct).abs() <= 1e-9 * direct.max(1e-300));
        }
    }

    #[test]
    fn eta_bound_examples() {
        let net = scalar_net(1.0, 2.0, 1.0, 2.0);
        // β_max = sqrt(2/(1+1)) = 1 → β_tot = 1
        assert_relative_eq!(eta_upper_bound(&net, Mode::Sum).unwrap(), 0.5, epsilon = 1e-15);

        let mut big = net.clone();
        big.p_r = vec![1e12];
        assert_relative_eq!(eta_upper_bound(&big, Mode::Sum).unwrap(), 1.0, max_relative = 1e-10);

        let mut none = net.clone();
        none.k = 0;
        none.h_e.clear();
        assert!(matches!(eta_upper_bound(&none, Mode::Sum), Err(Error::NoEavesdropper(_))));
    }

    #[test]
    fn eta_bound_dominates_sampled_snr() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = random_net(&mut rng, 3, 2);
        let bounds = eta_upper_bounds(&net).unwrap();
        let beta_max = compute_beta_max(&net);
        for _ in 0..100_000 {
            let beta: Vec<f64> = beta_max.iter().map(|b| b * rng.random_range(-1.0..1.0)).collect();
            for (k, bound) in bounds.iter().enumerate() {
                assert!(snr(&net, &beta, Receiver::Eavesdropper(k)).unwrap() <= *bound * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn inner_problem_shapes() {
        let net = scalar_net(1.0, 2.0, 1.0, 2.0);
        let p = build_inner_problem(&net, 0.25, Mode::Sum).unwrap();
        // C = 0.25/0.25 + 1 - 0.25
        assert_relative_eq!(p.constraints[0][(0, 0)], 1.75, epsilon = 1e-15);
        assert_eq!(p.constraints.len(), 2);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let m = rng.random_range(1..6);
            let k = rng.random_range(1..4);
            let net = random_net(&mut rng, m, k);
            assert_eq!(build_inner_problem(&net, 0.1, Mode::Sum).unwrap().constraints.len(), k + 1);
            let p = build_inner_problem(&net, rng.random_range(1e-6..10.0), Mode::Individual).unwrap();
            assert_eq!(p.constraints.len(), k + m);
            for a in &p.constraints[..k] {
                assert!(a.clone().symmetric_eigen().eigenvalues.min() > 0.0);
            }
        }

        let bad = scalar_net(1.0, 1.0, 1.0, 1.0);
        assert!(matches!(build_inner_problem(&bad, 0.1, Mode::Sum), Err(Error::NotDegraded { .. })));
    }

    #[test]
    fn single_relay_without_eavesdropper_constraint_binding() {
        // huge cap: only the power constraint matters; β² ≤ 1 gives SNR_d = 1/2
        let net = scalar_net(1.0, 1.0, 0.5, 2.0);
        let s = inner_solve(&net, 1e9, Mode::Sum).unwrap();
        assert_relative_eq!(s.v[0], 0.5f64.sqrt(), epsilon = 1e-8);
        assert_relative_eq!(s.snr_d, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn inner_solution_honours_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let net = {
                let (m, k) = (rng.random_range(1..6), rng.random_range(1..4));
                random_net(&mut rng, m, k)
            };
            let eta_max = eta_upper_bound(&net, Mode::Sum).unwrap();
            let eta = eta_max * rng.random_range(1e-4..1.0);
            for mode in [Mode::Sum, Mode::Individual] {
                let s = inner_solve(&net, eta, mode).unwrap();
                let eval = evaluate_rate(&net, &s.beta).unwrap();
                for e in &eval.snr_e {
                    assert!(*e <= eta + 1e-8 * (1.0 + eta));
                }
                assert!((eval.snr_d - s.snr_d).abs() <= 1e-9 * s.snr_d);
                let beta_max = compute_beta_max(&net);
                match mode {
                    Mode::Sum => {
                        let used: f64 = s.beta.iter().map(|b| b * b).sum();
                        assert!(used <= beta_max.iter().map(|b| b * b).sum::<f64>() * (1.0 + 1e-9));
                    }
                    Mode::Individual => {
                        for (b, m) in s.beta.iter().zip(&beta_max) {
                            assert!(b.abs() <= m * (1.0 + 1e-9));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_cap_approaches_zero_forcing() {
        // leakage amplitude scales like sqrt(η), so the gap closes like sqrt(η)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let net = random_net(&mut rng, 4, 2);
            let zf = solve_zero_forcing(&net).unwrap();
            let mut last_gap = f64::INFINITY;
            for eta in [1e-4, 1e-6, 1e-8, 1e-10] {
                let s = inner_solve(&net, eta, Mode::Individual).unwrap();
                assert!(s.snr_d >= zf.snr_d - 1e-9);
                let capped = 0.5 * eta_objective(s.snr_d, eta).log2();
                let gap = (capped - zf.secrecy_rate).abs();
                assert!(gap <= 0.15 * last_gap + 1e-9, "eta {eta}: {gap} after {last_gap}");
                last_gap = gap;
            }
            assert!(last_gap <= 5e-4, "{last_gap}");
        }
    }

    #[test]
    fn fast_path_examples() {
        let h = DVector::from_vec(vec![1.0, -2.0]);
        let c = DMatrix::identity(2, 2) * 2.0;
        let d = DMatrix::identity(2, 2) * 1.5;
        let mut ws = QcqpWorkspace::new();
        let tol = Tolerances::default();
        let (_, value, path) = fast_path_matrices(&h, &c, &d, &mut ws, &tol).unwrap();
        assert_eq!(path, InnerPath::ClosedForm);
        assert_relative_eq!(value, 2.5, epsilon = 1e-12);

        // power constraint binding: C = I, D_T = diag(1, 4), h along the tight axis
        let c = DMatrix::identity(2, 2);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]));
        let h = DVector::from_vec(vec![0.0, 1.0]);
        let (v, value, path) = fast_path_matrices(&h, &c, &d, &mut ws, &tol).unwrap();
        assert_eq!(path, InnerPath::General);
        assert_relative_eq!(v[1].abs(), 0.5, epsilon = 1e-7);
        assert_relative_eq!(value, 0.25, epsilon = 1e-7);
    }

    #[test]
    fn fast_path_agrees_with_barrier() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let net = {
                let (m, k) = (rng.random_range(1..5), 1);
                random_net(&mut rng, m, k)
            };
            let eta_max = eta_upper_bound(&net, Mode::Sum).unwrap();
            let eta = eta_max * rng.random_range(1e-4..1.0);
            let (v, value, path) = single_eav_fast_path(&net, eta).unwrap();
            seen.insert(path);
            let reference = inner_solve(&net, eta, Mode::Sum).unwrap();
            assert!((value - reference.snr_d).abs() <= 1e-7 * (1.0 + value), "{path:?}");
            let lin: f64 = net.g_s().iter().zip(v.iter()).map(|(g, x)| g * x).sum();
            assert_relative_eq!(lin * lin, value, max_relative = 1e-9);
        }
        assert!(seen.len() >= 2, "{seen:?}");
    }

    #[test]
    fn single_relay_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let net = random_net(&mut rng, 1, 1);
            let bmax = compute_beta_max(&net)[0];
            let n = 20001;
            let grid = (0..n)
                .map(|i| evaluate_rate(&net, &[bmax * i as f64 / (n - 1) as f64]).unwrap().secrecy_rate)
                .fold(f64::NEG_INFINITY, f64::max);
            for mode in [Mode::Sum, Mode::Individual] {
                let r = solve_iterative(&net, mode, &IterativeConfig::default()).unwrap();
                assert!((r.secrecy_rate - grid).abs() <= 1e-4, "{mode:?}: {} vs {grid}", r.secrecy_rate);
            }
        }
    }

    #[test]
    fn search_reports_consistent_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let net = {
                let (m, k) = (rng.random_range(2..6), rng.random_range(1..4));
                random_net(&mut rng, m, k)
            };
            let cfg = IterativeConfig::default();
            for mode in [Mode::Sum, Mode::Individual] {
                let r = solve_iterative(&net, mode, &cfg).unwrap();
                let d = &r.diagnostics;
                let search = d.search.as_ref().unwrap();
                assert!(d.iterations.unwrap() <= evaluation_budget(d.eta_max.unwrap(), &cfg));
                assert!(r.secrecy_rate >= search.rate_star - 1e-9);
                assert!(search.bracket.1 - search.bracket.0 <= cfg.delta_rel * d.eta_max.unwrap());
                let eta_lo = cfg.eta_lo_rel * d.eta_max.unwrap();
                assert!(search.history.iter().all(|s| s.eta > eta_lo && s.f.is_finite()));
                if mode == Mode::Individual {
                    assert!(r.beta.is_feasible());
                }
            }
        }
    }

    #[test]
    fn sum_dominates_individual() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let net = {
                let (m, k) = (rng.random_range(2..6), rng.random_range(1..4));
                random_net(&mut rng, m, k)
            };
            let cfg = IterativeConfig::default();
            let sum = solve_iterative(&net, Mode::Sum, &cfg).unwrap();
            let ind = solve_iterative(&net, Mode::Individual, &cfg).unwrap();
            assert!(sum.secrecy_rate + 1e-6 >= ind.secrecy_rate);
        }
    }

    #[test]
    fn objective_sign_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let net = random_net(&mut rng, 3, 2);
            let mut flipped = net.clone();
            flipped.h_s.iter_mut().for_each(|x| *x = -*x);
            let cfg = IterativeConfig::default();
            let a = solve_iterative(&net, Mode::Individual, &cfg).unwrap();
            let b = solve_iterative(&flipped, Mode::Individual, &cfg).unwrap();
            assert!((a.secrecy_rate - b.secrecy_rate).abs() <= 1e-9);
        }
    }

    #[test]
    fn silent_eavesdropper() {
        let mut net = scalar_net(1.0, 1.0, 0.0, 2.0);
        net.h_e = vec![vec![0.0]];
        let r = solve_iterative(&net, Mode::Individual, &IterativeConfig::default()).unwrap();
        assert_relative_eq!(r.snr_d, 0.5, epsilon = 1e-8);
        assert!(r.diagnostics.flags.iter().any(|f| f.contains("silent")));
    }

    #[test]
    fn local_maxima_counting() {
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0, 2.0, 1.0], 1e-9), 1);
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0], 1e-9), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0], 1e-9), 1);
        assert_eq!(count_local_maxima(&[1.0, 1.0, 1.0], 1e-9), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 1.0, 2.0, 1.0], 1e-9), 2);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 2.0 + 1e-12, 2.0, 1.0], 1e-9), 1);
    }

    #[test]
    fn probe_is_unimodal_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let net = {
                let (m, k) = (rng.random_range(2..6), rng.random_range(1..4));
                random_net(&mut rng, m, k)
            };
            let probe = unimodality_probe(&net, Mode::Individual, 64, 1e-9, &IterativeConfig::default()).unwrap();
            assert!(probe.is_unimodal(), "{:?}", probe.values);
        }
    }
}
