//! Zero-forcing amplification under individual relay power constraints.
//!
//! With `ω_i = h_i,d·β_i` the eavesdropper signal vanishes when
//! `Σ_i h_s,i·ρ_i,k·ω_i = 0` for every `k` (`ρ_i,k = h_i,k/h_i,d`). Writing
//! `v = g_sᵗω` and `w = [ω/v, 1/v]` turns the destination SNR maximisation into
//!
//! ```text
//! minimise wᵗw   s.t.  [g_sᵗ 0]·w = 1,  [H_ρ 0]·w = 0,
//!                      |w_i| ≤ ω_i,max·w_{M+1}
//! ```
//!
//! and the optimum gives `SNR_d = 1/(wᵗw)`. (A maximisation of `wᵗw` would be
//! unbounded; the ratio `(1+ωᵗω)/v²` being minimised is exactly `wᵗw`.)
//!
//! The equalities are eliminated with an SVD, leaving a least-distance problem
//! over the null space that is solved through non-negative least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::{compute_beta_max, Diagnostics, Method, NetworkInstance, SolveResult};
use crate::numerics::least_distance;

#[derive(Debug, Clone, PartialEq)]
pub struct ZfProgram {
    /// `(K+1)×(M+1)`: the row `[g_sᵗ, 0]` over the rows `[h_s ⊙ ρ_k, 0]`.
    pub h_tilde: DMatrix<f64>,
    /// `2M×(M+1)`: `H_β·w ≤ 0` encodes `−ω_i,max·w_{M+1} ≤ w_i ≤ ω_i,max·w_{M+1}`.
    pub h_beta: DMatrix<f64>,
    pub dim: usize,
}

/// Relative singular-value cutoff for the rank of `h_tilde`.
const RANK_TOL: f64 = 1e-12;
/// The equality system is declared inconsistent above this relative residual.
const CONSISTENCY_TOL: f64 = 1e-9;

pub fn build_zf_program(net: &NetworkInstance) -> Result<ZfProgram> {
    net.check()?;
    if net.k == 0 {
        return Err(Error::NoEavesdropper(
            "zero forcing needs at least one eavesdropper; use an unconstrained solver",
        ));
    }
    let (m, k) = (net.m, net.k);
    let g = net.g_s();
    let mut h_tilde = DMatrix::zeros(k + 1, m + 1);
    for i in 0..m {
        h_tilde[(0, i)] = g[i];
        for e in 0..k {
            h_tilde[(e + 1, i)] = net.h_s[i] * net.h_e[e][i] / net.h_d[i];
        }
    }
    let beta_max = compute_beta_max(net);
    let mut h_beta = DMatrix::zeros(2 * m, m + 1);
    for i in 0..m {
        let wmax = net.h_d[i].abs() * beta_max[i];
        h_beta[(2 * i, i)] = 1.0;
        h_beta[(2 * i, m)] = -wmax;
        h_beta[(2 * i + 1, i)] = -1.0;
        h_beta[(2 * i + 1, m)] = -wmax;
    }
    Ok(ZfProgram {
        h_tilde,
        h_beta,
        dim: m + 1,
    })
}

/// Optimal `w` of the program together with the equality residual and NNLS iterations.
pub fn solve_zf_program(prog: &ZfProgram) -> Result<(DVector<f64>, f64, usize)> {
    let n = prog.dim;
    let rows = prog.h_tilde.nrows();
    let mut b = DVector::zeros(rows);
    b[0] = 1.0;

    // pad to square so the SVD exposes the full null space
    let size = rows.max(n);
    let mut a = DMatrix::zeros(size, n);
    a.view_mut((0, 0), (rows, n)).copy_from(&prog.h_tilde);
    let svd = a.svd(true, true);
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let sigma = &svd.singular_values;
    let cutoff = RANK_TOL * sigma.max().max(f64::MIN_POSITIVE);

    let mut padded_b = DVector::zeros(size);
    padded_b.rows_mut(0, rows).copy_from(&b);
    let mut z0 = DVector::zeros(n);
    let mut null_cols = Vec::new();
    for j in 0..n {
        if sigma[j] > cutoff {
            z0 += v_t.row(j).transpose() * (u.column(j).dot(&padded_b) / sigma[j]);
        } else {
            null_cols.push(j);
        }
    }
    let eq_residual = (&prog.h_tilde * &z0 - &b).amax();
    if eq_residual > CONSISTENCY_TOL {
        return Err(Error::ZeroForcingInfeasible);
    }

    let basis = DMatrix::from_fn(n, null_cols.len(), |r, c| v_t[(null_cols[c], r)]);
    // z = z0 + N·y; H_β·z ≤ 0  ⇔  (−H_β·N)·y ≥ H_β·z0
    let g = -(&prog.h_beta * &basis);
    let h = &prog.h_beta * &z0;
    let (y, iterations) = least_distance(&g, &h)?.ok_or(Error::ZeroForcingInfeasible)?;
    let mut w = z0 + basis * y;
    if w[n - 1] < 0.0 {
        w = -w;
    }
    if !(w[n - 1] > 0.0) {
        return Err(Error::ZeroForcingInfeasible);
    }
    let residual = (&prog.h_tilde * &w - &b).amax();
    Ok((w, residual, iterations))
}

pub fn solve_zero_forcing(net: &NetworkInstance) -> Result<SolveResult> {
    let prog = build_zf_program(net)?;
    let (w, residual, iterations) = solve_zf_program(&prog)?;
    let m = net.m;
    let scale = w[m];
    let beta_max = compute_beta_max(net);
    let beta: Vec<f64> = (0..m)
        .map(|i| (w[i] / scale / net.h_d[i]).clamp(-beta_max[i], beta_max[i]))
        .collect();
    let diagnostics = Diagnostics {
        iterations: Some(iterations),
        inner_residual: Some(residual),
        flags: vec![format!("objective={:e}", w.norm_squared())],
        ..Diagnostics::default()
    };
    SolveResult::evaluate(net, beta, Method::ZeroForcing, diagnostics)
}
