//! Closed-form optimum for the symmetric network: every relay sees the same
//! source, destination and eavesdropper gains, with a single eavesdropper.
//!
//! At the optimum all relays use the same amplification β, and the network
//! collapses to one equivalent relay with gains `√M·h_s`, `√M·h_d`, `√M·h_e`.
//! Writing `x = β²`, the rate ratio is
//!
//! ```text
//! (1 + a·H_d·x/(1 + H_d·x)) / (1 + a·H_e·x/(1 + H_e·x)),   a = γ_s·M·h_s², H_l = M·h_l²
//! ```
//!
//! whose only stationary point on `x > 0` is `x* = 1/sqrt((1 + a)·H_d·H_e)`.
//! It is a maximum when `|h_e| < |h_d|`, so `β* = min(β_max, sqrt(x*))`.
//!
//! In the form usually quoted for the single relay this is
//! `β* = [σ²/(P_R·M²·h_d²·h_e²)]^(1/4)·β_max^(1/2)` where `P_R` is the
//! equivalent relay's power, `P_r·(M·h_s²·P_s + σ²)/(h_s²·P_s + σ²)`. Taking
//! `P_R = P_r` literally is only correct for `M = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{beta_max_scalar, Diagnostics, Method, NetworkInstance, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricParams {
    pub m: usize,
    pub h_s: f64,
    pub h_d: f64,
    pub h_e: f64,
    pub p_s: f64,
    /// Power budget of each relay.
    pub p_r: f64,
    pub sigma2: f64,
}

impl SymmetricParams {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if self.h_d == 0.0 {
            return Err(Error::InvalidParameter("h_d must be non-zero".into()));
        }
        if !(self.p_s > 0.0 && self.p_r > 0.0 && self.sigma2 > 0.0) {
            return Err(Error::InvalidParameter("powers and noise variance must be > 0".into()));
        }
        Ok(())
    }

    pub fn gamma_s(&self) -> f64 {
        self.p_s / self.sigma2
    }

    pub fn beta_max(&self) -> f64 {
        beta_max_scalar(self.p_r, self.h_s, self.p_s, self.sigma2)
    }

    /// Equivalent single-relay power `P_R` under which the single-relay
    /// bound coincides with the per-relay bound.
    pub fn equivalent_relay_power(&self) -> f64 {
        let hs2 = self.h_s * self.h_s;
        self.p_r * (self.m as f64 * hs2 * self.p_s + self.sigma2) / (hs2 * self.p_s + self.sigma2)
    }

    pub fn to_network(&self) -> NetworkInstance {
        NetworkInstance {
            m: self.m,
            k: 1,
            h_s: vec![self.h_s; self.m],
            h_d: vec![self.h_d; self.m],
            h_e: vec![vec![self.h_e; self.m]],
            p_s: self.p_s,
            p_r: vec![self.p_r; self.m],
            sigma2: self.sigma2,
        }
    }

    /// Recognises a symmetric single-eavesdropper network.
    pub fn from_network(net: &NetworkInstance) -> Result<Self> {
        net.check()?;
        if net.k != 1 {
            return Err(Error::InvalidParameter(format!(
                "symmetric solver needs exactly one eavesdropper, got {}",
                net.k
            )));
        }
        let uniform = |xs: &[f64]| xs.iter().all(|x| (x - xs[0]).abs() <= 1e-12 * xs[0].abs().max(1.0));
        if !(uniform(&net.h_s) && uniform(&net.h_d) && uniform(&net.h_e[0]) && uniform(&net.p_r)) {
            return Err(Error::InvalidParameter("network is not symmetric".into()));
        }
        Ok(Self {
            m: net.m,
            h_s: net.h_s[0],
            h_d: net.h_d[0],
            h_e: net.h_e[0][0],
            p_s: net.p_s,
            p_r: net.p_r[0],
            sigma2: net.sigma2,
        })
    }
}

/// Secrecy rate with every relay amplifying by `beta`, via the ν/μ ratio form.
pub fn symmetric_rate(params: &SymmetricParams, beta: f64) -> f64 {
    let m = params.m as f64;
    let sum = m * beta;
    let sum_sq = m * beta * beta;
    let coherent = params.gamma_s() * params.h_s * params.h_s * sum * sum;
    // ν = 1/h_d², μ = 1/h_e²; written multiplied through so h_e = 0 is safe
    let snr_d = coherent * params.h_d * params.h_d / (1.0 + params.h_d * params.h_d * sum_sq);
    let snr_e = coherent * params.h_e * params.h_e / (1.0 + params.h_e * params.h_e * sum_sq);
    0.5 * ((1.0 + snr_d) / (1.0 + snr_e)).log2()
}

/// Unconstrained stationary point `sqrt(x*)`; infinite when `h_e = 0`.
pub fn stationary_beta(params: &SymmetricParams) -> f64 {
    let m = params.m as f64;
    let a = params.gamma_s() * m * params.h_s * params.h_s;
    let product = (1.0 + a) * m * m * params.h_d.powi(2) * params.h_e.powi(2);
    if product == 0.0 {
        f64::INFINITY
    } else {
        product.powf(-0.25)
    }
}

/// Optimal common amplification and the resulting rate.
pub fn optimal_beta(params: &SymmetricParams) -> Result<(f64, SolveResult)> {
    params.validate()?;
    let beta_max = params.beta_max();
    let mut diagnostics = Diagnostics::default();
    let (hd, he) = (params.h_d.abs(), params.h_e.abs());

    let beta = if he == hd {
        diagnostics.flags.push("degenerate: h_e equals h_d, rate is zero".into());
        beta_max
    } else if he > hd {
        log::warn!("eavesdropper gain exceeds destination gain; no positive secrecy rate");
        diagnostics
            .flags
            .push("not degraded: |h_e| > |h_d|, relays switched off".into());
        0.0
    } else {
        let stationary = stationary_beta(params);
        if stationary < beta_max {
            diagnostics.flags.push("interior".into());
            stationary
        } else {
            diagnostics.flags.push("boundary".into());
            beta_max
        }
    };

    let result = SolveResult::evaluate(
        &params.to_network(),
        vec![beta; params.m],
        Method::Symmetric,
        diagnostics,
    )?;
    Ok((beta, result))
}

pub fn solve_symmetric(net: &NetworkInstance) -> Result<SolveResult> {
    optimal_beta(&SymmetricParams::from_network(net)?).map(|(_, r)| r)
}
