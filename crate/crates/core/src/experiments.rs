//! Random network generation and parameter sweeps averaged over many networks.

use std::io::Write;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iterative::{solve_iterative, IterativeConfig, Mode};
use crate::network::{Method, NetworkInstance, SolveResult};
use crate::oracle::{grid_search, multistart_search, OracleConfig};
use crate::scaled::{detect_alpha, solve_scaled};
use crate::symmetric::solve_symmetric;
use crate::zero_forcing::solve_zero_forcing;

/// Identifier of the generator behind every random draw, written to sweep metadata.
pub const RNG_ID: &str = "chacha8 (rand_chacha 0.9, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    /// Scale `σ_R` of the Rayleigh gains (density `x/σ_R²·exp(−x²/2σ_R²)`).
    pub rayleigh_scale: f64,
    pub p_s: f64,
    /// Power budget of every relay.
    pub p_r: f64,
    pub sigma2: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            rayleigh_scale: 0.5,
            p_s: 1.0,
            p_r: 5.0,
            sigma2: 1.0,
        }
    }
}

fn rayleigh(rng: &mut impl Rng, scale: f64) -> f64 {
    let u: f64 = rng.random();
    scale * (-2.0 * (1.0 - u).ln()).sqrt()
}

/// Random degraded network: `h_s`, `h_d` i.i.d. Rayleigh and
/// `h_e[k][i] = h_d[i]·u` with `u` uniform on the open unit interval.
///
/// Draws are relay-major (`h_s,i`, `h_i,d`, then `u` for each eavesdropper),
/// so with a fixed seed and `k` the first `m` relays of a larger network equal
/// the network with `m` relays.
pub fn gen_network(m: usize, k: usize, seed: u64, params: &GenParams) -> Result<NetworkInstance> {
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one relay".into()));
    }
    if !(params.rayleigh_scale > 0.0) {
        return Err(Error::InvalidParameter("rayleigh scale must be > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h_s = Vec::with_capacity(m);
    let mut h_d = Vec::with_capacity(m);
    let mut h_e = vec![Vec::with_capacity(m); k];
    for _ in 0..m {
        h_s.push(rayleigh(&mut rng, params.rayleigh_scale));
        let d = rayleigh(&mut rng, params.rayleigh_scale);
        h_d.push(d);
        for row in h_e.iter_mut() {
            let u: f64 = rng.sample(Open01);
            row.push(d * u);
        }
    }
    let net = NetworkInstance {
        m,
        k,
        h_s,
        h_d,
        h_e,
        p_s: params.p_s,
        p_r: vec![params.p_r; m],
        sigma2: params.sigma2,
    };
    net.check()?;
    Ok(net)
}

/// SplitMix64 finaliser, a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `splitmix64(splitmix64(base) ^ (point << 32 | trial))`. For a fixed base this is
/// injective in `(point, trial)` as long as both fit in 32 bits.
pub fn trial_seed(base: u64, point: u32, trial: u32) -> u64 {
    splitmix64(splitmix64(base) ^ ((point as u64) << 32 | trial as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    SourcePower,
    RelayCount,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::SourcePower => "source_power",
            SweepVar::RelayCount => "relay_count",
        }
    }
}

fn default_trials() -> usize {
    100
}
fn default_methods() -> Vec<Method> {
    vec![Method::SumIterative, Method::IndividualIterative, Method::ZeroForcing]
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub sweep: SweepVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    /// Relay count when sweeping source power.
    #[serde(default = "default_relays")]
    pub relays: usize,
    #[serde(default = "default_eavesdroppers")]
    pub eavesdroppers: usize,
    #[serde(default)]
    pub gen: GenParams,
    /// Report `max(rate, 0)` instead of the raw rate.
    #[serde(default = "default_true")]
    pub clamp: bool,
    /// Reuse the same networks (trial seeds) at every sweep point.
    #[serde(default)]
    pub common_random_numbers: bool,
}

fn default_relays() -> usize {
    5
}
fn default_eavesdroppers() -> usize {
    3
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.steps < 2 {
            return bad(format!("steps must be >= 2, got {}", self.steps));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return bad("sweep range must be finite".into());
        }
        if self.trials > u32::MAX as usize || self.steps > u32::MAX as usize {
            return bad("too many trials or steps".into());
        }
        match self.sweep {
            SweepVar::SourcePower => {
                if !(self.from > 0.0 && self.to > 0.0) {
                    return bad("source power must be > 0".into());
                }
            }
            SweepVar::RelayCount => {
                for v in self.values() {
                    if v < 1.0 || v.fract() != 0.0 {
                        return bad(format!("relay count {v} is not a positive integer"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Evenly spaced sweep values from `from` to `to` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps.max(2);
        (0..n)
            .map(|j| {
                if j == n - 1 {
                    self.to
                } else {
                    self.from + (self.to - self.from) * j as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    fn network_at(&self, value: f64, seed: u64) -> Result<NetworkInstance> {
        match self.sweep {
            SweepVar::SourcePower => {
                let gen = GenParams { p_s: value, ..self.gen };
                gen_network(self.relays, self.eavesdroppers, seed, &gen)
            }
            SweepVar::RelayCount => gen_network(value as usize, self.eavesdroppers, seed, &self.gen),
        }
    }
}

/// Per-method knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub iterative: IterativeConfig,
    pub oracle: OracleConfig,
    /// Eavesdropper/destination gain ratio for the scaled solver; detected when absent.
    pub alpha: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            iterative: IterativeConfig::default(),
            oracle: OracleConfig::default(),
            alpha: None,
        }
    }
}

/// Runs one solver on `net`.
pub fn run_method(net: &NetworkInstance, method: Method, opts: &SolverOptions) -> Result<SolveResult> {
    match method {
        Method::Symmetric => solve_symmetric(net),
        Method::ScaledAlpha => {
            let alpha = opts
                .alpha
                .or_else(|| detect_alpha(net))
                .ok_or_else(|| Error::NotScaled("eavesdropper gains are not a multiple of h_d".into()))?;
            solve_scaled(net, alpha)
        }
        Method::ZeroForcing => solve_zero_forcing(net),
        Method::SumIterative => solve_iterative(net, Mode::Sum, &opts.iterative),
        Method::IndividualIterative => solve_iterative(net, Mode::Individual, &opts.iterative),
        Method::OracleGrid => grid_search(net, &opts.oracle),
        Method::OracleMultistart => multistart_search(net, &opts.oracle),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub value: f64,
    pub method: Method,
    pub mean_rate_bits: f64,
    pub std_rate_bits: f64,
    pub mean_iters: f64,
    /// Trials that produced a rate.
    pub trials: usize,
    pub failures: usize,
}

impl ResultRow {
    /// Standard error of the mean rate.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            self.std_rate_bits / (self.trials as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTrial {
    pub value: f64,
    pub method: Method,
    pub trial: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub skipped: Vec<SkippedTrial>,
}

/// Compensated (Kahan–Babuška) sum, accumulated in iteration order.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Mean and sample standard deviation (0 for a single sample).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = kahan_sum(xs.iter().copied()) / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = kahan_sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
    (mean, var.sqrt())
}

/// Averages every method over `spec.trials` networks at each sweep value.
///
/// Trials run in parallel; results are gathered by trial index before
/// averaging, so the output does not depend on scheduling. A solver error
/// drops that trial for that method and is reported in `skipped`.
pub fn run_sweep(spec: &ExperimentSpec, opts: &SolverOptions) -> Result<SweepOutput> {
    spec.validate()?;
    let mut out = SweepOutput::default();
    for (point, value) in spec.values().into_iter().enumerate() {
        let point_key = if spec.common_random_numbers { 0 } else { point as u32 };
        type TrialOutcome = Vec<std::result::Result<(f64, usize), String>>;
        let per_trial: Vec<TrialOutcome> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(spec.seed, point_key, trial as u32);
                let net = match spec.network_at(value, seed) {
                    Ok(net) => net,
                    Err(e) => return vec![Err(e.to_string()); spec.methods.len()],
                };
                let mut trial_opts = *opts;
                trial_opts.oracle.seed = seed;
                spec.methods
                    .iter()
                    .map(|&method| {
                        run_method(&net, method, &trial_opts)
                            .map(|r| {
                                let rate = if spec.clamp { r.clamped_rate() } else { r.secrecy_rate };
                                (rate, r.diagnostics.iterations.unwrap_or(0))
                            })
                            .map_err(|e| e.to_string())
                    })
                    .collect()
            })
            .collect();

        for (mi, &method) in spec.methods.iter().enumerate() {
            let mut rates = Vec::with_capacity(spec.trials);
            let mut iters = Vec::with_capacity(spec.trials);
            for (trial, outcomes) in per_trial.iter().enumerate() {
                match &outcomes[mi] {
                    Ok((rate, it)) => {
                        rates.push(*rate);
                        iters.push(*it as f64);
                    }
                    Err(reason) => out.skipped.push(SkippedTrial {
                        value,
                        method,
                        trial,
                        reason: reason.clone(),
                    }),
                }
            }
            let (mean, std) = mean_std(&rates);
            let (mean_iters, _) = mean_std(&iters);
            out.rows.push(ResultRow {
                sweep_var: spec.sweep,
                value,
                method,
                mean_rate_bits: mean,
                std_rate_bits: std,
                mean_iters,
                trials: rates.len(),
                failures: spec.trials - rates.len(),
            });
        }
    }
    Ok(out)
}

pub const CSV_HEADER: [&str; 8] = [
    "sweep_var",
    "value",
    "method",
    "mean_rate_bits",
    "std_rate_bits",
    "mean_iters",
    "trials",
    "failures",
];

/// Writes rows as CSV with a fixed column order and number formats.
pub fn write_csv(rows: &[ResultRow], out: impl Write) -> Result<()> {
    let io_err = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.sweep_var.name().to_string(),
            format!("{}", r.value),
            r.method.name().to_string(),
            format!("{:.9}", r.mean_rate_bits),
            format!("{:.9}", r.std_rate_bits),
            format!("{:.3}", r.mean_iters),
            r.trials.to_string(),
            r.failures.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))?;
    Ok(())
}
