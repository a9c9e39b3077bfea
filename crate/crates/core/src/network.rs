//! Problem datum for the two-hop diamond network, the per-relay amplification
//! bounds, and SNR / secrecy-rate evaluation.
//!
//! Every SNR in this crate is the post-detection SNR of the coherent source
//! component at a receiver, including the amplified relay noise:
//!
//! ```text
//! SNR_l = (Σ h_s,i β_i h_i,l)² / (1 + Σ (β_i h_i,l)²) · P_s/σ²
//! ```
//!
//! The factor `P_s/σ²` is applied exactly once, here. Solvers that work in the
//! pre-scaled `g_s = sqrt(P_s/σ²)·h_s` coordinates get it from
//! [`NetworkInstance::g_s`].

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `|β_i| ≤ β_i,max`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const KNOWN_KEYS: [&str; 8] = ["m", "k", "h_s", "h_d", "h_e", "p_s", "p_r", "sigma2"];

/// Channel gains, powers and noise variance of one network realisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance {
    /// Number of relays.
    pub m: usize,
    /// Number of eavesdroppers.
    pub k: usize,
    /// Source to relay gains.
    pub h_s: Vec<f64>,
    /// Relay to destination gains.
    pub h_d: Vec<f64>,
    /// Relay to eavesdropper gains, one row of length `m` per eavesdropper.
    pub h_e: Vec<Vec<f64>>,
    /// Source power.
    pub p_s: f64,
    /// Per-relay power budgets.
    pub p_r: Vec<f64>,
    /// Noise variance at every receiver.
    pub sigma2: f64,
}

/// Which receiver an SNR is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Destination,
    Eavesdropper(usize),
}

/// Structured outcome of [`NetworkInstance::validate`]. Never aborts.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    /// Relays whose destination gain is exactly zero.
    pub zero_destination_gains: Vec<usize>,
    /// `|h_e[k][i]| < |h_d[i]|` for every relay and eavesdropper.
    pub degraded: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

impl NetworkInstance {
    /// `P_s/σ²`.
    pub fn gamma_s(&self) -> f64 {
        self.p_s / self.sigma2
    }

    /// Pre-scaled source gains `g_s,i = sqrt(P_s/σ²)·h_s,i`.
    pub fn g_s(&self) -> Vec<f64> {
        let scale = self.gamma_s().sqrt();
        self.h_s.iter().map(|h| scale * h).collect()
    }

    /// Gains from the relays to the given receiver.
    pub fn receiver_gains(&self, receiver: Receiver) -> &[f64] {
        match receiver {
            Receiver::Destination => &self.h_d,
            Receiver::Eavesdropper(k) => &self.h_e[k],
        }
    }

    /// Checks every structural invariant and returns the first violation.
    pub fn check(&self) -> Result<()> {
        self.check_dimensions()?;
        if !(self.p_s > 0.0) {
            return Err(Error::InvalidNetwork(format!("p_s must be > 0, got {}", self.p_s)));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::InvalidNetwork(format!(
                "sigma2 must be > 0, got {}",
                self.sigma2
            )));
        }
        if let Some(i) = self.p_r.iter().position(|p| !(*p > 0.0)) {
            return Err(Error::InvalidNetwork(format!(
                "p_r[{i}] must be > 0, got {}",
                self.p_r[i]
            )));
        }
        if let Some(i) = self.h_d.iter().position(|h| *h == 0.0) {
            return Err(Error::InvalidNetwork(format!("zero destination gain h_d[{i}]")));
        }
        let finite = self
            .h_s
            .iter()
            .chain(&self.h_d)
            .chain(self.h_e.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidNetwork("non-finite channel gain".into()));
        }
        Ok(())
    }

    fn check_dimensions(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidNetwork("m must be at least 1".into()));
        }
        let dim = |field, got| {
            if got == self.m {
                Ok(())
            } else {
                Err(Error::Dimension {
                    field,
                    expected: self.m,
                    got,
                })
            }
        };
        dim("h_s", self.h_s.len())?;
        dim("h_d", self.h_d.len())?;
        dim("p_r", self.p_r.len())?;
        if self.h_e.len() != self.k {
            return Err(Error::Dimension {
                field: "h_e",
                expected: self.k,
                got: self.h_e.len(),
            });
        }
        for row in &self.h_e {
            dim("h_e", row.len())?;
        }
        Ok(())
    }

    /// Reports dimension errors, zero destination gains and degradedness.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if let Err(e) = self.check_dimensions() {
            report.errors.push(e.to_string());
            return report;
        }
        if let Err(e) = self.check() {
            // zero gains are reported separately below
            if !matches!(&e, Error::InvalidNetwork(msg) if msg.starts_with("zero destination")) {
                report.errors.push(e.to_string());
            }
        }
        report.zero_destination_gains = self
            .h_d
            .iter()
            .enumerate()
            .filter(|(_, h)| **h == 0.0)
            .map(|(i, _)| i)
            .collect();
        for &i in &report.zero_destination_gains {
            report.errors.push(format!("zero destination gain h_d[{i}]"));
        }
        report.degraded = self
            .h_e
            .iter()
            .all(|row| row.iter().zip(&self.h_d).all(|(e, d)| e.abs() < d.abs()));
        report
    }

    /// First eavesdropper/relay pair that breaks `|h_e| < |h_d|`, if any.
    pub fn first_non_degraded(&self) -> Option<(usize, usize)> {
        self.h_e.iter().enumerate().find_map(|(k, row)| {
            row.iter()
                .zip(&self.h_d)
                .position(|(e, d)| !(e.abs() < d.abs()))
                .map(|i| (i, k))
        })
    }
}

/// `β_max = sqrt(P_i / (h_s,i²·P_s + σ²))` for a single relay.
pub fn beta_max_scalar(p_i: f64, h_s: f64, p_s: f64, sigma2: f64) -> f64 {
    (p_i / (h_s * h_s * p_s + sigma2)).sqrt()
}

/// Per-relay amplification bounds.
pub fn compute_beta_max(net: &NetworkInstance) -> Vec<f64> {
    net.p_r
        .iter()
        .zip(&net.h_s)
        .map(|(&p, &h)| beta_max_scalar(p, h, net.p_s, net.sigma2))
        .collect()
}

fn check_beta_len(net: &NetworkInstance, beta: &[f64]) -> Result<()> {
    if beta.len() != net.m {
        return Err(Error::Dimension {
            field: "beta",
            expected: net.m,
            got: beta.len(),
        });
    }
    Ok(())
}

pub(crate) fn snr_unchecked(h_s: &[f64], h_l: &[f64], beta: &[f64], gamma_s: f64) -> f64 {
    let mut coherent = 0.0;
    let mut noise = 1.0;
    for ((&hs, &hl), &b) in h_s.iter().zip(h_l).zip(beta) {
        coherent += hs * b * hl;
        noise += (b * hl) * (b * hl);
    }
    coherent * coherent / noise * gamma_s
}

/// SNR at `receiver` for amplification vector `beta`.
pub fn snr(net: &NetworkInstance, beta: &[f64], receiver: Receiver) -> Result<f64> {
    check_beta_len(net, beta)?;
    if let Receiver::Eavesdropper(k) = receiver {
        if k >= net.k {
            return Err(Error::Dimension {
                field: "eavesdropper index",
                expected: net.k,
                got: k,
            });
        }
    }
    Ok(snr_unchecked(
        &net.h_s,
        net.receiver_gains(receiver),
        beta,
        net.gamma_s(),
    ))
}

/// `(1/2)·log2((1 + snr_d)/(1 + max_k snr_k))`, with an empty max taken as 0.
pub fn rate_from_snrs(snr_d: f64, snr_e: &[f64]) -> f64 {
    let worst = snr_e.iter().copied().fold(0.0, f64::max);
    0.5 * (1.0 + snr_d).log2() - 0.5 * (1.0 + worst).log2()
}

/// SNRs and secrecy rate at a given amplification vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEvaluation {
    pub snr_d: f64,
    pub snr_e: Vec<f64>,
    /// Raw rate in bits per channel use; may be negative.
    pub secrecy_rate: f64,
}

impl RateEvaluation {
    pub fn clamped(&self) -> f64 {
        self.secrecy_rate.max(0.0)
    }
}

pub fn evaluate_rate(net: &NetworkInstance, beta: &[f64]) -> Result<RateEvaluation> {
    check_beta_len(net, beta)?;
    let gamma = net.gamma_s();
    let snr_d = snr_unchecked(&net.h_s, &net.h_d, beta, gamma);
    let snr_e: Vec<f64> = net
        .h_e
        .iter()
        .map(|row| snr_unchecked(&net.h_s, row, beta, gamma))
        .collect();
    let secrecy_rate = rate_from_snrs(snr_d, &snr_e);
    Ok(RateEvaluation {
        snr_d,
        snr_e,
        secrecy_rate,
    })
}

/// Raw secrecy rate at `beta` (bits per channel use).
pub fn secrecy_rate(net: &NetworkInstance, beta: &[f64]) -> Result<f64> {
    evaluate_rate(net, beta).map(|r| r.secrecy_rate)
}

/// Amplification factors together with their bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVector {
    pub beta: Vec<f64>,
    pub beta_max: Vec<f64>,
}

impl ScalingVector {
    pub fn new(beta: Vec<f64>, beta_max: Vec<f64>) -> Self {
        Self { beta, beta_max }
    }

    /// Largest bound violation `max_i (|β_i| - β_i,max)`, or 0 when feasible.
    pub fn max_violation(&self) -> f64 {
        self.beta
            .iter()
            .zip(&self.beta_max)
            .map(|(b, m)| b.abs() - m)
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self) -> bool {
        self.max_violation() <= FEASIBILITY_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Symmetric,
    ScaledAlpha,
    ZeroForcing,
    SumIterative,
    IndividualIterative,
    OracleGrid,
    OracleMultistart,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Symmetric,
        Method::ScaledAlpha,
        Method::ZeroForcing,
        Method::SumIterative,
        Method::IndividualIterative,
        Method::OracleGrid,
        Method::OracleMultistart,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Symmetric => "symmetric",
            Method::ScaledAlpha => "scaled_alpha",
            Method::ZeroForcing => "zero_forcing",
            Method::SumIterative => "sum_iterative",
            Method::IndividualIterative => "individual_iterative",
            Method::OracleGrid => "oracle_grid",
            Method::OracleMultistart => "oracle_multistart",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

/// One sampled point of the outer search over the eavesdropper SNR cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSample {
    pub eta: f64,
    /// Inner optimum `g_effᵗ v*(η)`.
    pub inner_objective: f64,
    /// `(1 + (g_effᵗ v*)²) / (1 + η)`.
    pub f: f64,
}

/// Trace of the golden-section search over η.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSearchState {
    pub bracket: (f64, f64),
    pub history: Vec<EtaSample>,
    pub eta_star: f64,
    /// `max_history (1/2)·log2(f)`.
    pub rate_star: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta_max: Option<f64>,
    /// Largest constraint violation or duality-gap surrogate left by an inner solver.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inner_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub resolution_bound: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub search: Option<EtaSearchState>,
}

/// Chosen amplification vector with its achieved rate and SNRs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub beta: ScalingVector,
    pub secrecy_rate: f64,
    pub snr_d: f64,
    pub snr_e: Vec<f64>,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl SolveResult {
    /// Evaluates `beta` on `net` so the rate and SNR fields are always consistent.
    pub fn evaluate(
        net: &NetworkInstance,
        beta: Vec<f64>,
        method: Method,
        diagnostics: Diagnostics,
    ) -> Result<Self> {
        let eval = evaluate_rate(net, &beta)?;
        Ok(Self {
            beta: ScalingVector::new(beta, compute_beta_max(net)),
            secrecy_rate: eval.secrecy_rate,
            snr_d: eval.snr_d,
            snr_e: eval.snr_e,
            method,
            diagnostics,
        })
    }

    pub fn clamped_rate(&self) -> f64 {
        self.secrecy_rate.max(0.0)
    }
}

/// Parses a network from JSON text. Returns the unknown top-level keys alongside.
pub fn parse_network(text: &str, origin: &str) -> Result<(NetworkInstance, Vec<String>)> {
    let parse_err = |e: serde_json::Error| Error::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    let unknown: Vec<String> = match &value {
        serde_json::Value::Object(map) => {
            let known: BTreeSet<&str> = KNOWN_KEYS.into_iter().collect();
            map.keys()
                .filter(|key| !known.contains(key.as_str()))
                .cloned()
                .collect()
        }
        _ => {
            return Err(Error::Parse {
                path: origin.to_string(),
                message: "expected a JSON object".into(),
            })
        }
    };
    let net: NetworkInstance = serde_json::from_value(value).map_err(parse_err)?;
    net.check_dimensions()?;
    Ok((net, unknown))
}

/// Reads a network file without checking value invariants (dimensions are checked).
pub fn load_network_unchecked(path: impl AsRef<Path>) -> Result<(NetworkInstance, Vec<String>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_network(&text, &path.display().to_string())
}

/// Reads and fully checks a network file. Unknown keys are logged as warnings.
pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkInstance> {
    let (net, unknown) = load_network_unchecked(&path)?;
    for key in unknown {
        log::warn!(
            "{}: ignoring unknown key `{key}`",
            path.as_ref().display()
        );
    }
    net.check()?;
    Ok(net)
}

pub fn save_network(net: &NetworkInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(net).expect("network serialises");
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single() -> NetworkInstance {
        NetworkInstance {
            m: 1,
            k: 0,
            h_s: vec![1.0],
            h_d: vec![1.0],
            h_e: vec![],
            p_s: 1.0,
            p_r: vec![5.0],
            sigma2: 1.0,
        }
    }

    fn pair(h_e: Vec<f64>) -> NetworkInstance {
        NetworkInstance {
            m: 2,
            k: 1,
            h_s: vec![1.0, 1.0],
            h_d: vec![1.0, 1.0],
            h_e: vec![h_e],
            p_s: 1.0,
            p_r: vec![5.0, 5.0],
            sigma2: 1.0,
        }
    }

    #[test]
    fn beta_max_examples() {
        assert_relative_eq!(beta_max_scalar(5.0, 1.0, 1.0, 1.0), (2.5f64).sqrt());
        assert_relative_eq!(beta_max_scalar(5.0, 0.0, 1.0, 1.0), (5.0f64).sqrt());
        assert_relative_eq!(beta_max_scalar(1.0, 1.0, 0.0, 1.0), 1.0);
        assert_relative_eq!(compute_beta_max(&single())[0], 1.5811388300841898);
    }

    #[test]
    fn snr_examples() {
        let net = single();
        assert_eq!(snr(&net, &[0.0], Receiver::Destination).unwrap(), 0.0);
        assert_relative_eq!(snr(&net, &[1.0], Receiver::Destination).unwrap(), 0.5);
        let net = pair(vec![0.5, 0.5]);
        assert_relative_eq!(
            snr(&net, &[1.0, 1.0], Receiver::Destination).unwrap(),
            4.0 / 3.0
        );
        assert!(snr(&net, &[1.0], Receiver::Destination).is_err());
        assert!(snr(&net, &[1.0, 1.0], Receiver::Eavesdropper(1)).is_err());
    }

    #[test]
    fn rate_examples() {
        let net = pair(vec![1.0, 1.0]);
        assert_eq!(secrecy_rate(&net, &[0.7, -1.2]).unwrap(), 0.0);
        let net = single();
        assert_relative_eq!(
            secrecy_rate(&net, &[1.0]).unwrap(),
            0.5 * 1.5f64.log2(),
            epsilon = 1e-15
        );
        assert_relative_eq!(0.5 * 1.5f64.log2(), 0.29248, epsilon = 1e-5);
    }

    #[test]
    fn negative_rate_is_reported_raw() {
        let net = pair(vec![2.0, 2.0]);
        let eval = evaluate_rate(&net, &[1.0, 1.0]).unwrap();
        assert!(eval.secrecy_rate < 0.0);
        assert_eq!(eval.clamped(), 0.0);
    }

    #[test]
    fn validate_examples() {
        assert!(pair(vec![0.5, 0.9]).validate().degraded);
        assert!(!pair(vec![1.5, 0.2]).validate().degraded);
        let mut net = pair(vec![0.5, 0.5]);
        net.h_d = vec![0.0, 1.0];
        let report = net.validate();
        assert_eq!(report.zero_destination_gains, vec![0]);
        assert!(report.errors.iter().any(|e| e.contains("zero destination gain")));
        assert!(net.check().is_err());
    }

    #[test]
    fn validate_reports_dimension_errors() {
        let mut net = pair(vec![0.5, 0.5]);
        net.h_e[0].pop();
        let report = net.validate();
        assert!(!report.is_valid());
        assert!(report.errors[0].contains("h_e"));
        net.h_e.clear();
        assert!(net.validate().errors[0].contains("h_e"));
    }

    #[test]
    fn parse_names_missing_field_and_tolerates_extra() {
        let missing = r#"{"m":1,"k":0,"h_s":[1],"h_d":[1],"p_s":1,"p_r":[1],"sigma2":1}"#;
        let err = parse_network(missing, "x.json").unwrap_err().to_string();
        assert!(err.contains("h_e"), "{err}");

        let short = r#"{"m":1,"k":2,"h_s":[1],"h_d":[1],"h_e":[[0.5]],"p_s":1,"p_r":[1],"sigma2":1}"#;
        let err = parse_network(short, "x.json").unwrap_err().to_string();
        assert!(err.contains("h_e"), "{err}");

        let extra = r#"{"m":1,"k":0,"h_s":[1],"h_d":[1],"h_e":[],"p_s":1,"p_r":[1],"sigma2":1,"note":"x"}"#;
        let (net, unknown) = parse_network(extra, "x.json").unwrap();
        assert_eq!(unknown, vec!["note".to_string()]);
        assert_eq!(net.m, 1);
    }

    #[test]
    fn save_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let net = pair(vec![0.25, -0.125]);
        save_network(&net, &path).unwrap();
        assert_eq!(load_network(&path).unwrap(), net);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!("bogus".parse::<Method>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (NetworkInstance, Vec<f64>)> {
            (1usize..5, 0usize..4).prop_flat_map(|(m, k)| {
                (
                    prop::collection::vec(-2.0..2.0f64, m),
                    prop::collection::vec(0.1..2.0f64, m),
                    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, m), k),
                    0.1..10.0f64,
                    prop::collection::vec(0.1..10.0f64, m),
                    0.1..3.0f64,
                    prop::collection::vec(-3.0..3.0f64, m),
                )
                    .prop_map(move |(h_s, h_d, h_e, p_s, p_r, sigma2, beta)| {
                        (
                            NetworkInstance {
                                m,
                                k,
                                h_s,
                                h_d,
                                h_e,
                                p_s,
                                p_r,
                                sigma2,
                            },
                            beta,
                        )
                    })
            })
        }

        proptest! {
            #[test]
            fn snr_nonnegative_and_sign_invariant((net, beta) in instance()) {
                let flipped: Vec<f64> = beta.iter().map(|b| -b).collect();
                for r in std::iter::once(Receiver::Destination).chain((0..net.k).map(Receiver::Eavesdropper)) {
                    let a = snr(&net, &beta, r).unwrap();
                    let b = snr(&net, &flipped, r).unwrap();
                    prop_assert!(a >= 0.0);
                    prop_assert_eq!(a, b);
                }
            }

            #[test]
            fn rate_decomposes((net, beta) in instance()) {
                let eval = evaluate_rate(&net, &beta).unwrap();
                let worst = eval.snr_e.iter().copied().fold(0.0, f64::max);
                let expected = 0.5 * (1.0 + eval.snr_d).log2() - 0.5 * (1.0 + worst).log2();
                prop_assert!((eval.secrecy_rate - expected).abs() <= 1e-12);
            }

            #[test]
            fn beta_max_monotone(p in 0.1..10.0f64, dp in 0.01..5.0f64, h in -2.0..2.0f64, ps in 0.1..10.0f64, s2 in 0.1..3.0f64) {
                prop_assert!(beta_max_scalar(p + dp, h, ps, s2) > beta_max_scalar(p, h, ps, s2));
                if h != 0.0 {
                    prop_assert!(beta_max_scalar(p, h, ps + dp, s2) < beta_max_scalar(p, h, ps, s2));
                }
            }
        }
    }
}
