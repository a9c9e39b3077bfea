use crate::error::{Error, Result};

/// Golden-section contraction ratio `(sqrt(5) - 1) / 2`.
pub const TAU: f64 = 0.618_033_988_749_894_9;

/// `ceil(2.08·ln(range/δ))`, floored at zero.
pub fn iteration_bound(range: f64, delta: f64) -> usize {
    let n = (2.08 * (range / delta).ln()).ceil();
    if n.is_finite() && n > 0.0 {
        n as usize
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenSectionConfig {
    pub eta_lo: f64,
    pub eta_hi: f64,
    /// Absolute bracket-width tolerance.
    pub delta: f64,
    /// Limit on bracket reductions.
    pub max_iter: usize,
}

impl GoldenSectionConfig {
    /// Config with the smallest admissible `max_iter`.
    pub fn new(eta_lo: f64, eta_hi: f64, delta: f64) -> Self {
        Self {
            eta_lo,
            eta_hi,
            delta,
            max_iter: iteration_bound(eta_hi - eta_lo, delta) + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_lo >= 0.0) || !(self.eta_hi > self.eta_lo) || !self.eta_hi.is_finite() {
            return Err(Error::SearchConfig(format!(
                "need 0 <= eta_lo < eta_hi, got [{}, {}]",
                self.eta_lo, self.eta_hi
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::SearchConfig(format!("delta must be > 0, got {}", self.delta)));
        }
        Ok(())
    }

    /// Whether `max_iter` covers `ceil(2.08·ln(range/δ)) + 1` contractions.
    pub fn has_sufficient_iterations(&self) -> bool {
        self.max_iter >= iteration_bound(self.eta_hi - self.eta_lo, self.delta) + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenOutcome {
    /// Midpoint of the final bracket.
    pub eta_star: f64,
    /// Best sampled value.
    pub f_star: f64,
    /// Where `f_star` was sampled.
    pub eta_best: f64,
    pub bracket: (f64, f64),
    /// Bracket contractions performed.
    pub reductions: usize,
    /// Function evaluations, including the two initial interior points.
    pub evaluations: usize,
    /// Every `(η, f(η))` evaluated, in order.
    pub history: Vec<(f64, f64)>,
}

/// Maximises a unimodal `f` on `[eta_lo, eta_hi]`.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    cfg: &GoldenSectionConfig,
) -> Result<GoldenOutcome> {
    try_golden_section_max(|x| Ok(f(x)), cfg)
}

/// As [`golden_section_max`] for an objective that can fail.
///
/// The bracket is tracked as `(lo, width)` so each contraction scales the
/// width by exactly `TAU`. One new interior point is evaluated per
/// contraction, except after the last one.
pub fn try_golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    cfg: &GoldenSectionConfig,
) -> Result<GoldenOutcome> {
    cfg.validate()?;
    let mut history = Vec::with_capacity(cfg.max_iter + 2);
    let mut eval = |x: f64, history: &mut Vec<(f64, f64)>| -> Result<f64> {
        let y = f(x)?;
        history.push((x, y));
        Ok(y)
    };

    let mut lo = cfg.eta_lo;
    let mut width = cfg.eta_hi - cfg.eta_lo;
    let mut x1 = lo + (1.0 - TAU) * width;
    let mut x2 = lo + TAU * width;
    let mut f1 = eval(x1, &mut history)?;
    let mut f2 = eval(x2, &mut history)?;
    let mut reductions = 0;

    while width > cfg.delta {
        if reductions == cfg.max_iter {
            return Err(Error::GoldenSection {
                max_iter: cfg.max_iter,
                lo,
                hi: lo + width,
            });
        }
        width *= TAU;
        reductions += 1;
        if f1 >= f2 {
            x2 = x1;
            f2 = f1;
            if width > cfg.delta {
                x1 = lo + (1.0 - TAU) * width;
                f1 = eval(x1, &mut history)?;
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            if width > cfg.delta {
                x2 = lo + TAU * width;
                f2 = eval(x2, &mut history)?;
            }
        }
    }

    let (eta_best, f_star) = history
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, s| {
            if s.1 > best.1 {
                s
            } else {
                best
            }
        });
    Ok(GoldenOutcome {
        eta_star: lo + 0.5 * width,
        f_star,
        eta_best,
        bracket: (lo, lo + width),
        reductions,
        evaluations: history.len(),
        history,
    })
}
