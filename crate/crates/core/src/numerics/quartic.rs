use crate::error::{Error, Result};

use super::Tolerances;

/// Monic quartic `λ⁴ + c3·λ³ + c2·λ² + c1·λ + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl QuarticCoeffs {
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self { c3, c2, c1, c0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((x + self.c3) * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        ((4.0 * x + 3.0 * self.c3) * x + 2.0 * self.c2) * x + self.c1
    }

    /// Sign changes along `(1, c3, c2, c1, c0)`, zeros skipped.
    pub fn sign_variations(&self) -> usize {
        let mut prev = 1.0f64;
        let mut count = 0;
        for c in [self.c3, self.c2, self.c1, self.c0] {
            if c != 0.0 {
                if c.signum() != prev.signum() {
                    count += 1;
                }
                prev = c;
            }
        }
        count
    }

    fn as_array(&self) -> [f64; 4] {
        [self.c3, self.c2, self.c1, self.c0]
    }
}

/// The unique positive root of a quartic with exactly one coefficient sign
/// variation and `c0 < 0`.
///
/// The bracket `[0, hi]` is grown by doubling until `P(hi) > 0`, bisected down
/// to `1e-12·max(1, hi)`, then polished with at most five Newton steps that
/// never leave the bracket.
pub fn positive_quartic_root(q: QuarticCoeffs) -> Result<f64> {
    positive_quartic_root_with(q, &Tolerances::default())
}

pub(crate) fn positive_quartic_root_with(q: QuarticCoeffs, tol: &Tolerances) -> Result<f64> {
    let finite = q.as_array().iter().all(|c| c.is_finite());
    if !finite || !(q.c0 < 0.0) || q.sign_variations() != 1 {
        return Err(Error::SignPattern {
            coeffs: q.as_array(),
        });
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    while q.eval(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical {
                stage: "quartic bracket",
                residual: q.eval(lo),
            });
        }
    }

    while hi - lo > tol.quartic_bracket * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q.eval(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut root = 0.5 * (lo + hi);
    let mut residual = q.eval(root).abs();
    for _ in 0..tol.quartic_newton_steps {
        let slope = q.derivative(root);
        if slope == 0.0 || residual == 0.0 {
            break;
        }
        let next = root - q.eval(root) / slope;
        let next_residual = q.eval(next).abs();
        if !(lo..=hi).contains(&next) || next_residual >= residual {
            break;
        }
        root = next;
        residual = next_residual;
    }
    Ok(root)
}
