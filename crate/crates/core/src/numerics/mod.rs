//! Numeric kernels shared by the solvers.

mod golden;
mod nnls;
mod qcqp;
mod quartic;
mod rayleigh;

pub use golden::{
    golden_section_max, iteration_bound, try_golden_section_max, GoldenOutcome, GoldenSectionConfig, TAU,
};
pub use nnls::{least_distance, nnls, NnlsSolution};
pub use qcqp::{solve_linear_qcqp, QcqpProblem, QcqpSolution, QcqpWorkspace};
pub use quartic::{positive_quartic_root, QuarticCoeffs};
pub use rayleigh::rayleigh_direction;

/// Tolerances and iteration knobs for every kernel in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Bisection stops once the root bracket is this wide (relative to `max(1, hi)`).
    pub quartic_bracket: f64,
    pub quartic_newton_steps: usize,
    /// Barrier parameter multiplier per outer step.
    pub barrier_growth: f64,
    pub barrier_initial: f64,
    /// Stop when `constraints / t` falls below this.
    pub duality_gap: f64,
    pub armijo: f64,
    pub backtrack: f64,
    /// Centering stops when half the squared Newton decrement is below this.
    pub newton_decrement: f64,
    pub max_newton_steps: usize,
    /// Symmetry tolerance for constraint matrices.
    pub symmetry: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quartic_bracket: 1e-12,
            quartic_newton_steps: 5,
            barrier_growth: 10.0,
            barrier_initial: 1.0,
            duality_gap: 1e-9,
            armijo: 0.01,
            backtrack: 0.5,
            newton_decrement: 1e-12,
            max_newton_steps: 200,
            symmetry: 1e-12,
        }
    }
}
