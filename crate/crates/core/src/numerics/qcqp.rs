//! Log-barrier interior method for
//!
//! ```text
//! maximize   cᵗv
//! subject to vᵗA_j v ≤ 1,   j = 1..m
//! ```
//!
//! with every `A_j` symmetric positive semidefinite. The origin is strictly
//! feasible for any such problem, so no phase-I is needed.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

use super::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    pub c: DVector<f64>,
    pub constraints: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpSolution {
    pub v: DVector<f64>,
    pub objective: f64,
    /// Final duality-gap surrogate `m/t`.
    pub gap: f64,
    /// `max_j vᵗA_j v`; strictly below 1.
    pub max_constraint: f64,
    pub newton_steps: usize,
}

impl QcqpProblem {
    pub fn new(c: DVector<f64>, constraints: Vec<DMatrix<f64>>) -> Self {
        Self { c, constraints }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Symmetry, PSD-ness and boundedness of the feasible set.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::InvalidParameter("empty QCQP".into()));
        }
        let mut sum = DMatrix::<f64>::zeros(n, n);
        for (index, a) in self.constraints.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Dimension {
                    field: "constraint matrix",
                    expected: n,
                    got: a.nrows(),
                });
            }
            let scale = a.amax().max(1.0);
            if (a - a.transpose()).amax() > tol.symmetry * scale {
                return Err(Error::NotPsd { index });
            }
            let min_eig = SymmetricEigen::new(a.clone()).eigenvalues.min();
            if min_eig < -1e-12 * scale {
                return Err(Error::NotPsd { index });
            }
            sum += a;
        }
        if self.constraints.is_empty() {
            return Err(Error::Unbounded);
        }
        let scale = sum.amax();
        if SymmetricEigen::new(sum).eigenvalues.min() <= 1e-13 * scale {
            return Err(Error::Unbounded);
        }
        Ok(())
    }

    pub fn constraint_values(&self, v: &DVector<f64>) -> Vec<f64> {
        self.constraints.iter().map(|a| v.dot(&(a * v))).collect()
    }
}

/// Scratch buffers reused across solves of the same dimension.
#[derive(Debug, Clone, Default)]
pub struct QcqpWorkspace {
    hess: DMatrix<f64>,
    grad: DVector<f64>,
    av: Vec<DVector<f64>>,
    slack: Vec<f64>,
}

impl QcqpWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, n: usize, m: usize) {
        if self.hess.nrows() != n {
            self.hess = DMatrix::zeros(n, n);
            self.grad = DVector::zeros(n);
        }
        self.av.resize_with(m, || DVector::zeros(n));
        for a in &mut self.av {
            if a.len() != n {
                *a = DVector::zeros(n);
            }
        }
        self.slack.resize(m, 0.0);
    }

    /// Solves `p` with the given tolerances, reusing this workspace's buffers.
    pub fn solve(&mut self, p: &QcqpProblem, tol: &Tolerances) -> Result<QcqpSolution> {
        p.validate(tol)?;
        let n = p.dim();
        let m = p.constraints.len();
        self.prepare(n, m);

        let mut v = DVector::<f64>::zeros(n);
        if p.c.amax() == 0.0 {
            return Ok(QcqpSolution {
                v,
                objective: 0.0,
                gap: 0.0,
                max_constraint: 0.0,
                newton_steps: 0,
            });
        }

        let mut t = tol.barrier_initial;
        let mut newton_steps = 0;
        loop {
            for _ in 0..tol.max_newton_steps {
                self.assemble(p, &v, t);
                let step = match newton_direction(&self.hess, &self.grad) {
                    Some(step) => step,
                    None => {
                        return Err(Error::Numerical {
                            stage: "barrier Newton system",
                            residual: self.grad.norm(),
                        })
                    }
                };
                let slope = self.grad.dot(&step);
                let decrement = -slope;
                if !(decrement.is_finite()) {
                    return Err(Error::Numerical {
                        stage: "barrier Newton decrement",
                        residual: decrement,
                    });
                }
                if decrement / 2.0 <= tol.newton_decrement {
                    break;
                }
                newton_steps += 1;
                let Some(length) = self.line_search(p, &step, t, slope, tol) else {
                    // no representable decrease left along the Newton direction
                    break;
                };
                v.axpy(length, &step, 1.0);
            }
            let gap = m as f64 / t;
            if gap <= tol.duality_gap {
                let max_constraint = p.constraint_values(&v).into_iter().fold(f64::MIN, f64::max);
                if !(max_constraint < 1.0) {
                    return Err(Error::Numerical {
                        stage: "barrier feasibility",
                        residual: max_constraint - 1.0,
                    });
                }
                return Ok(QcqpSolution {
                    objective: p.c.dot(&v),
                    v,
                    gap,
                    max_constraint,
                    newton_steps,
                });
            }
            t *= tol.barrier_growth;
        }
    }

    /// Gradient and Hessian of `-t·cᵗv - Σ ln(1 - vᵗA_j v)`; caches `A_j v` and slacks.
    fn assemble(&mut self, p: &QcqpProblem, v: &DVector<f64>, t: f64) {
        self.grad.copy_from(&p.c);
        self.grad *= -t;
        self.hess.fill(0.0);
        for (j, a) in p.constraints.iter().enumerate() {
            a.mul_to(v, &mut self.av[j]);
            let s = 1.0 - v.dot(&self.av[j]);
            self.slack[j] = s;
            self.grad.axpy(2.0 / s, &self.av[j], 1.0);
            self.hess.zip_apply(a, |h, x| *h += 2.0 * x / s);
            self.hess
                .ger(4.0 / (s * s), &self.av[j], &self.av[j], 1.0);
        }
    }

    /// Backtracking on the barrier objective. The change in objective is
    /// evaluated from differences so it stays accurate when `t` is large.
    fn line_search(
        &self,
        p: &QcqpProblem,
        step: &DVector<f64>,
        t: f64,
        slope: f64,
        tol: &Tolerances,
    ) -> Option<f64> {
        let c_step = p.c.dot(step);
        let terms: Vec<(f64, f64)> = p
            .constraints
            .iter()
            .enumerate()
            .map(|(j, a)| (self.av[j].dot(step), step.dot(&(a * step))))
            .collect();
        let mut length = 1.0;
        while length > 1e-20 {
            let mut change = -t * length * c_step;
            let mut feasible = true;
            for (j, &(lin, quad)) in terms.iter().enumerate() {
                let ds = -(2.0 * length * lin + length * length * quad);
                let ratio = ds / self.slack[j];
                if !(ratio > -1.0) {
                    feasible = false;
                    break;
                }
                change -= ratio.ln_1p();
            }
            if feasible && change <= tol.armijo * length * slope {
                return Some(length);
            }
            length *= tol.backtrack;
        }
        None
    }
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = hess.clone().cholesky() {
        return Some(-chol.solve(grad));
    }
    let ridge = 1e-12 * hess.diagonal().amax().max(1e-300);
    let mut shifted = hess.clone();
    for i in 0..shifted.nrows() {
        shifted[(i, i)] += ridge;
    }
    shifted.cholesky().map(|chol| -chol.solve(grad))
}

/// Solves `p` with default tolerances and a fresh workspace.
pub fn solve_linear_qcqp(p: &QcqpProblem) -> Result<QcqpSolution> {
    QcqpWorkspace::new().solve(p, &Tolerances::default())
}
