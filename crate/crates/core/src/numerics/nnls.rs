//! Lawson–Hanson non-negative least squares and the least-distance program
//! built on top of it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual: DVector<f64>,
    pub iterations: usize,
}

/// Least-squares solve restricted to the columns in `passive`.
fn restricted_lstsq(e: &DMatrix<f64>, f: &DVector<f64>, passive: &[usize]) -> Result<DVector<f64>> {
    let sub = e.select_columns(passive);
    let svd = sub.svd(true, true);
    let eps = 1e-14 * svd.singular_values.max().max(f64::MIN_POSITIVE);
    svd.solve(f, eps).map_err(|_| Error::Numerical {
        stage: "nnls least squares",
        residual: f64::NAN,
    })
}

/// `min ‖E x − f‖₂` subject to `x ≥ 0`.
pub fn nnls(e: &DMatrix<f64>, f: &DVector<f64>) -> Result<NnlsSolution> {
    let (rows, n) = e.shape();
    if f.len() != rows {
        return Err(Error::Dimension {
            field: "nnls rhs",
            expected: rows,
            got: f.len(),
        });
    }
    let scale = e.amax().max(f.amax()).max(1.0);
    let tol = 1e-13 * scale * scale * (rows.max(n) as f64);
    let max_iter = 3 * n + 10;

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let mut iterations = 0;
    loop {
        let w = e.transpose() * (f - e * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(t) = candidate.filter(|&t| w[t] > tol) else {
            break;
        };
        if iterations == max_iter {
            return Err(Error::Numerical {
                stage: "nnls iteration limit",
                residual: w[t],
            });
        }
        iterations += 1;
        passive[t] = true;

        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z_p = restricted_lstsq(e, f, &idx)?;
            let mut z = DVector::zeros(n);
            for (k, &j) in idx.iter().enumerate() {
                z[j] = z_p[k];
            }
            if idx.iter().all(|&j| z[j] > 0.0) {
                x = z;
                break;
            }
            let mut step = f64::INFINITY;
            for &j in &idx {
                if z[j] <= 0.0 {
                    step = step.min(x[j] / (x[j] - z[j]));
                }
            }
            x += (z - &x) * step;
            for &j in &idx {
                if x[j] <= 1e-15 * scale {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    let residual = e * &x - f;
    Ok(NnlsSolution { x, residual, iterations })
}

/// Least-distance program `min ‖y‖₂` subject to `G y ≥ h`.
///
/// Returns `None` when the constraints are inconsistent.
pub fn least_distance(g: &DMatrix<f64>, h: &DVector<f64>) -> Result<Option<(DVector<f64>, usize)>> {
    let (mc, n) = g.shape();
    if h.len() != mc {
        return Err(Error::Dimension {
            field: "ldp rhs",
            expected: mc,
            got: h.len(),
        });
    }
    if h.iter().all(|v| *v <= 0.0) {
        return Ok(Some((DVector::zeros(n), 0)));
    }
    let mut e = DMatrix::zeros(n + 1, mc);
    e.view_mut((0, 0), (n, mc)).copy_from(&g.transpose());
    e.row_mut(n).copy_from(&h.transpose());
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let sol = nnls(&e, &rhs)?;
    let r = sol.residual;
    if r.norm() <= 1e-12 || r[n].abs() <= 1e-14 {
        return Ok(None);
    }
    let y = -r.rows(0, n) / r[n];
    Ok(Some((y, sol.iterations)))
}
