use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Maximiser of `(hᵗv)²` over `vᵗCv = 1` for symmetric positive definite `C`.
///
/// Returns `v = C⁻¹h / sqrt(hᵗC⁻¹h)` and the optimal value `hᵗC⁻¹h`.
pub fn rayleigh_direction(h: &DVector<f64>, c: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
    if c.nrows() != h.len() || c.ncols() != h.len() {
        return Err(Error::Dimension {
            field: "rayleigh matrix",
            expected: h.len(),
            got: c.nrows(),
        });
    }
    let scale = c.amax().max(1.0);
    if (c - c.transpose()).amax() > 1e-12 * scale {
        return Err(Error::NotPositiveDefinite);
    }
    let chol = c.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let x = chol.solve(h);
    let value = h.dot(&x);
    if value <= 0.0 {
        return Ok((DVector::zeros(h.len()), 0.0));
    }
    Ok((x / value.sqrt(), value))
}
