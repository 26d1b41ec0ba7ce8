use alloc::vec::Vec;

use super::{check_finite, Standardization};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, Matrix};

#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub intercept: f64,
    /// Raw-scale coefficients, one per design column.
    pub coefficients: Vec<f64>,
    pub standardization: Standardization,
}

/// Ridge regression on internally standardized columns with an unpenalized
/// intercept. Solves `(Z'Z + lambda I) b = Z'(y - mean(y))` and maps `b`
/// back to the raw scale.
pub fn fit_ridge(x: &Matrix, y: &[f64], lambda: f64) -> Result<RidgeFit> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "ridge lambda must be positive, got {lambda}"
        )));
    }
    let (n, k) = x.shape();
    if n == 0 {
        return Err(Error::InvalidArgument("no rows to fit".into()));
    }
    if y.len() != n {
        return Err(Error::Dimension(alloc::format!(
            "response has {} rows, design has {}",
            y.len(),
            n
        )));
    }
    check_finite(x, y)?;

    let standardization = Standardization::from_matrix(x);
    let z = standardization.apply(x);
    let ybar = y.iter().sum::<f64>() / n as f64;
    let mut a = z.gram();
    for j in 0..k {
        a[(j, j)] += lambda;
    }
    let mut rhs = alloc::vec![0.0; k];
    for (i, yi) in y.iter().enumerate() {
        let yc = yi - ybar;
        for (r, zv) in rhs.iter_mut().zip(z.row(i)) {
            *r += zv * yc;
        }
    }
    let l = cholesky(&a)?;
    let b = cholesky_solve(&l, &rhs);
    let (intercept, coefficients) = standardization.unscale(ybar, &b);
    Ok(RidgeFit {
        intercept,
        coefficients,
        standardization,
    })
}
