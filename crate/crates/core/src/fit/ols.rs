use alloc::vec;
use alloc::vec::Vec;

use super::check_finite;
use crate::error::{Error, Result};
use crate::linalg::{qr_lstsq, Matrix, QR_RANK_TOL};

/// Least-squares fit with an intercept.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub intercept: f64,
    /// One per design column; aliased columns are 0.
    pub coefficients: Vec<f64>,
    /// Design columns that are linear combinations of earlier columns (and
    /// the intercept).
    pub aliased: Vec<usize>,
    /// Rank of `[1 | X]`.
    pub rank: usize,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    /// Residual variance `SSR / (n - rank)`; NaN when there are no residual
    /// degrees of freedom.
    pub sigma2: f64,
    pub intercept_std_error: f64,
    /// Standard errors of the coefficients; NaN for aliased columns.
    pub std_errors: Vec<f64>,
}

/// Fits `y ~ 1 + X` by Householder QR on the unscaled columns. Columns whose
/// residual norm after the earlier columns falls below `1e-7` of their own
/// norm are aliased and get coefficient 0.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<OlsFit> {
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

    let aug = Matrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let qr = qr_lstsq(&aug, y, QR_RANK_TOL)?;
    let intercept = qr.coefficients[0];
    let coefficients = qr.coefficients[1..].to_vec();
    let aliased: Vec<usize> = qr.aliased.iter().map(|&c| c - 1).collect();

    let fitted: Vec<f64> = (0..n)
        .map(|i| intercept + x.row(i).iter().zip(&coefficients).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = super::metrics::r_squared_from(y, ssr);
    let df = n.saturating_sub(qr.rank);
    let sigma2 = if df > 0 { ssr / df as f64 } else { f64::NAN };
    let var = qr.unscaled_variances(k + 1);
    let se: Vec<f64> = var.iter().map(|v| libm::sqrt(v * sigma2)).collect();
    let mut std_errors = vec![f64::NAN; k];
    std_errors.copy_from_slice(&se[1..]);

    Ok(OlsFit {
        intercept,
        coefficients,
        aliased,
        rank: qr.rank,
        fitted,
        residuals,
        r_squared,
        sigma2,
        intercept_std_error: se[0],
        std_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = Matrix::from_columns(&[[1.0, 2.0, 3.0, 4.0]]).unwrap();
        let f = fit_ols(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-12);
        assert!(f.intercept.abs() < 1e-12);
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn residuals_orthogonal_to_columns() {
        let x = Matrix::from_fn(30, 3, |i, j| libm::sin((i * (j + 2)) as f64 * 0.37) + j as f64);
        let y: Vec<f64> = (0..30).map(|i| libm::cos(i as f64 * 0.21) * 3.0).collect();
        let f = fit_ols(&x, &y).unwrap();
        for j in 0..3 {
            let col = x.column(j);
            let d: f64 = col.iter().zip(&f.residuals).map(|(a, b)| a * b).sum();
            let scale = crate::linalg::norm2(&col) * crate::linalg::norm2(&y);
            assert!(d.abs() <= 1e-8 * scale, "column {j}: {d}");
        }
        assert!(f.residuals.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_columns_are_aliased() {
        let x = Matrix::from_fn(10, 3, |i, j| match j {
            0 => i as f64,
            1 => 2.0 * i as f64 + 1.0,
            _ => (i * i) as f64,
        });
        let y: Vec<f64> = (0..10).map(|i| 1.0 + (i * i) as f64).collect();
        let f = fit_ols(&x, &y).unwrap();
        assert_eq!(f.aliased, vec![1]);
        assert_eq!(f.coefficients[1], 0.0);
        assert!(f.std_errors[1].is_nan());
        assert!((f.coefficients[2] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite() {
        let x = Matrix::from_columns(&[[1.0, f64::NAN]]).unwrap();
        assert_eq!(fit_ols(&x, &[1.0, 2.0]).unwrap_err(), Error::NonFinite("design matrix"));
    }
}
