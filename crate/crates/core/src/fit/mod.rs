//! Model fitting: least squares, ridge, one-vs-all logistic regression, PCA
//! preprocessing, the assembled [`PolyModel`], and evaluation metrics.

mod logistic;
mod metrics;
mod model;
mod ols;
mod pca;
mod ridge;

pub use logistic::{fit_logistic_ova, LogisticFit, LogisticOptions};
pub use metrics::{corr, mape, pcc, r_squared};
pub use model::{FitMethod, FitReport, ModelConfig, PolyModel, Prediction};
pub use ols::{fit_ols, OlsFit};
pub use pca::{pca_fit, PcaBasis};
pub use ridge::{fit_ridge, RidgeFit};

use alloc::vec::Vec;

use crate::linalg::Matrix;

/// Per-column centering and scaling applied before ridge and logistic fits.
/// Zero-variance columns get scale 1 so the transform stays invertible.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    /// Population (divide-by-n) standard deviations.
    pub fn from_matrix(x: &Matrix) -> Self {
        let means = x.column_means();
        let mut ss = alloc::vec![0.0; x.cols()];
        for i in 0..x.rows() {
            for ((s, v), m) in ss.iter_mut().zip(x.row(i)).zip(&means) {
                let d = v - m;
                *s += d * d;
            }
        }
        let n = x.rows().max(1) as f64;
        let scales = ss
            .into_iter()
            .map(|s| {
                let sd = libm::sqrt(s / n);
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { means, scales }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), x.cols(), |i, j| (x[(i, j)] - self.means[j]) / self.scales[j])
    }

    /// Maps coefficients on the standardized scale back to the raw scale:
    /// returns `(intercept, slopes)`.
    pub fn unscale(&self, intercept: f64, slopes: &[f64]) -> (f64, Vec<f64>) {
        let raw: Vec<f64> = slopes.iter().zip(&self.scales).map(|(b, s)| b / s).collect();
        let shift: f64 = raw.iter().zip(&self.means).map(|(b, m)| b * m).sum();
        (intercept - shift, raw)
    }
}

pub(crate) fn check_finite(x: &Matrix, y: &[f64]) -> crate::Result<()> {
    if !x.is_finite() {
        return Err(crate::Error::NonFinite("design matrix"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(crate::Error::NonFinite("response"));
    }
    Ok(())
}
