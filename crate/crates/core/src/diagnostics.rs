//! Variance inflation factors, per matrix and per network layer.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::fit_ols;
use crate::linalg::Matrix;
use crate::mlp::Mlp;
use crate::par;

/// Reported for exactly collinear, aliased or constant columns.
pub const VIF_CAP: f64 = 1e15;

/// Default cutoff for "large" VIFs.
pub const DEFAULT_THRESHOLD: f64 = 10.0;

const COLLINEAR_TOL: f64 = 1e-12;

/// VIF of every column: `1 / (1 - R²_j)` from the OLS regression, with
/// intercept, of column `j` on the others.
///
/// A column gets [`VIF_CAP`] when it has zero variance, when `1 - R²_j`
/// falls below `1e-12`, or when the regression on the other columns has no
/// residual degrees of freedom left (rank of `[1 | others]` reaches `n`).
pub fn vif(x: &Matrix) -> Result<Vec<f64>> {
    let (n, k) = x.shape();
    if k < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "VIF needs at least two columns, got {k}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("VIF needs at least one row".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("VIF input"));
    }
    let cols = x.columns();
    par::map_range(k, |j| {
        let y = &cols[j];
        let mean = y.iter().sum::<f64>() / n as f64;
        let sst: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
        let scale = y.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        let floor = f64::EPSILON * scale;
        if sst <= floor * floor * n as f64 {
            return Ok(VIF_CAP);
        }
        let others: Vec<usize> = (0..k).filter(|&c| c != j).collect();
        let fit = fit_ols(&x.select_columns(&others), y)?;
        if fit.rank >= n {
            return Ok(VIF_CAP);
        }
        let ssr: f64 = fit.residuals.iter().map(|r| r * r).sum();
        let tolerance = ssr / sst;
        if tolerance < COLLINEAR_TOL {
            Ok(VIF_CAP)
        } else {
            Ok((1.0 / tolerance).min(VIF_CAP))
        }
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VifSummary {
    /// Share of VIFs strictly above the threshold.
    pub proportion_over: f64,
    /// Arithmetic mean, capped values included.
    pub mean: f64,
}

/// Summary of a nonempty VIF list; an empty list gives NaNs.
pub fn vif_summary(vifs: &[f64], threshold: f64) -> VifSummary {
    let k = vifs.len() as f64;
    let over = vifs.iter().filter(|&&v| v > threshold).count() as f64;
    VifSummary {
        proportion_over: over / k,
        mean: vifs.iter().sum::<f64>() / k,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VifReport {
    pub layer_label: String,
    /// Empty when the layer is narrower than two units.
    pub values: Vec<f64>,
    /// `None` marks an undefined report.
    pub summary: Option<VifSummary>,
    pub threshold: f64,
}

impl VifReport {
    pub fn from_matrix(label: impl Into<String>, x: &Matrix, threshold: f64) -> Result<Self> {
        let layer_label = label.into();
        if x.cols() < 2 {
            return Ok(Self {
                layer_label,
                values: Vec::new(),
                summary: None,
                threshold,
            });
        }
        let values = vif(x)?;
        let summary = Some(vif_summary(&values, threshold));
        Ok(Self {
            layer_label,
            values,
            summary,
            threshold,
        })
    }

    pub fn is_defined(&self) -> bool {
        self.summary.is_some()
    }
}

/// One report per layer, dense and dropout alike, from inference-mode
/// activations on `x`.
pub fn probe_layers(mlp: &Mlp, x: &Matrix, threshold: f64) -> Result<Vec<VifReport>> {
    if x.rows() == 0 {
        return Err(Error::InvalidArgument("probe data is empty".into()));
    }
    let labels = mlp.layer_labels();
    let mut out = Vec::with_capacity(labels.len());
    for (i, label) in labels.into_iter().enumerate() {
        let a = mlp.layer_activations(x, i)?;
        out.push(VifReport::from_matrix(label, &a, threshold)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_columns_have_unit_vif() {
        let x = Matrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
        for v in vif(&x).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_and_constant_columns_are_capped() {
        let x = Matrix::from_rows(&[
            [1.0, 1.0, 0.3],
            [2.0, 2.0, -1.0],
            [4.0, 4.0, 0.5],
            [3.0, 3.0, 2.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap();
        let v = vif(&x).unwrap();
        assert_eq!(v[0], VIF_CAP);
        assert_eq!(v[1], VIF_CAP);
        assert!(v[2] < 10.0);
        let c = Matrix::from_rows(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]).unwrap();
        assert_eq!(vif(&c).unwrap()[1], VIF_CAP);
    }

    #[test]
    fn single_column_is_an_error() {
        assert!(vif(&Matrix::zeros(5, 1)).is_err());
    }

    #[test]
    fn summary_arithmetic() {
        assert_eq!(
            vif_summary(&[1.0, 1.0, 1.0], 10.0),
            VifSummary {
                proportion_over: 0.0,
                mean: 1.0
            }
        );
        assert_eq!(
            vif_summary(&[5.0, 15.0, 40.0, 2.0], 10.0),
            VifSummary {
                proportion_over: 0.5,
                mean: 15.5
            }
        );
        assert_eq!(
            vif_summary(&[VIF_CAP; 10], 10.0),
            VifSummary {
                proportion_over: 1.0,
                mean: VIF_CAP
            }
        );
        // strictly greater
        assert_eq!(vif_summary(&[10.0, 11.0], 10.0).proportion_over, 0.5);
    }

    #[test]
    fn narrow_layer_report_is_undefined() {
        let r = VifReport::from_matrix("dense_3", &Matrix::zeros(4, 1), 10.0).unwrap();
        assert!(!r.is_defined());
        assert!(r.values.is_empty());
    }
}
