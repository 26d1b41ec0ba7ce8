use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};

/// Leading principal components of a centered design.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcaBasis {
    /// `m x r`, orthonormal columns.
    pub components: Matrix,
    pub means: Vec<f64>,
    /// Variances along the retained components, descending.
    pub variances: Vec<f64>,
    /// Share of total variance carried by the retained components.
    pub retained_fraction: f64,
}

impl PcaBasis {
    pub fn rank(&self) -> usize {
        self.components.cols()
    }

    /// Keeps only the leading `r` components (all of them if fewer).
    pub fn truncate(&mut self, r: usize) {
        let r = r.min(self.rank());
        let keep: Vec<usize> = (0..r).collect();
        self.components = self.components.select_columns(&keep);
        let total = self.variances.iter().sum::<f64>() / self.retained_fraction;
        self.variances.truncate(r);
        self.retained_fraction = self.variances.iter().sum::<f64>() / total;
    }

    /// Centers `x` and projects it onto the retained components.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.means.len() {
            return Err(Error::Dimension(alloc::format!(
                "PCA basis expects {} columns, got {}",
                self.means.len(),
                x.cols()
            )));
        }
        let centered = Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - self.means[j]);
        centered.matmul(&self.components)
    }

    /// Maps component scores back to the original coordinates.
    pub fn inverse_transform(&self, scores: &Matrix) -> Result<Matrix> {
        let mut back = scores.matmul(&self.components.transpose())?;
        for i in 0..back.rows() {
            for (v, m) in back.row_mut(i).iter_mut().zip(&self.means) {
                *v += m;
            }
        }
        Ok(back)
    }
}

/// Keeps the fewest components whose cumulative variance reaches
/// `var_fraction` of the total.
pub fn pca_fit(x: &Matrix, var_fraction: f64) -> Result<PcaBasis> {
    let (n, m) = x.shape();
    if n < 2 {
        return Err(Error::InvalidArgument("PCA needs at least 2 rows".into()));
    }
    if !(var_fraction > 0.0 && var_fraction <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "variance fraction must lie in (0, 1], got {var_fraction}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("design matrix"));
    }
    let means = x.column_means();
    let centered = Matrix::from_fn(n, m, |i, j| x[(i, j)] - means[j]);
    let mut cov = centered.gram();
    let denom = (n - 1) as f64;
    for i in 0..m {
        for j in 0..m {
            cov[(i, j)] /= denom;
        }
    }
    let total: f64 = (0..m).map(|j| cov[(j, j)]).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroVariance("every column is constant".into()));
    }
    let (values, vectors) = symmetric_eigen(&cov)?;
    let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let eig_total: f64 = values.iter().sum();
    let mut cum = 0.0;
    let mut r = 0;
    while r < m {
        cum += values[r];
        r += 1;
        if cum / eig_total >= var_fraction {
            break;
        }
    }
    let keep: Vec<usize> = (0..r).collect();
    Ok(PcaBasis {
        components: vectors.select_columns(&keep),
        means,
        variances: values[..r].to_vec(),
        retained_fraction: cum / eig_total,
    })
}
