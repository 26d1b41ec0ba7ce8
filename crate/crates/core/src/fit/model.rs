use alloc::string::String;
use alloc::vec::Vec;

use super::logistic::argmax;
use super::{fit_logistic_ova, fit_ols, fit_ridge, mape, pca_fit, pcc, LogisticOptions, PcaBasis, Standardization};
use crate::dataset::{encode_frame, Dataset, DummyGroups, Frame, Response, Schema};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::polyterms::{
    drop_random_columns, enumerate_terms, expand_with_budget, PolySpec, TermSet, DEFAULT_CELL_BUDGET,
};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum FitMethod {
    Ols,
    Ridge { lambda: f64 },
    Logistic,
}

impl FitMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ols => "ols",
            Self::Ridge { .. } => "ridge",
            Self::Logistic => "logistic",
        }
    }
}

/// Settings for [`PolyModel::fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub spec: PolySpec,
    pub method: FitMethod,
    /// Variance fraction for PCA on the encoded design; `None` disables PCA.
    pub pca_fraction: Option<f64>,
    /// Fraction of polynomial terms to keep; `None` keeps all.
    pub keep_fraction: Option<f64>,
    pub seed: u64,
    pub logistic: LogisticOptions,
    pub cell_budget: u128,
}

impl ModelConfig {
    pub fn new(spec: PolySpec, method: FitMethod) -> Self {
        Self {
            spec,
            method,
            pca_fraction: None,
            keep_fraction: None,
            seed: 0,
            logistic: LogisticOptions::default(),
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

/// A fitted polynomial model: encoding, optional PCA, polynomial terms and
/// coefficients, enough to predict from raw feature frames.
///
/// Coefficients are stored on the raw (expanded, unstandardized) scale; the
/// standardization used during ridge/logistic fitting is kept for reference.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PolyModel {
    pub schema: Schema,
    /// Indicator layout of the encoded design (before PCA).
    pub design_groups: DummyGroups,
    pub design_names: Vec<String>,
    pub pca: Option<PcaBasis>,
    pub terms: TermSet,
    pub method: FitMethod,
    /// One intercept per output (1 for regression, `q` for classification).
    pub intercepts: Vec<f64>,
    /// `coefficients[c][j]` multiplies term `j` for output `c`.
    pub coefficients: Vec<Vec<f64>>,
    pub standardization: Option<Standardization>,
    /// Terms aliased in the least-squares fit (coefficient 0).
    pub aliased: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Numeric(Vec<f64>),
    Class(Vec<u32>),
}

impl Prediction {
    pub fn len(&self) -> usize {
        match self {
            Self::Numeric(v) => v.len(),
            Self::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Training summary returned with a fitted model.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub terms: usize,
    pub aliased: usize,
    /// Training MAPE (regression) or PCC (classification).
    pub train_metric: f64,
    pub warnings: Vec<String>,
}

impl PolyModel {
    /// Encode, optionally reduce by PCA, expand, and fit.
    pub fn fit(train: &Dataset, config: &ModelConfig) -> Result<(Self, FitReport)> {
        let classification = train.schema().is_classification();
        match (classification, config.method) {
            (true, FitMethod::Logistic) | (false, FitMethod::Ols | FitMethod::Ridge { .. }) => {}
            (true, _) => {
                return Err(Error::InvalidArgument(
                    "class response requires the logistic method".into(),
                ))
            }
            (false, FitMethod::Logistic) => {
                return Err(Error::InvalidArgument(
                    "logistic method requires a class response".into(),
                ))
            }
        }
        let enc = encode_frame(train.schema(), train.features());
        let mut warnings = enc.warnings.clone();
        let (design, groups, pca) = match config.pca_fraction {
            Some(frac) => {
                let basis = pca_fit(&enc.matrix, frac)?;
                let reduced = basis.transform(&enc.matrix)?;
                let g = DummyGroups::all_numeric(reduced.cols());
                (reduced, g, Some(basis))
            }
            None => (enc.matrix.clone(), enc.groups.clone(), None),
        };
        let mut terms = enumerate_terms(design.cols(), &groups, config.spec)?;
        if let Some(keep) = config.keep_fraction {
            terms = drop_random_columns(&terms, keep, config.seed)?;
        }
        let x = expand_with_budget(&design, &terms, config.cell_budget)?;

        let mut model = PolyModel {
            schema: train.schema().clone(),
            design_groups: enc.groups,
            design_names: enc.names,
            pca,
            terms,
            method: config.method,
            intercepts: Vec::new(),
            coefficients: Vec::new(),
            standardization: None,
            aliased: Vec::new(),
        };
        match (config.method, train.response()) {
            (FitMethod::Ols, Response::Numeric(y)) => {
                let f = fit_ols(&x, y)?;
                model.intercepts = alloc::vec![f.intercept];
                model.coefficients = alloc::vec![f.coefficients];
                model.aliased = f.aliased;
            }
            (FitMethod::Ridge { lambda }, Response::Numeric(y)) => {
                let f = fit_ridge(&x, y, lambda)?;
                model.intercepts = alloc::vec![f.intercept];
                model.coefficients = alloc::vec![f.coefficients];
                model.standardization = Some(f.standardization);
            }
            (FitMethod::Logistic, Response::Class(labels)) => {
                let q = train.schema().response().levels.len();
                let f = fit_logistic_ova(&x, labels, q, config.logistic)?;
                warnings.extend(f.warnings);
                model.intercepts = f.intercepts;
                model.coefficients = f.coefficients;
                model.standardization = Some(f.standardization);
            }
            _ => unreachable!("method/response checked above"),
        }
        let train_metric = match (model.predict_expanded(&x), train.response()) {
            (Prediction::Numeric(p), Response::Numeric(y)) => mape(&p, y)?,
            (Prediction::Class(p), Response::Class(y)) => pcc(&p, y)?,
            _ => unreachable!(),
        };
        let report = FitReport {
            terms: model.terms.len(),
            aliased: model.aliased.len(),
            train_metric,
            warnings,
        };
        Ok((model, report))
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.method, FitMethod::Logistic)
    }

    /// Predicts from raw feature columns.
    pub fn predict(&self, frame: &Frame) -> Result<Prediction> {
        let enc = encode_frame(&self.schema, frame);
        self.predict_design(&enc.matrix)
    }

    /// Predicts from an already encoded design (before PCA and expansion).
    pub fn predict_design(&self, design: &Matrix) -> Result<Prediction> {
        let width = self.design_groups.width();
        if design.cols() != width {
            return Err(Error::Dimension(alloc::format!(
                "model expects {} design columns, got {}",
                width,
                design.cols()
            )));
        }
        let x = match &self.pca {
            Some(b) => {
                let reduced = b.transform(design)?;
                expand_with_budget(&reduced, &self.terms, u128::MAX)?
            }
            None => expand_with_budget(design, &self.terms, u128::MAX)?,
        };
        Ok(self.predict_expanded(&x))
    }

    /// Linear scores on an expanded matrix, one column per output.
    pub fn scores(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), self.intercepts.len(), |i, c| {
            self.intercepts[c]
                + x.row(i)
                    .iter()
                    .zip(&self.coefficients[c])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
    }

    fn predict_expanded(&self, x: &Matrix) -> Prediction {
        let s = self.scores(x);
        if self.is_classification() {
            Prediction::Class((0..s.rows()).map(|i| argmax(s.row(i))).collect())
        } else {
            Prediction::Numeric(s.column(0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, ColumnSpec};
    use alloc::vec;

    fn quadratic() -> Dataset {
        let u: Vec<f64> = (0..30).map(|i| i as f64 / 10.0 - 1.5).collect();
        let y: Vec<f64> = u.iter().map(|u| 1.0 + 2.0 * u - 0.5 * u * u).collect();
        let x = Matrix::from_columns(&[u]).unwrap();
        Dataset::from_matrix(&["u"], &x, &y, "y").unwrap()
    }

    #[test]
    fn fit_then_predict_reproduces_training_values() {
        let ds = quadratic();
        let (m, rep) = PolyModel::fit(&ds, &ModelConfig::new(PolySpec::full(2).unwrap(), FitMethod::Ols)).unwrap();
        assert!(rep.train_metric < 1e-12);
        let Prediction::Numeric(p) = m.predict(ds.features()).unwrap() else {
            panic!("regression model predicted classes")
        };
        let Response::Numeric(y) = ds.response() else {
            unreachable!()
        };
        for (a, b) in p.iter().zip(y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_slopes_predict_intercept() {
        let ds = quadratic();
        let (mut m, _) = PolyModel::fit(&ds, &ModelConfig::new(PolySpec::full(1).unwrap(), FitMethod::Ols)).unwrap();
        m.intercepts[0] = 4.25;
        m.coefficients[0].iter_mut().for_each(|c| *c = 0.0);
        let Prediction::Numeric(p) = m.predict(ds.features()).unwrap() else {
            unreachable!()
        };
        assert!(p.iter().all(|&v| v == 4.25));
    }

    #[test]
    fn method_must_match_response() {
        let ds = quadratic();
        let cfg = ModelConfig::new(PolySpec::full(1).unwrap(), FitMethod::Logistic);
        assert!(PolyModel::fit(&ds, &cfg).is_err());
    }

    #[test]
    fn classification_with_categorical_feature() {
        let schema = Schema::new(vec![
            ColumnSpec::numeric("u"),
            ColumnSpec::categorical("g", ["a", "b"]),
            ColumnSpec::response_class("cls", ["no", "yes"]),
        ])
        .unwrap();
        let u: Vec<f64> = (0..40).map(|i| (i % 10) as f64 - 4.5).collect();
        let g: Vec<u32> = (0..40).map(|i| (i / 20) as u32).collect();
        let cls: Vec<u32> = u.iter().map(|&u| u32::from(u > 0.0)).collect();
        let ds = Dataset::new(
            schema,
            vec![Column::Numeric(u), Column::Categorical(g)],
            Response::Class(cls.clone()),
        )
        .unwrap();
        let (m, rep) = PolyModel::fit(&ds, &ModelConfig::new(PolySpec::full(2).unwrap(), FitMethod::Logistic)).unwrap();
        assert_eq!(m.terms.len(), 4); // u, g=b, u^2, u*g=b
        assert_eq!(rep.train_metric, 1.0);
        assert_eq!(m.predict(ds.features()).unwrap(), Prediction::Class(cls));
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let ds = quadratic();
        let (m, _) = PolyModel::fit(&ds, &ModelConfig::new(PolySpec::full(2).unwrap(), FitMethod::Ols)).unwrap();
        assert!(m.predict_design(&Matrix::zeros(3, 2)).is_err());
    }
}
