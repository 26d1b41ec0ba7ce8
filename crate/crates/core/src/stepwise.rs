//! Forward stepwise regression over a candidate polynomial basis.
//!
//! The training rows are split into a sub-training part and a validation
//! holdout. Starting from the intercept-only model, each step refits the
//! current model plus every remaining candidate on the sub-training rows
//! and keeps the candidate with the best validation score. The greedy path
//! continues past a non-improving step until at least `min_models`
//! candidate fits have been evaluated; the returned model is the best
//! prefix of the path.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{encode_design, split_indices, Dataset, Response};
use crate::error::{Error, Result};
use crate::fit::{fit_logistic_ova, fit_ols, mape, pcc, FitMethod, LogisticOptions, PolyModel};
use crate::linalg::Matrix;
use crate::par;
use crate::polyterms::{expand, TermSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Mean absolute error on the holdout, lower is better.
    Mape,
    /// Proportion correctly classified on the holdout, higher is better.
    Pcc,
}

impl Objective {
    fn improvement(self, from: f64, to: f64) -> f64 {
        match self {
            Self::Mape => from - to,
            Self::Pcc => to - from,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mape => "mape",
            Self::Pcc => "pcc",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FsrConfig {
    pub candidates: TermSet,
    pub validation_fraction: f64,
    pub min_models: usize,
    /// A step must improve the best validation score by more than this.
    pub improvement_tolerance: f64,
}

impl FsrConfig {
    pub fn new(candidates: TermSet) -> Self {
        Self {
            candidates,
            validation_fraction: 0.2,
            min_models: 200,
            improvement_tolerance: 0.0,
        }
    }
}

/// One greedy step: the candidate added and the validation score after it.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    /// Index into the candidate term set.
    pub term: usize,
    pub score: f64,
    /// Candidate fits evaluated so far, including this step.
    pub models_evaluated: usize,
    /// Whether this step set a new best score.
    pub improved: bool,
}

#[derive(Debug, Clone)]
pub struct FsrResult {
    pub model: PolyModel,
    /// Selected candidate indices, in the order they were added.
    pub selected: Vec<usize>,
    pub trace: Vec<TraceStep>,
    pub objective: Objective,
    pub baseline_score: f64,
    pub validation_score: f64,
    pub models_evaluated: usize,
    pub warnings: Vec<String>,
}

struct Split<'a> {
    x_fit: Matrix,
    x_val: Matrix,
    response_fit: Response,
    response_val: Response,
    classes: usize,
    opts: &'a LogisticOptions,
}

impl Split<'_> {
    fn score(&self, columns: &[usize]) -> Result<f64> {
        let xf = self.x_fit.select_columns(columns);
        let xv = self.x_val.select_columns(columns);
        match (&self.response_fit, &self.response_val) {
            (Response::Numeric(yf), Response::Numeric(yv)) => {
                let f = fit_ols(&xf, yf)?;
                let pred: Vec<f64> = (0..xv.rows())
                    .map(|i| f.intercept + xv.row(i).iter().zip(&f.coefficients).map(|(a, b)| a * b).sum::<f64>())
                    .collect();
                mape(&pred, yv)
            }
            (Response::Class(lf), Response::Class(lv)) => {
                let f = fit_logistic_ova(&xf, lf, self.classes, *self.opts)?;
                pcc(&f.predict(&xv), lv)
            }
            _ => unreachable!("split halves share a response kind"),
        }
    }
}

/// Runs forward stepwise selection; see the module docs for the procedure.
pub fn fsr(train: &Dataset, config: &FsrConfig, seed: u64) -> Result<FsrResult> {
    let cands = &config.candidates;
    if cands.is_empty() {
        return Err(Error::InvalidArgument("empty candidate set".into()));
    }
    if !(config.validation_fraction > 0.0 && config.validation_fraction < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "validation fraction must lie in (0, 1), got {}",
            config.validation_fraction
        )));
    }
    if config.min_models == 0 {
        return Err(Error::InvalidArgument("min_models must be >= 1".into()));
    }
    let n = train.n();
    let holdout = libm::floor(n as f64 * config.validation_fraction) as usize;
    if holdout < 1 || holdout >= n {
        return Err(Error::InvalidArgument(alloc::format!(
            "{n} rows cannot supply a validation holdout of fraction {}",
            config.validation_fraction
        )));
    }
    let enc = encode_design(train);
    if enc.matrix.cols() != cands.width() {
        return Err(Error::Dimension(alloc::format!(
            "candidates built for width {}, design has {}",
            cands.width(),
            enc.matrix.cols()
        )));
    }
    let x = expand(&enc.matrix, cands)?;
    let (fit_rows, val_rows) = split_indices(n, holdout, seed);
    let fit_part = train.select_rows(&fit_rows);
    let val_part = train.select_rows(&val_rows);
    let opts = LogisticOptions::default();
    let (objective, classes) = if train.schema().is_classification() {
        (Objective::Pcc, train.schema().response().levels.len())
    } else {
        (Objective::Mape, 0)
    };
    let split = Split {
        x_fit: x.select_rows(&fit_rows),
        x_val: x.select_rows(&val_rows),
        response_fit: fit_part.response().clone(),
        response_val: val_part.response().clone(),
        classes,
        opts: &opts,
    };

    let baseline = baseline_score(&split)?;
    let mut path: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..cands.len()).collect();
    let mut trace = Vec::new();
    let mut best = baseline;
    let mut best_len = 0;
    let mut models = 0usize;

    while !remaining.is_empty() {
        let scores = par::map_range(remaining.len(), |r| {
            let mut cols = path.clone();
            cols.push(remaining[r]);
            split.score(&cols)
        });
        models += remaining.len();
        let mut pick: Option<(usize, f64)> = None;
        for (r, s) in scores.into_iter().enumerate() {
            let s = s?;
            let better = match pick {
                None => true,
                Some((_, cur)) => objective.improvement(cur, s) > 0.0,
            };
            if better {
                pick = Some((r, s));
            }
        }
        let (r, score) = pick.expect("remaining is nonempty");
        let term = remaining.remove(r);
        path.push(term);
        let improved = objective.improvement(best, score) > config.improvement_tolerance;
        if improved {
            best = score;
            best_len = path.len();
        }
        trace.push(TraceStep {
            step: path.len(),
            term,
            score,
            models_evaluated: models,
            improved,
        });
        if !improved && models >= config.min_models {
            break;
        }
    }

    let selected: Vec<usize> = path[..best_len].to_vec();
    let terms = cands.subset(&selected);
    let positions: Vec<usize> = {
        let mut p = selected.clone();
        p.sort_unstable();
        p
    };
    let xf = split.x_fit.select_columns(&positions);
    let mut model = PolyModel {
        schema: train.schema().clone(),
        design_groups: enc.groups.clone(),
        design_names: enc.names.clone(),
        pca: None,
        terms,
        method: FitMethod::Ols,
        intercepts: Vec::new(),
        coefficients: Vec::new(),
        standardization: None,
        aliased: Vec::new(),
    };
    let mut warnings = enc.warnings;
    match &split.response_fit {
        Response::Numeric(y) => {
            let f = fit_ols(&xf, y)?;
            model.intercepts = alloc::vec![f.intercept];
            model.coefficients = alloc::vec![f.coefficients];
            model.aliased = f.aliased;
        }
        Response::Class(l) => {
            let f = fit_logistic_ova(&xf, l, classes, opts)?;
            warnings.extend(f.warnings);
            model.method = FitMethod::Logistic;
            model.intercepts = f.intercepts;
            model.coefficients = f.coefficients;
            model.standardization = Some(f.standardization);
        }
    }
    Ok(FsrResult {
        model,
        selected,
        trace,
        objective,
        baseline_score: baseline,
        validation_score: best,
        models_evaluated: models,
        warnings,
    })
}

// Intercept-only model: mean response, or the majority class.
fn baseline_score(split: &Split<'_>) -> Result<f64> {
    match (&split.response_fit, &split.response_val) {
        (Response::Numeric(yf), Response::Numeric(yv)) => {
            let m = yf.iter().sum::<f64>() / yf.len() as f64;
            mape(&alloc::vec![m; yv.len()], yv)
        }
        (Response::Class(lf), Response::Class(lv)) => {
            let mut counts = alloc::vec![0usize; split.classes];
            for &l in lf {
                counts[l as usize] += 1;
            }
            let mut major = 0;
            for (c, &k) in counts.iter().enumerate() {
                if k > counts[major] {
                    major = c;
                }
            }
            pcc(&alloc::vec![major as u32; lv.len()], lv)
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::DummyGroups;
    use crate::polyterms::{enumerate_terms, PolySpec};

    fn data(n: usize, noise_only: bool) -> Dataset {
        let x = Matrix::from_fn(n, 2, |i, j| libm::sin((i * (3 + 2 * j)) as f64 * 0.731 + j as f64));
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let e = libm::sin(i as f64 * 12.9898) * 0.1;
                if noise_only {
                    e
                } else {
                    3.0 * x[(i, 0)] + e
                }
            })
            .collect();
        Dataset::from_matrix(&["u", "v"], &x, &y, "y").unwrap()
    }

    #[test]
    fn selects_the_true_term_first() {
        let ds = data(200, false);
        let cands = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(2).unwrap()).unwrap();
        let r = fsr(&ds, &FsrConfig::new(cands), 1).unwrap();
        assert_eq!(r.selected[0], 0);
        assert!(r.validation_score <= r.baseline_score);
        let mut s = r.selected.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), r.selected.len());
        // every candidate is visited because 5+4+3+2+1 < min_models
        assert_eq!(r.trace.len(), 5);
        assert_eq!(r.models_evaluated, 15);
    }

    #[test]
    fn deterministic_under_seed() {
        let ds = data(120, true);
        let cands = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(2).unwrap()).unwrap();
        let cfg = FsrConfig::new(cands);
        let a = fsr(&ds, &cfg, 9).unwrap();
        let b = fsr(&ds, &cfg, 9).unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn stops_after_min_models_without_improvement() {
        let ds = data(200, false);
        let cands = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(3).unwrap()).unwrap();
        let mut cfg = FsrConfig::new(cands);
        cfg.min_models = 1;
        cfg.improvement_tolerance = 1e9;
        let r = fsr(&ds, &cfg, 3).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert!(r.selected.is_empty());
        assert!(r.model.terms.is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        let ds = data(20, false);
        let cands = enumerate_terms(2, &DummyGroups::all_numeric(2), PolySpec::full(1).unwrap()).unwrap();
        let mut cfg = FsrConfig::new(cands.clone());
        cfg.validation_fraction = 0.01;
        assert!(fsr(&ds, &cfg, 0).is_err());
        let empty = cands.subset(&[]);
        assert!(fsr(&ds, &FsrConfig::new(empty), 0).is_err());
    }
}
