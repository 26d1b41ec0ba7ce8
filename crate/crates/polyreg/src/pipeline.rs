//! Split, fit and score on the held-out part.

use polyreg_core::dataset::{split, split_indices, test_size};
use polyreg_core::{
    encode_design, enumerate_terms, fsr, mape, one_hot, pcc, probe_layers, Activation, Dataset, FitReport, FsrConfig,
    FsrResult, Matrix, Mlp, MlpConfig, ModelConfig, OutputKind, PolyModel, PolySpec, Prediction, Response, VifReport,
};

use crate::csvio::ResultRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Scored {
    /// `mape` or `pcc`.
    pub metric: &'static str,
    pub value: f64,
    pub test_rows: usize,
}

pub fn score(model: &PolyModel, test: &Dataset) -> Result<Scored> {
    let pred = model.predict(test.features())?;
    let (metric, value) = match (&pred, test.response()) {
        (Prediction::Numeric(p), Response::Numeric(y)) => ("mape", mape(p, y)?),
        (Prediction::Class(p), Response::Class(y)) => ("pcc", pcc(p, y)?),
        _ => unreachable!("model and data share a schema"),
    };
    Ok(Scored {
        metric,
        value,
        test_rows: test.n(),
    })
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: PolyModel,
    pub report: FitReport,
    pub test: Scored,
}

/// Fits on the training part of a seeded split and scores the rest.
pub fn fit_and_score(ds: &Dataset, config: &ModelConfig, seed: u64) -> Result<FitOutcome> {
    let (train, test) = split(ds, seed)?;
    let (model, report) = PolyModel::fit(&train, config)?;
    let test = score(&model, &test)?;
    Ok(FitOutcome { model, report, test })
}

#[derive(Debug, Clone)]
pub struct FsrOptions {
    pub spec: PolySpec,
    pub min_models: usize,
    pub validation_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct FsrOutcome {
    pub result: FsrResult,
    pub candidate_names: Vec<String>,
    pub candidates: polyreg_core::TermSet,
    pub test: Scored,
}

/// Stepwise selection on the training part, scored on the test part.
pub fn fsr_and_score(ds: &Dataset, opts: &FsrOptions, seed: u64) -> Result<FsrOutcome> {
    let (train, test) = split(ds, seed)?;
    let enc = encode_design(&train);
    let candidates = enumerate_terms(enc.matrix.cols(), &enc.groups, opts.spec)?;
    let mut cfg = FsrConfig::new(candidates.clone());
    cfg.min_models = opts.min_models;
    cfg.validation_fraction = opts.validation_fraction;
    let result = fsr(&train, &cfg, seed)?;
    let test = score(&result.model, &test)?;
    Ok(FsrOutcome {
        result,
        candidate_names: enc.names,
        candidates,
        test,
    })
}

pub fn result_row(setting: &str, dataset: &str, seed: u64, s: &Scored) -> ResultRow {
    ResultRow {
        setting: setting.to_string(),
        dataset: dataset.to_string(),
        seed,
        metric: s.metric.to_string(),
        value: s.value,
    }
}

/// Three dense layers of 10 units with dropout after the first two, the
/// last one a softmax over `classes`.
pub fn table1_config(inputs: usize, classes: usize, seed: u64) -> MlpConfig {
    let mut cfg = MlpConfig::new(
        vec![inputs, 10, 10, classes],
        vec![Activation::Relu, Activation::Relu],
        OutputKind::Softmax,
    );
    cfg.dropout_rates = vec![0.4, 0.3];
    cfg.epochs = 10;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.05;
    cfg.seed = seed;
    cfg
}

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub mlp: Mlp,
    pub epoch_losses: Vec<f64>,
    /// Training rows and the held-out rows the layers were probed on.
    pub train_rows: usize,
    pub probe_rows: usize,
    /// Share of the probe rows the trained network classifies correctly.
    pub probe_pcc: f64,
    pub reports: Vec<VifReport>,
}

/// Splits the rows as for fitting, trains a classifier on the training part
/// and probes the VIFs of every layer on the first `probe_rows` held-out rows
/// (all of them when `None`).
pub fn train_and_probe(
    x: &Matrix,
    labels: &[u32],
    cfg: &MlpConfig,
    probe_rows: Option<usize>,
    threshold: f64,
) -> Result<ProbeOutcome> {
    let classes = *cfg.layer_widths.last().unwrap_or(&0);
    if labels.len() != x.rows() || labels.iter().any(|&l| l as usize >= classes) {
        return Err(Error::Data(format!(
            "labels must be {} values below {classes}",
            x.rows()
        )));
    }
    if x.rows() < 2 {
        return Err(Error::Data("training and probing need at least 2 rows".into()));
    }
    let (train, mut held) = split_indices(x.rows(), test_size(x.rows()), cfg.seed);
    if let Some(r) = probe_rows {
        held.truncate(r.max(1));
    }
    let train_labels: Vec<u32> = train.iter().map(|&i| labels[i]).collect();
    let targets = one_hot(&train_labels, classes);
    let mut mlp = Mlp::new(cfg)?;
    let epoch_losses = mlp.fit(&x.select_rows(&train), &targets, cfg)?;
    let probe = x.select_rows(&held);
    let reports = probe_layers(&mlp, &probe, threshold)?;
    let out = mlp.forward(&probe)?;
    let hits = held
        .iter()
        .enumerate()
        .filter(|&(k, &i)| {
            let row = out.row(k);
            let best = (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b });
            best as u32 == labels[i]
        })
        .count();
    Ok(ProbeOutcome {
        mlp,
        epoch_losses,
        train_rows: train.len(),
        probe_rows: held.len(),
        probe_pcc: hits as f64 / held.len() as f64,
        reports,
    })
}
