//! Model files.
//!
//! A fitted [`PolyModel`] is stored as JSON:
//!
//! ```text
//! {"format": "polyreg-model", "version": 1, "model": { ... }}
//! ```
//!
//! The model object holds the schema, indicator layout, optional PCA basis,
//! term set and coefficients. Loading re-validates the schema and term set.
//!
//! Network weights use a text container:
//!
//! ```text
//! polyreg-mlp 1
//! dense <inputs> <outputs> <relu|tanh|square|identity|softmax>
//! <bias values>
//! <one line of weights per output unit>
//! dropout <rate>
//! ...
//! ```
//!
//! Values are whitespace separated and written with enough digits to read
//! back exactly.

use std::fmt::Write as _;
use std::path::Path;

use polyreg_core::{Activation, Dense, Layer, Matrix, Mlp, PolyModel, Schema, TermSet, Transfer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textfmt::{read_text, write_text};

pub const MODEL_FORMAT: &str = "polyreg-model";
pub const MODEL_VERSION: u32 = 1;
const MLP_MAGIC: &str = "polyreg-mlp 1";

#[derive(Serialize)]
struct Envelope<'a> {
    format: &'a str,
    version: u32,
    model: &'a PolyModel,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Deserialize)]
struct OwnedEnvelope {
    model: PolyModel,
}

pub fn model_to_json(model: &PolyModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Envelope {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model,
    })?)
}

pub fn model_from_json(text: &str) -> Result<PolyModel> {
    let header: Header = serde_json::from_str(text)?;
    if header.format != MODEL_FORMAT {
        return Err(Error::Data(format!("not a model file (format `{}`)", header.format)));
    }
    if header.version != MODEL_VERSION {
        return Err(Error::VersionMismatch {
            found: header.version,
            expected: MODEL_VERSION,
        });
    }
    let mut model = serde_json::from_str::<OwnedEnvelope>(text)?.model;
    model.schema = Schema::new(model.schema.columns().to_vec())?;
    model.terms = TermSet::from_monomials(
        model.terms.monomials().to_vec(),
        model.terms.width(),
        model.terms.groups().clone(),
        model.terms.spec(),
    )?;
    let outputs = model.intercepts.len();
    if outputs == 0
        || model.coefficients.len() != outputs
        || model.coefficients.iter().any(|c| c.len() != model.terms.len())
    {
        return Err(Error::Data("model coefficients do not match its term set".into()));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &PolyModel) -> Result<()> {
    write_text(path, &model_to_json(model)?)
}

pub fn load_model(path: &Path) -> Result<PolyModel> {
    model_from_json(&read_text(path)?)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

pub fn format_mlp(mlp: &Mlp) -> String {
    let mut out = format!("{MLP_MAGIC}\n");
    for layer in mlp.layers() {
        match layer {
            Layer::Dense(d) => {
                let _ = writeln!(
                    out,
                    "dense {} {} {}",
                    d.input_width(),
                    d.output_width(),
                    d.transfer.name()
                );
                let _ = writeln!(out, "{}", join(&d.bias));
                for o in 0..d.output_width() {
                    let _ = writeln!(out, "{}", join(d.weights.row(o)));
                }
            }
            Layer::Dropout { rate } => {
                let _ = writeln!(out, "dropout {rate:?}");
            }
        }
    }
    out
}

pub fn parse_mlp(text: &str, path: &Path) -> Result<Mlp> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    match lines.first() {
        Some((_, l)) if *l == MLP_MAGIC => {}
        Some((line, l)) => return Err(Error::parse(path, *line, format!("expected `{MLP_MAGIC}`, got `{l}`"))),
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut pos = 1;
    let numbers = |pos: &mut usize, count: usize, what: &str| -> Result<Vec<f64>> {
        let (line, l) = *lines
            .get(*pos)
            .ok_or_else(|| Error::parse(path, 0, format!("file ends before {what}")))?;
        *pos += 1;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, line, format!("bad number in {what}")))?;
        if v.len() != count {
            return Err(Error::parse(
                path,
                line,
                format!("{what}: expected {count} values, got {}", v.len()),
            ));
        }
        Ok(v)
    };
    let mut layers = Vec::new();
    while let Some(&(line, l)) = lines.get(pos) {
        pos += 1;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            ["dense", i, o, t] => {
                let (i, o): (usize, usize) = match (i.parse(), o.parse()) {
                    (Ok(i), Ok(o)) => (i, o),
                    _ => return Err(Error::parse(path, line, "bad layer shape")),
                };
                let transfer = if *t == "softmax" {
                    Transfer::Softmax
                } else {
                    Transfer::Pointwise(
                        t.parse::<Activation>()
                            .map_err(|e| Error::parse(path, line, e.to_string()))?,
                    )
                };
                let bias = numbers(&mut pos, o, "bias")?;
                let mut w = Vec::with_capacity(i * o);
                for _ in 0..o {
                    w.extend(numbers(&mut pos, i, "weights")?);
                }
                layers.push(Layer::Dense(Dense {
                    weights: Matrix::new(o, i, w)?,
                    bias,
                    transfer,
                }));
            }
            ["dropout", r] => {
                let rate = r.parse().map_err(|_| Error::parse(path, line, "bad dropout rate"))?;
                layers.push(Layer::Dropout { rate });
            }
            _ => return Err(Error::parse(path, line, format!("unrecognized layer line `{l}`"))),
        }
    }
    Mlp::from_layers(layers).map_err(|e| Error::parse(path, 0, e.to_string()))
}

pub fn save_mlp(path: &Path, mlp: &Mlp) -> Result<()> {
    write_text(path, &format_mlp(mlp))
}

pub fn load_mlp(path: &Path) -> Result<Mlp> {
    parse_mlp(&read_text(path)?, path)
}
