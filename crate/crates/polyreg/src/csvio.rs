//! Delimited-text ingestion and the CSV outputs.
//!
//! Input files are comma separated, UTF-8, with a header row. A cell that is
//! empty, `NA`, `NaN` or `?` counts as missing and drops its row.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use polyreg_core::{Column, ColumnKind, ColumnSpec, Dataset, Frame, Prediction, Response, Schema};

use crate::error::{Error, Result};

pub const DEFAULT_CATEGORICAL_THRESHOLD: usize = 12;

/// Header plus raw cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(file, path)
}

pub fn read_table_from(reader: impl io::Read, path: &Path) -> Result<Table> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut seen = BTreeSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(Error::Data(format!("{}: duplicate column `{h}`", path.display())));
        }
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(rec.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(Table { headers, rows })
}

pub fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") || cell == "?"
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Column types and levels; inferred from the data when absent.
    pub schema: Option<Schema>,
    /// Response column name; defaults to the last column.
    pub response: Option<String>,
    /// Forces the response type during inference.
    pub response_kind: Option<ColumnKind>,
    /// Columns with at most this many distinct values are categorical.
    pub categorical_threshold: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            schema: None,
            response: None,
            response_kind: None,
            categorical_threshold: DEFAULT_CATEGORICAL_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub dropped_rows: usize,
    /// Categorical cells whose level is not in the schema; they are mapped
    /// to the reference level.
    pub unseen_levels: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedFrame {
    pub frame: Frame,
    /// Data-row index (0-based, header excluded) of each frame row.
    pub kept_rows: Vec<usize>,
    pub dropped_rows: usize,
    pub unseen_levels: usize,
    pub warnings: Vec<String>,
}

pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Loaded> {
    let table = read_table(path)?;
    dataset_from_table(&table, opts, path)
}

/// Types the columns of `table`: a column is categorical when any value is
/// non-numeric or it has at most `threshold` distinct values.
pub fn infer_schema(
    table: &Table,
    response: &str,
    response_kind: Option<ColumnKind>,
    threshold: usize,
) -> Result<Schema> {
    if table.column_index(response).is_none() {
        return Err(Error::Data(format!("response column `{response}` not found")));
    }
    let complete: Vec<&Vec<String>> = table.rows.iter().filter(|r| !r.iter().any(|c| is_missing(c))).collect();
    let mut specs = Vec::with_capacity(table.headers.len());
    for (j, name) in table.headers.iter().enumerate() {
        let distinct: BTreeSet<&str> = complete.iter().map(|r| r[j].as_str()).collect();
        let numeric = distinct.iter().all(|c| parse_number(c).is_some());
        let categorical = !numeric || distinct.len() <= threshold;
        let spec = if name == response {
            match response_kind {
                Some(ColumnKind::ResponseNumeric) if !numeric => {
                    return Err(Error::Data(format!("response `{name}` has non-numeric values")))
                }
                Some(ColumnKind::ResponseNumeric) => ColumnSpec::response_numeric(name.clone()),
                Some(ColumnKind::ResponseClass) => ColumnSpec::response_class(name.clone(), distinct),
                Some(other) => return Err(Error::Usage(format!("`{}` is not a response kind", other.as_str()))),
                None if categorical => ColumnSpec::response_class(name.clone(), distinct),
                None => ColumnSpec::response_numeric(name.clone()),
            }
        } else if categorical {
            ColumnSpec::categorical(name.clone(), distinct)
        } else {
            ColumnSpec::numeric(name.clone())
        };
        specs.push(spec);
    }
    Ok(Schema::new(specs)?)
}

pub fn dataset_from_table(table: &Table, opts: &LoadOptions, path: &Path) -> Result<Loaded> {
    let schema = match &opts.schema {
        Some(s) => s.clone(),
        None => {
            let response = match &opts.response {
                Some(r) => r.clone(),
                None => table
                    .headers
                    .last()
                    .cloned()
                    .ok_or_else(|| Error::Data(format!("{}: no columns", path.display())))?,
            };
            infer_schema(table, &response, opts.response_kind, opts.categorical_threshold)?
        }
    };
    let resp = schema.response();
    let resp_idx = table
        .column_index(&resp.name)
        .ok_or_else(|| Error::Data(format!("{}: response column `{}` is absent", path.display(), resp.name)))?;
    let parsed = parse_columns(table, &schema, path)?;
    let mut warnings = parsed.warnings;
    let rows = &parsed.kept;
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no usable rows", path.display())));
    }
    let response = match resp.kind {
        ColumnKind::ResponseNumeric => {
            let mut v = Vec::with_capacity(rows.len());
            for &r in rows {
                let cell = &table.rows[r][resp_idx];
                v.push(parse_number(cell).ok_or_else(|| {
                    Error::parse(
                        path,
                        r + 2,
                        format!("response `{}`: `{cell}` is not a number", resp.name),
                    )
                })?);
            }
            Response::Numeric(v)
        }
        _ => {
            let mut v = Vec::with_capacity(rows.len());
            for &r in rows {
                let cell = &table.rows[r][resp_idx];
                v.push(resp.level_index(cell).ok_or_else(|| {
                    Error::parse(path, r + 2, format!("response `{}`: unknown class `{cell}`", resp.name))
                })?);
            }
            Response::Class(v)
        }
    };
    if parsed.dropped > 0 {
        warnings.push(format!("{} row(s) dropped for missing values", parsed.dropped));
    }
    let dataset = Dataset::new(schema, parsed.columns, response)?;
    Ok(Loaded {
        dataset,
        dropped_rows: parsed.dropped,
        unseen_levels: parsed.unseen,
        warnings,
    })
}

/// Reads feature columns for prediction. The response column, if present,
/// is ignored; an empty file gives an empty frame.
pub fn load_frame(path: &Path, schema: &Schema) -> Result<LoadedFrame> {
    let table = read_table(path)?;
    frame_from_table(&table, schema, path)
}

pub fn frame_from_table(table: &Table, schema: &Schema, path: &Path) -> Result<LoadedFrame> {
    let parsed = parse_columns(table, schema, path)?;
    let mut warnings = parsed.warnings;
    if parsed.dropped > 0 {
        warnings.push(format!("{} row(s) dropped for missing values", parsed.dropped));
    }
    Ok(LoadedFrame {
        frame: Frame::new(schema, parsed.columns)?,
        kept_rows: parsed.kept,
        dropped_rows: parsed.dropped,
        unseen_levels: parsed.unseen,
        warnings,
    })
}

struct Parsed {
    columns: Vec<Column>,
    kept: Vec<usize>,
    dropped: usize,
    unseen: usize,
    warnings: Vec<String>,
}

// Feature columns in schema order, over rows complete in every column the
// schema uses (the response only if the file has it).
fn parse_columns(table: &Table, schema: &Schema, path: &Path) -> Result<Parsed> {
    let mut feature_idx = Vec::new();
    for spec in schema.features() {
        let j = table
            .column_index(&spec.name)
            .ok_or_else(|| Error::Data(format!("{}: column `{}` is absent", path.display(), spec.name)))?;
        feature_idx.push(j);
    }
    let mut used = feature_idx.clone();
    if let Some(j) = table.column_index(&schema.response().name) {
        used.push(j);
    }
    let kept: Vec<usize> = (0..table.rows.len())
        .filter(|&r| !used.iter().any(|&j| is_missing(&table.rows[r][j])))
        .collect();
    let dropped = table.rows.len() - kept.len();
    let mut unseen = 0;
    let mut warnings = Vec::new();
    let mut columns = Vec::with_capacity(feature_idx.len());
    for (spec, &j) in schema.features().zip(&feature_idx) {
        match spec.kind {
            ColumnKind::Numeric => {
                let mut v = Vec::with_capacity(kept.len());
                for &r in &kept {
                    let cell = &table.rows[r][j];
                    v.push(parse_number(cell).ok_or_else(|| {
                        Error::parse(path, r + 2, format!("column `{}`: `{cell}` is not a number", spec.name))
                    })?);
                }
                columns.push(Column::Numeric(v));
            }
            _ => {
                let mut col_unseen = 0;
                let codes = kept
                    .iter()
                    .map(|&r| {
                        spec.level_index(&table.rows[r][j]).unwrap_or_else(|| {
                            col_unseen += 1;
                            0
                        })
                    })
                    .collect();
                if col_unseen > 0 {
                    warnings.push(format!(
                        "column `{}`: {col_unseen} value(s) with unseen levels mapped to reference level `{}`",
                        spec.name, spec.levels[0]
                    ));
                }
                unseen += col_unseen;
                columns.push(Column::Categorical(codes));
            }
        }
    }
    Ok(Parsed {
        columns,
        kept,
        dropped,
        unseen,
        warnings,
    })
}

/// Writes a `Dataset` back out as CSV (features then response, schema
/// order).
pub fn write_dataset(out: impl Write, ds: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let schema = ds.schema();
    let mut header: Vec<&str> = schema.features().map(|c| c.name.as_str()).collect();
    header.push(&schema.response().name);
    w.write_record(&header).map_err(csv_out)?;
    let specs: Vec<&ColumnSpec> = schema.features().collect();
    for i in 0..ds.n() {
        let mut rec: Vec<String> = ds
            .features()
            .columns()
            .iter()
            .zip(&specs)
            .map(|(c, s)| match c {
                Column::Numeric(v) => v[i].to_string(),
                Column::Categorical(v) => s.levels[v[i] as usize].clone(),
            })
            .collect();
        rec.push(match ds.response() {
            Response::Numeric(v) => v[i].to_string(),
            Response::Class(v) => schema.response().levels[v[i] as usize].clone(),
        });
        w.write_record(&rec).map_err(csv_out)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

fn csv_out(source: csv::Error) -> Error {
    Error::Csv {
        path: "<output>".into(),
        source,
    }
}

/// `row,prediction`, where `row` is the input data-row index; classes are
/// written by level name.
pub fn write_predictions(out: impl Write, rows: &[usize], pred: &Prediction, response: &ColumnSpec) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "prediction"]).map_err(csv_out)?;
    match pred {
        Prediction::Numeric(v) => {
            for (i, p) in rows.iter().zip(v) {
                w.write_record([i.to_string(), p.to_string()]).map_err(csv_out)?;
            }
        }
        Prediction::Class(v) => {
            for (i, &c) in rows.iter().zip(v) {
                w.write_record([i.to_string(), response.levels[c as usize].clone()])
                    .map_err(csv_out)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

/// A row of the shared results schema.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ResultRow {
    pub setting: String,
    pub dataset: String,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

/// Appends rows, writing the header first if the file is new or empty.
pub fn append_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for r in rows {
        w.serialize(r).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    rdr.deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })
}
