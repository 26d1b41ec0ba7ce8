//! Typed tabular data, dummy encoding of categorical columns, and the
//! train/test split.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ColumnKind {
    Numeric,
    Categorical,
    ResponseNumeric,
    ResponseClass,
}

impl ColumnKind {
    pub fn is_response(self) -> bool {
        matches!(self, Self::ResponseNumeric | Self::ResponseClass)
    }

    pub fn has_levels(self) -> bool {
        matches!(self, Self::Categorical | Self::ResponseClass)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Numeric => "numeric",
            Self::Categorical => "categorical",
            Self::ResponseNumeric => "response_numeric",
            Self::ResponseClass => "response_class",
        }
    }
}

impl core::str::FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(Self::Numeric),
            "categorical" => Ok(Self::Categorical),
            "response_numeric" => Ok(Self::ResponseNumeric),
            "response_class" => Ok(Self::ResponseClass),
            other => Err(Error::InvalidArgument(format!("unknown column kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Observed levels, sorted; empty for numeric columns.
    pub levels: Vec<String>,
}

impl ColumnSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
            levels: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn response_numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::ResponseNumeric,
            levels: Vec::new(),
        }
    }

    pub fn response_class<S: Into<String>>(name: impl Into<String>, levels: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::ResponseClass,
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    /// Index of `level` in the sorted level set.
    pub fn level_index(&self, level: &str) -> Option<u32> {
        self.levels
            .binary_search_by(|l| l.as_str().cmp(level))
            .ok()
            .map(|i| i as u32)
    }
}

/// Column names and kinds. Exactly one column is the response; level sets
/// are kept sorted so the reference (dropped) level is the lexicographically
/// first one.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(mut columns: Vec<ColumnSpec>) -> Result<Self> {
        let responses = columns.iter().filter(|c| c.kind.is_response()).count();
        if responses != 1 {
            return Err(Error::InvalidArgument(format!(
                "schema needs exactly one response column, found {responses}"
            )));
        }
        for c in &mut columns {
            if c.kind.has_levels() {
                c.levels.sort();
                c.levels.dedup();
                if c.levels.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "categorical column `{}` lists no levels",
                        c.name
                    )));
                }
            } else {
                c.levels.clear();
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::InvalidArgument(format!("duplicate column `{}`", c.name)));
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn response_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.kind.is_response())
            .expect("schema invariant: one response")
    }

    pub fn response(&self) -> &ColumnSpec {
        &self.columns[self.response_index()]
    }

    /// Feature columns in schema order.
    pub fn features(&self) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(|c| !c.kind.is_response())
    }

    pub fn feature_count(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn is_classification(&self) -> bool {
        self.response().kind == ColumnKind::ResponseClass
    }
}

/// Values of one feature column. Categorical values are indices into the
/// column's sorted level set.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<u32>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Self::Numeric(v) => v.len(),
            Self::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, idx: &[usize]) -> Self {
        match self {
            Self::Numeric(v) => Self::Numeric(idx.iter().map(|&i| v[i]).collect()),
            Self::Categorical(v) => Self::Categorical(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Feature columns only, in schema order. Prediction inputs are frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: Vec<Column>,
    rows: usize,
}

impl Frame {
    /// Checks every column against its schema entry.
    pub fn new(schema: &Schema, columns: Vec<Column>) -> Result<Self> {
        if columns.len() != schema.feature_count() {
            return Err(Error::Dimension(format!(
                "{} feature columns for a schema with {}",
                columns.len(),
                schema.feature_count()
            )));
        }
        let rows = columns.first().map_or(0, Column::len);
        for (spec, col) in schema.features().zip(&columns) {
            if col.len() != rows {
                return Err(Error::Dimension(format!(
                    "column `{}` has {} rows, expected {}",
                    spec.name,
                    col.len(),
                    rows
                )));
            }
            match (spec.kind, col) {
                (ColumnKind::Numeric, Column::Numeric(v)) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::NonFinite("numeric column"));
                    }
                }
                (ColumnKind::Categorical, Column::Categorical(v)) => {
                    if v.iter().any(|&c| c as usize >= spec.levels.len()) {
                        return Err(Error::InvalidArgument(format!(
                            "level code out of range in `{}`",
                            spec.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "column `{}` does not match its declared kind",
                        spec.name
                    )))
                }
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            columns: self.columns.iter().map(|c| c.select(idx)).collect(),
            rows: idx.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    Numeric(Vec<f64>),
    /// Class ids, indices into the response column's sorted levels.
    Class(Vec<u32>),
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Self::Numeric(v) => v.len(),
            Self::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, idx: &[usize]) -> Self {
        match self {
            Self::Numeric(v) => Self::Numeric(idx.iter().map(|&i| v[i]).collect()),
            Self::Class(v) => Self::Class(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// `n` cases over the schema's features plus the response.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    features: Frame,
    response: Response,
}

impl Dataset {
    pub fn new(schema: Schema, features: Vec<Column>, response: Response) -> Result<Self> {
        let features = Frame::new(&schema, features)?;
        let n = if schema.feature_count() == 0 {
            response.len()
        } else {
            features.rows()
        };
        if n == 0 {
            return Err(Error::InvalidArgument("dataset has no rows".into()));
        }
        if response.len() != n {
            return Err(Error::Dimension(format!(
                "response has {} rows, features have {}",
                response.len(),
                n
            )));
        }
        let spec = schema.response();
        match (&response, spec.kind) {
            (Response::Numeric(v), ColumnKind::ResponseNumeric) => {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("response"));
                }
            }
            (Response::Class(v), ColumnKind::ResponseClass) => {
                if v.iter().any(|&c| c as usize >= spec.levels.len()) {
                    return Err(Error::InvalidArgument("class id out of range".into()));
                }
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "response values do not match the response column kind".into(),
                ))
            }
        }
        let features = Frame { rows: n, ..features };
        Ok(Self {
            schema,
            features,
            response,
        })
    }

    /// All-numeric dataset from a design matrix and a numeric response.
    pub fn from_matrix(names: &[&str], x: &Matrix, y: &[f64], response_name: &str) -> Result<Self> {
        if names.len() != x.cols() {
            return Err(Error::Dimension("one name per column required".into()));
        }
        let mut specs: Vec<ColumnSpec> = names.iter().map(|n| ColumnSpec::numeric(*n)).collect();
        specs.push(ColumnSpec::response_numeric(response_name));
        let schema = Schema::new(specs)?;
        let cols = x.columns().into_iter().map(Column::Numeric).collect();
        Self::new(schema, cols, Response::Numeric(y.to_vec()))
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn features(&self) -> &Frame {
        &self.features
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn n(&self) -> usize {
        self.features.rows()
    }

    pub fn p(&self) -> usize {
        self.schema.feature_count()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            schema: self.schema.clone(),
            features: self.features.select_rows(idx),
            response: self.response.select(idx),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DummyGroup {
    /// Name of the categorical column the dummies came from.
    pub source: String,
    /// Design-matrix column indices of the group's indicators.
    pub columns: Vec<usize>,
}

/// Which design columns are indicators and which categorical column each
/// indicator belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DummyGroups {
    pub groups: Vec<DummyGroup>,
    pub numeric_indices: Vec<usize>,
}

impl DummyGroups {
    /// All columns numeric.
    pub fn all_numeric(m: usize) -> Self {
        Self {
            groups: Vec::new(),
            numeric_indices: (0..m).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.numeric_indices.len() + self.groups.iter().map(|g| g.columns.len()).sum::<usize>()
    }

    /// Group index of a design column, `None` for numeric columns.
    pub fn group_of(&self, column: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.columns.contains(&column))
    }

    /// Per-column group id lookup table of length `m`.
    pub fn group_table(&self, m: usize) -> Vec<Option<usize>> {
        let mut t = alloc::vec![None; m];
        for (g, grp) in self.groups.iter().enumerate() {
            for &c in &grp.columns {
                if c < m {
                    t[c] = Some(g);
                }
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDesign {
    pub matrix: Matrix,
    pub groups: DummyGroups,
    pub names: Vec<String>,
    pub warnings: Vec<String>,
}

/// Dummy-encodes the features of a dataset.
pub fn encode_design(ds: &Dataset) -> EncodedDesign {
    encode_frame(ds.schema(), ds.features())
}

/// Numeric columns pass through in schema order; each categorical column
/// with `k` levels then contributes `k - 1` indicators, the first level
/// being the reference. A single-level column contributes nothing.
pub fn encode_frame(schema: &Schema, frame: &Frame) -> EncodedDesign {
    let n = frame.rows();
    let mut out_cols: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    let mut warnings = Vec::new();
    let mut groups = DummyGroups::default();

    for (spec, col) in schema.features().zip(frame.columns()) {
        if let Column::Numeric(v) = col {
            groups.numeric_indices.push(out_cols.len());
            names.push(spec.name.clone());
            out_cols.push(v.clone());
        }
    }
    for (spec, col) in schema.features().zip(frame.columns()) {
        if let Column::Categorical(codes) = col {
            let k = spec.levels.len();
            if k < 2 {
                warnings.push(format!(
                    "categorical column `{}` has a single level; it contributes no columns",
                    spec.name
                ));
                continue;
            }
            let start = out_cols.len();
            for (l, level) in spec.levels.iter().enumerate().skip(1) {
                out_cols.push(codes.iter().map(|&c| if c as usize == l { 1.0 } else { 0.0 }).collect());
                names.push(format!("{}={}", spec.name, level));
            }
            groups.groups.push(DummyGroup {
                source: spec.name.to_string(),
                columns: (start..out_cols.len()).collect(),
            });
        }
    }
    let matrix = if out_cols.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&out_cols).expect("columns share the frame's row count")
    };
    EncodedDesign {
        matrix,
        groups,
        names,
        warnings,
    }
}

/// Holdout size: capped at 10000 for large data, one fifth otherwise (at
/// least one row).
pub fn test_size(n: usize) -> usize {
    if n > 20_000 {
        n.min(10_000)
    } else {
        (n / 5).max(1)
    }
}

/// Uniform split without replacement; both parts keep the original row
/// order.
pub fn split(ds: &Dataset, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = ds.n();
    if n < 2 {
        return Err(Error::InvalidArgument("split needs at least 2 rows".into()));
    }
    let (train, test) = split_indices(n, test_size(n), seed);
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Draws `holdout` of `n` indices; returns `(rest, holdout)`, each sorted.
pub fn split_indices(n: usize, holdout: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = rand::seq::index::sample(&mut rng, n, holdout.min(n)).into_vec();
    test.sort_unstable();
    let mut mask = alloc::vec![false; n];
    for &i in &test {
        mask[i] = true;
    }
    let train = (0..n).filter(|&i| !mask[i]).collect();
    (train, test)
}
