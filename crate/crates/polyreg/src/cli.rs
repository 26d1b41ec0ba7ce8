//! The `polyreg` command line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyreg_core::{
    degree_growth_report, equivalence_check, extract_polynomial, Activation, ColumnKind, Dataset, FitMethod, Frame,
    Matrix, Mlp, MlpConfig, ModelConfig, OutputKind, PolySpec, Prediction, VifReport,
};

use crate::config::expand_config_args;
use crate::container::{load_mlp, load_model, save_mlp, save_model};
use crate::csvio::{
    append_results, frame_from_table, load_csv, read_table, write_dataset, write_predictions, LoadOptions,
    DEFAULT_CATEGORICAL_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::mnist;
use crate::pipeline::{self, fit_and_score, fsr_and_score, result_row, FsrOptions};
use crate::report::{vif_table, write_trace_csv, write_vif_csv};
use crate::synth::{generate, Generator};
use crate::textfmt::{format_polys, format_schema, format_terms, parse_schema, read_text, write_text};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  bad flags, config file or option combination
  3  unreadable or malformed input (CSV, schema, model, weights)
  4  fitting or numerical failure
  5  model file written by an unsupported container version";

#[derive(Debug, Parser)]
#[command(
    name = "polyreg",
    version,
    about = "Polynomial regression with stepwise selection, plus network diagnostics",
    after_help = EXIT_CODES,
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads for parallel sections [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// File of `key = value` lines supplying flags; command-line flags win
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split, fit a polynomial model, score it on the held-out rows
    #[command(args_override_self = true)]
    Fit(FitArgs),
    /// Predict with a saved model
    #[command(args_override_self = true)]
    Predict(PredictArgs),
    /// Run several degrees over several seeds into one results CSV
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Write a synthetic dataset with known structure
    #[command(args_override_self = true)]
    Synth(SynthArgs),
    /// Per-layer VIF summary of a network
    #[command(args_override_self = true)]
    VifProbe(VifProbeArgs),
    /// Extract the exact polynomial computed by a random polynomial-activation network
    #[command(args_override_self = true)]
    EquivDemo(EquivArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ResponseKindArg {
    Numeric,
    Class,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Ols,
    Ridge,
    Logistic,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input CSV with a header row
    #[arg(long, value_name = "PATH")]
    data: PathBuf,

    /// Schema sidecar (`name = kind[: levels]` lines); inferred when absent
    #[arg(long, value_name = "PATH")]
    schema: Option<PathBuf>,

    /// Response column [default: last column]
    #[arg(long, value_name = "NAME")]
    response: Option<String>,

    /// Force the response type during inference
    #[arg(long, value_enum)]
    response_kind: Option<ResponseKindArg>,

    /// Columns with at most this many distinct values are treated as categorical
    #[arg(long, default_value_t = DEFAULT_CATEGORICAL_THRESHOLD, value_name = "N")]
    categorical_threshold: usize,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Largest interaction degree [default: the degree]
    #[arg(long, value_name = "K")]
    interact: Option<u32>,

    /// Fitting method [default: logistic for class responses, ols otherwise]
    #[arg(long, value_enum)]
    method: Option<MethodArg>,

    /// Ridge penalty (ridge only)
    #[arg(long)]
    lambda: Option<f64>,

    /// Replace the encoded predictors by principal components explaining this variance fraction
    #[arg(long, value_name = "FRACTION")]
    pca_fraction: Option<f64>,

    /// Keep a random fraction of the polynomial terms
    #[arg(long, value_name = "FRACTION")]
    keep_fraction: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Polynomial degree
    #[arg(long, default_value_t = 2)]
    degree: u32,

    #[command(flatten)]
    model: ModelArgs,

    /// Select terms by forward stepwise regression instead of using all of them
    #[arg(long)]
    fsr: bool,

    /// Candidate fits stepwise selection evaluates before it may stop
    #[arg(long, default_value_t = 200, value_name = "N")]
    min_models: usize,

    /// Share of the training rows used as the stepwise validation holdout
    #[arg(long, default_value_t = 0.2, value_name = "FRACTION")]
    validation_fraction: f64,

    /// Seed for the train/test split and every random choice
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory for the model, term list and reports
    #[arg(long, default_value = "polyreg-out", value_name = "DIR")]
    out: PathBuf,

    /// Results CSV to append to [default: <out>/results.csv]
    #[arg(long, value_name = "PATH")]
    results: Option<PathBuf>,

    /// Setting label for the results row [default: e.g. `PR 2`]
    #[arg(long)]
    setting: Option<String>,

    /// Dataset label for the results row [default: data file stem]
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Model file written by `fit`
    #[arg(long, value_name = "PATH")]
    model: PathBuf,

    /// CSV with the model's feature columns
    #[arg(long, value_name = "PATH")]
    data: PathBuf,

    /// Predictions CSV [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,

    /// Degrees to fit
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    degrees: Vec<u32>,

    #[command(flatten)]
    model: ModelArgs,

    /// Also run stepwise selection at each degree
    #[arg(long)]
    fsr: bool,

    /// Candidate fits stepwise selection evaluates before it may stop
    #[arg(long, default_value_t = 200, value_name = "N")]
    min_models: usize,

    /// Number of seeds, starting at --first-seed
    #[arg(long, default_value_t = 5, value_name = "N")]
    seeds: u64,

    /// First seed of the run
    #[arg(long, default_value_t = 0)]
    first_seed: u64,

    /// Results CSV to append to
    #[arg(long, default_value = "results.csv", value_name = "PATH")]
    results: PathBuf,

    /// Dataset label for the results rows [default: data file stem]
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: Generator,

    #[arg(long, default_value_t = 1000)]
    n: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output CSV [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VifProbeArgs {
    /// Probe a saved network instead of training one
    #[arg(long, value_name = "PATH")]
    weights: Option<PathBuf>,

    /// Numeric CSV of inputs (plus a label column when training)
    #[arg(long, value_name = "PATH", conflicts_with = "digits")]
    data: Option<PathBuf>,

    /// Label column in --data [default when training: last column]
    #[arg(long, value_name = "NAME")]
    response: Option<String>,

    /// Use this many handwritten digits (real MNIST from $POLYREG_MNIST_DIR, else a synthetic stand-in)
    #[arg(long, value_name = "N")]
    digits: Option<usize>,

    /// Hidden layer widths
    #[arg(long, value_delimiter = ',', default_value = "10,10")]
    hidden: Vec<usize>,

    /// Hidden activation
    #[arg(long, default_value = "relu")]
    activation: Activation,

    /// Dropout rate after each hidden layer
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.3")]
    dropout: Vec<f64>,

    #[arg(long, default_value_t = 10)]
    epochs: usize,

    #[arg(long, default_value_t = 32)]
    batch_size: usize,

    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Rows the VIFs are computed on: held-out rows when training, leading input rows with --weights [default: all]
    #[arg(long, value_name = "N")]
    probe_rows: Option<usize>,

    /// VIF level counted as high
    #[arg(long, default_value_t = polyreg_core::DEFAULT_THRESHOLD)]
    threshold: f64,

    /// Also write the table as CSV
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Save the trained network
    #[arg(long, value_name = "PATH")]
    save_weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EquivArgs {
    #[arg(long, default_value_t = 2)]
    inputs: usize,

    /// Hidden layers
    #[arg(long, default_value_t = 2)]
    layers: usize,

    /// Units per hidden layer
    #[arg(long, default_value_t = 3)]
    width: usize,

    #[arg(long, default_value_t = 1)]
    outputs: usize,

    /// Hidden activation (square or identity)
    #[arg(long, default_value = "square")]
    activation: Activation,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Random points for the forward-pass comparison
    #[arg(long, default_value_t = 100)]
    points: usize,

    /// Print the output polynomials
    #[arg(long)]
    show: bool,

    /// Write the output polynomials in the coefficient text format
    #[arg(long, value_name = "PATH")]
    poly_out: Option<PathBuf>,
}

/// Warnings gathered during a run, printed to stderr at the end.
#[derive(Debug, Default)]
struct Warnings(BTreeMap<String, usize>);

impl Warnings {
    fn add(&mut self, w: impl Into<String>) {
        *self.0.entry(w.into()).or_default() += 1;
    }

    fn extend(&mut self, ws: impl IntoIterator<Item = String>) {
        for w in ws {
            self.add(w);
        }
    }

    fn flush(&self) {
        if self.0.is_empty() {
            return;
        }
        let mut err = io::stderr().lock();
        for (w, n) in &self.0 {
            if *n > 1 {
                let _ = writeln!(err, "warning: {w} (x{n})");
            } else {
                let _ = writeln!(err, "warning: {w}");
            }
        }
        let total: usize = self.0.values().sum();
        let _ = writeln!(err, "{total} warning(s)");
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match expand_config_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut warnings = Warnings::default();
    let result = dispatch(cli, &mut warnings);
    warnings.flush();
    match result {
        Ok(()) => 0,
        Err(Error::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(Error::Csv { source, .. }) if matches!(source.kind(), csv::ErrorKind::Io(e) if e.kind() == io::ErrorKind::BrokenPipe) => {
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, warnings: &mut Warnings) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot set up {t} threads: {e}")))?;
    }
    match cli.command {
        Command::Fit(a) => cmd_fit(a, warnings),
        Command::Predict(a) => cmd_predict(a, warnings),
        Command::Bench(a) => cmd_bench(a, warnings),
        Command::Synth(a) => cmd_synth(a),
        Command::VifProbe(a) => cmd_vif_probe(a, warnings),
        Command::EquivDemo(a) => cmd_equiv_demo(a),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn load_data(a: &DataArgs, warnings: &mut Warnings) -> Result<Dataset> {
    let schema = match &a.schema {
        Some(p) => Some(parse_schema(&read_text(p)?, p)?),
        None => None,
    };
    let opts = LoadOptions {
        schema,
        response: a.response.clone(),
        response_kind: a.response_kind.map(|k| match k {
            ResponseKindArg::Numeric => ColumnKind::ResponseNumeric,
            ResponseKindArg::Class => ColumnKind::ResponseClass,
        }),
        categorical_threshold: a.categorical_threshold,
    };
    let loaded = load_csv(&a.data, &opts)?;
    warnings.extend(loaded.warnings);
    Ok(loaded.dataset)
}

fn dataset_label(explicit: &Option<String>, path: &Path) -> String {
    explicit.clone().unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
    })
}

fn fraction(name: &str, v: Option<f64>, closed_top: bool) -> Result<Option<f64>> {
    match v {
        Some(f) if !(f > 0.0 && (f < 1.0 || (closed_top && f == 1.0))) => Err(usage(format!(
            "--{name} must lie in (0, 1{}",
            if closed_top { "]" } else { ")" }
        ))),
        _ => Ok(v),
    }
}

fn model_config(m: &ModelArgs, degree: u32, classification: bool, seed: u64) -> Result<ModelConfig> {
    let spec = PolySpec::new(degree, m.interact.unwrap_or(degree)).map_err(|e| usage(e.to_string()))?;
    let method = match (m.method, classification) {
        (None, true) | (Some(MethodArg::Logistic), true) => FitMethod::Logistic,
        (None, false) | (Some(MethodArg::Ols), false) => FitMethod::Ols,
        (Some(MethodArg::Ridge), false) => {
            let lambda = m.lambda.ok_or_else(|| usage("--method ridge needs --lambda"))?;
            if !(lambda >= 0.0 && lambda.is_finite()) {
                return Err(usage("--lambda must be a nonnegative number"));
            }
            FitMethod::Ridge { lambda }
        }
        (Some(MethodArg::Logistic), false) => {
            return Err(usage("--method logistic needs a class response (see --response-kind)"))
        }
        (Some(_), true) => return Err(usage("a class response is fitted with --method logistic")),
    };
    if m.lambda.is_some() && !matches!(method, FitMethod::Ridge { .. }) {
        return Err(usage("--lambda applies only with --method ridge"));
    }
    let mut cfg = ModelConfig::new(spec, method);
    cfg.pca_fraction = fraction("pca-fraction", m.pca_fraction, true)?;
    cfg.keep_fraction = fraction("keep-fraction", m.keep_fraction, true)?;
    cfg.seed = seed;
    Ok(cfg)
}

fn default_setting(cfg: &ModelConfig, fsr: bool) -> String {
    let mut s = format!("{} {}", if fsr { "FSR" } else { "PR" }, cfg.spec.degree());
    if cfg.spec.max_interact_degree() != cfg.spec.degree() {
        s.push_str(&format!(", interact {}", cfg.spec.max_interact_degree()));
    }
    if let FitMethod::Ridge { lambda } = cfg.method {
        s.push_str(&format!(", ridge {lambda}"));
    }
    if let Some(f) = cfg.pca_fraction {
        s.push_str(&format!(", PCA {f}"));
    }
    if let Some(f) = cfg.keep_fraction {
        s.push_str(&format!(", keep {f}"));
    }
    s
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn check_fsr_flags(m: &ModelArgs) -> Result<()> {
    if m.pca_fraction.is_some() || m.keep_fraction.is_some() || m.method == Some(MethodArg::Ridge) {
        return Err(usage(
            "--fsr cannot be combined with --pca-fraction, --keep-fraction or ridge",
        ));
    }
    Ok(())
}

fn cmd_fit(a: FitArgs, warnings: &mut Warnings) -> Result<()> {
    let ds = load_data(&a.data, warnings)?;
    let cfg = model_config(&a.model, a.degree, ds.schema().is_classification(), a.seed)?;
    let setting = a.setting.clone().unwrap_or_else(|| default_setting(&cfg, a.fsr));
    let dataset = dataset_label(&a.dataset, &a.data.data);
    create_dir(&a.out)?;
    let mut stdout = io::stdout().lock();
    let out_err = |e| Error::io("<stdout>", e);

    let (model, scored) = if a.fsr {
        check_fsr_flags(&a.model)?;
        let opts = FsrOptions {
            spec: cfg.spec,
            min_models: a.min_models,
            validation_fraction: fraction("validation-fraction", Some(a.validation_fraction), false)?.unwrap_or(0.2),
        };
        let out = fsr_and_score(&ds, &opts, a.seed)?;
        warnings.extend(out.result.warnings.iter().cloned());
        let trace_path = a.out.join("fsr_trace.csv");
        write_trace_csv(
            create_file(&trace_path)?,
            &out.result.trace,
            &out.candidates,
            &out.candidate_names,
        )?;
        let r = &out.result;
        writeln!(stdout, "candidates: {}", out.candidates.len()).map_err(out_err)?;
        writeln!(stdout, "models evaluated: {}", r.models_evaluated).map_err(out_err)?;
        let labels: Vec<String> = r
            .selected
            .iter()
            .map(|&t| crate::report::term_label(&out.candidates, &out.candidate_names, t))
            .collect();
        writeln!(stdout, "selected: {}", labels.join(" + ")).map_err(out_err)?;
        writeln!(
            stdout,
            "validation {}: {} (intercept only: {})",
            r.objective.name(),
            r.validation_score,
            r.baseline_score
        )
        .map_err(out_err)?;
        writeln!(stdout, "trace: {}", trace_path.display()).map_err(out_err)?;
        (out.result.model, out.test)
    } else {
        let out = fit_and_score(&ds, &cfg, a.seed)?;
        warnings.extend(out.report.warnings.iter().cloned());
        writeln!(stdout, "terms: {} ({} aliased)", out.report.terms, out.report.aliased).map_err(out_err)?;
        writeln!(stdout, "train {}: {}", out.test.metric, out.report.train_metric).map_err(out_err)?;
        (out.model, out.test)
    };
    if !model.aliased.is_empty() {
        warnings.add(format!(
            "{} term(s) aliased and given coefficient 0",
            model.aliased.len()
        ));
    }
    let model_path = a.out.join("model.json");
    save_model(&model_path, &model)?;
    write_text(&a.out.join("schema.txt"), &format_schema(&model.schema))?;
    write_text(&a.out.join("terms.txt"), &format_terms(&model.terms))?;
    let results = a.results.clone().unwrap_or_else(|| a.out.join("results.csv"));
    append_results(&results, &[result_row(&setting, &dataset, a.seed, &scored)])?;
    writeln!(stdout, "setting: {setting}").map_err(out_err)?;
    writeln!(
        stdout,
        "test {}: {} ({} rows)",
        scored.metric, scored.value, scored.test_rows
    )
    .map_err(out_err)?;
    writeln!(stdout, "model: {}", model_path.display()).map_err(out_err)?;
    writeln!(stdout, "results: {}", results.display()).map_err(out_err)?;
    Ok(())
}

fn cmd_predict(a: PredictArgs, warnings: &mut Warnings) -> Result<()> {
    let model = load_model(&a.model)?;
    let table = read_table(&a.data)?;
    let (frame, rows) = if table.headers.is_empty() && table.rows.is_empty() {
        let empty = model
            .schema
            .features()
            .map(|c| match c.kind {
                ColumnKind::Numeric => polyreg_core::Column::Numeric(Vec::new()),
                _ => polyreg_core::Column::Categorical(Vec::new()),
            })
            .collect();
        (Frame::new(&model.schema, empty)?, Vec::new())
    } else {
        let loaded = frame_from_table(&table, &model.schema, &a.data)?;
        warnings.extend(loaded.warnings);
        (loaded.frame, loaded.kept_rows)
    };
    let pred = if frame.rows() == 0 {
        warnings.add(format!("{}: no rows to predict", a.data.display()));
        if model.is_classification() {
            Prediction::Class(Vec::new())
        } else {
            Prediction::Numeric(Vec::new())
        }
    } else {
        model.predict(&frame)?
    };
    match &a.out {
        Some(p) => write_predictions(create_file(p)?, &rows, &pred, model.schema.response()),
        None => write_predictions(io::stdout().lock(), &rows, &pred, model.schema.response()),
    }
}

fn cmd_bench(a: BenchArgs, warnings: &mut Warnings) -> Result<()> {
    if a.degrees.is_empty() || a.seeds == 0 {
        return Err(usage("bench needs at least one degree and one seed"));
    }
    if a.fsr {
        check_fsr_flags(&a.model)?;
    }
    let ds = load_data(&a.data, warnings)?;
    let dataset = dataset_label(&a.dataset, &a.data.data);
    let mut stdout = io::stdout().lock();
    let out_err = |e| Error::io("<stdout>", e);
    writeln!(stdout, "setting,seed,metric,value").map_err(out_err)?;
    for &degree in &a.degrees {
        for seed in a.first_seed..a.first_seed + a.seeds {
            let cfg = model_config(&a.model, degree, ds.schema().is_classification(), seed)?;
            let mut rows = Vec::new();
            let out = fit_and_score(&ds, &cfg, seed)?;
            warnings.extend(out.report.warnings);
            rows.push(result_row(&default_setting(&cfg, false), &dataset, seed, &out.test));
            if a.fsr {
                let opts = FsrOptions {
                    spec: cfg.spec,
                    min_models: a.min_models,
                    validation_fraction: 0.2,
                };
                let out = fsr_and_score(&ds, &opts, seed)?;
                warnings.extend(out.result.warnings);
                rows.push(result_row(&default_setting(&cfg, true), &dataset, seed, &out.test));
            }
            for r in &rows {
                writeln!(stdout, "{},{},{},{}", r.setting, r.seed, r.metric, r.value).map_err(out_err)?;
            }
            append_results(&a.results, &rows)?;
        }
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let ds = generate(a.kind, a.n, a.seed)?;
    match &a.out {
        Some(p) => write_dataset(create_file(p)?, &ds),
        None => write_dataset(io::stdout().lock(), &ds),
    }
}

/// Inputs and optional labels from a numeric CSV.
fn numeric_inputs(path: &Path, label: Option<&str>) -> Result<(Matrix, Option<Vec<u32>>)> {
    let table = read_table(path)?;
    let label_idx = match label {
        Some(name) => Some(
            table
                .column_index(name)
                .ok_or_else(|| Error::Data(format!("{}: column `{name}` not found", path.display())))?,
        ),
        None => None,
    };
    let feature_cols: Vec<usize> = (0..table.headers.len()).filter(|&j| Some(j) != label_idx).collect();
    let mut data = Vec::with_capacity(table.rows.len() * feature_cols.len());
    for (r, row) in table.rows.iter().enumerate() {
        for &j in &feature_cols {
            let v: f64 = row[j].parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                Error::parse(
                    path,
                    r + 2,
                    format!("column `{}`: `{}` is not a number", table.headers[j], row[j]),
                )
            })?;
            data.push(v);
        }
    }
    let x = Matrix::new(table.rows.len(), feature_cols.len(), data)?;
    let labels = label_idx.map(|j| {
        let levels: std::collections::BTreeSet<&str> = table.rows.iter().map(|r| r[j].as_str()).collect();
        let levels: Vec<&str> = levels.into_iter().collect();
        table
            .rows
            .iter()
            .map(|r| levels.binary_search(&r[j].as_str()).expect("collected above") as u32)
            .collect()
    });
    Ok((x, labels))
}

fn cmd_vif_probe(a: VifProbeArgs, warnings: &mut Warnings) -> Result<()> {
    let training = a.weights.is_none();
    let (x, labels) = match (&a.data, a.digits) {
        (Some(p), None) => {
            let label = match (&a.response, training) {
                (Some(r), _) => Some(r.clone()),
                (None, true) => {
                    let t = read_table(p)?;
                    Some(
                        t.headers
                            .last()
                            .cloned()
                            .ok_or_else(|| Error::Data(format!("{}: no columns", p.display())))?,
                    )
                }
                (None, false) => None,
            };
            numeric_inputs(p, label.as_deref())?
        }
        (None, Some(n)) => {
            let (d, real) = mnist::training_digits(n, a.seed)?;
            if !real {
                warnings.add(format!(
                    "{} not set to an MNIST directory; using synthetic digits",
                    mnist::MNIST_DIR_VAR
                ));
            }
            (d.images, Some(d.labels))
        }
        _ => return Err(usage("give exactly one of --data or --digits")),
    };
    if x.rows() == 0 {
        return Err(Error::Data("no input rows".into()));
    }
    let reports: Vec<VifReport> = match &a.weights {
        Some(w) => {
            let mlp = load_mlp(w)?;
            let idx: Vec<usize> = (0..a.probe_rows.unwrap_or(x.rows()).min(x.rows())).collect();
            polyreg_core::probe_layers(&mlp, &x.select_rows(&idx), a.threshold)?
        }
        None => {
            let labels = labels.ok_or_else(|| usage("training needs labels"))?;
            let classes = labels.iter().max().map_or(0, |&m| m as usize + 1).max(2);
            let mut widths = vec![x.cols()];
            widths.extend(&a.hidden);
            widths.push(classes);
            let mut cfg = MlpConfig::new(widths, vec![a.activation; a.hidden.len()], OutputKind::Softmax);
            cfg.dropout_rates = a.dropout.clone();
            cfg.epochs = a.epochs;
            cfg.batch_size = a.batch_size;
            cfg.learning_rate = a.learning_rate;
            cfg.seed = a.seed;
            Mlp::new(&cfg).map_err(|e| usage(e.to_string()))?;
            let out = pipeline::train_and_probe(&x, &labels, &cfg, a.probe_rows, a.threshold)?;
            if let Some(p) = &a.save_weights {
                save_mlp(p, &out.mlp)?;
            }
            eprintln!(
                "trained {} epoch(s) on {} rows; final loss {}; probed {} held-out rows, accuracy {}",
                out.epoch_losses.len(),
                out.train_rows,
                out.epoch_losses.last().copied().unwrap_or(f64::NAN),
                out.probe_rows,
                out.probe_pcc
            );
            out.reports
        }
    };
    print!("{}", vif_table(&reports));
    if let Some(p) = &a.csv {
        write_vif_csv(create_file(p)?, &reports)?;
    }
    Ok(())
}

fn cmd_equiv_demo(a: EquivArgs) -> Result<()> {
    if !a.activation.is_polynomial() {
        return Err(usage(format!(
            "--activation {} has no exact polynomial form; use square or identity",
            a.activation.name()
        )));
    }
    if a.inputs == 0 || a.width == 0 || a.outputs == 0 || a.layers == 0 || a.points == 0 {
        return Err(usage(
            "--inputs, --layers, --width, --outputs and --points must be positive",
        ));
    }
    let mut widths = vec![a.inputs];
    widths.extend(std::iter::repeat_n(a.width, a.layers));
    widths.push(a.outputs);
    let mut cfg = MlpConfig::new(widths, vec![a.activation; a.layers], OutputKind::Linear);
    cfg.seed = a.seed;
    let mlp = Mlp::new(&cfg)?;
    let ex = extract_polynomial(&mlp, polyreg_core::equivalence::DEFAULT_COEFFICIENT_BUDGET)?;
    let deviation = equivalence_check(&mlp, &ex, a.points, a.seed)?;
    let degrees = degree_growth_report(&ex);
    let mut out = io::stdout().lock();
    let out_err = |e| Error::io("<stdout>", e);
    let d: Vec<String> = degrees.iter().map(u32::to_string).collect();
    writeln!(out, "layer degrees: {}", d.join(" ")).map_err(out_err)?;
    writeln!(out, "output degree: {}", ex.degree()).map_err(out_err)?;
    let terms: Vec<String> = ex.outputs.iter().map(|p| p.term_count().to_string()).collect();
    writeln!(out, "output terms: {}", terms.join(" ")).map_err(out_err)?;
    writeln!(out, "max relative deviation: {deviation:e}").map_err(out_err)?;
    if a.show {
        for (k, p) in ex.outputs.iter().enumerate() {
            writeln!(out, "y{} = {p}", k + 1).map_err(out_err)?;
        }
    }
    if let Some(p) = &a.poly_out {
        write_text(p, &format_polys(&ex.outputs))?;
    }
    Ok(())
}
