//! Polynomial regression and the tools around it.
//!
//! The crate covers dummy-aware polynomial feature expansion, least-squares,
//! ridge and one-vs-all logistic fitting, PCA preprocessing, forward stepwise
//! selection, a small dense feedforward network, variance inflation factor
//! diagnostics, and exact polynomial extraction from networks whose
//! activations are polynomials.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is on. File
//! formats, CSV ingestion and the command-line front end live in the
//! `polyreg` companion crate.
//!
//! Matrices are dense and row-major ([`Matrix`]); all arithmetic is `f64`.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod dataset;
pub mod diagnostics;
pub mod equivalence;
mod error;
pub mod fit;
pub mod linalg;
pub mod mlp;
mod par;
pub mod polyterms;
pub mod stepwise;

pub use dataset::{
    encode_design, encode_frame, split, Column, ColumnKind, ColumnSpec, Dataset, DummyGroup, DummyGroups,
    EncodedDesign, Frame, Response, Schema,
};
pub use diagnostics::{probe_layers, vif, vif_summary, VifReport, VifSummary, DEFAULT_THRESHOLD, VIF_CAP};
pub use equivalence::{degree_growth_report, equivalence_check, extract_polynomial, Extraction, SymbolicPoly};
pub use error::{Error, Result};
pub use fit::{
    corr, fit_logistic_ova, fit_ols, fit_ridge, mape, pca_fit, pcc, r_squared, FitMethod, FitReport, LogisticFit,
    LogisticOptions, ModelConfig, OlsFit, PcaBasis, PolyModel, Prediction, RidgeFit, Standardization,
};
pub use linalg::Matrix;
pub use mlp::{one_hot, train_mlp, Activation, Dense, Layer, Mlp, MlpConfig, OutputKind, Transfer};
pub use polyterms::{
    count_terms_bound, drop_random_columns, enumerate_terms, expand, expand_with_budget, Monomial, PolySpec, TermBound,
    TermSet, DEFAULT_CELL_BUDGET,
};
pub use stepwise::{fsr, FsrConfig, FsrResult, Objective, TraceStep};
