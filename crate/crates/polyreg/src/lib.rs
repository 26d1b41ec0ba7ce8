//! File formats, data loading and the command line for `polyreg-core`.
//!
//! CSV tables are typed against a [`polyreg_core::Schema`] (given as a
//! sidecar or inferred), models are stored as versioned JSON, networks and
//! extracted polynomials as small line-oriented text files. The
//! [`cli`] module drives the `polyreg` binary.

pub mod cli;
pub mod config;
pub mod container;
pub mod csvio;
pub mod error;
pub mod mnist;
pub mod pipeline;
pub mod report;
pub mod synth;
pub mod textfmt;

pub use error::{Error, Result};
