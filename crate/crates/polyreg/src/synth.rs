//! Seeded synthetic datasets with known structure.

use polyreg_core::{Column, ColumnSpec, Dataset, Response, Schema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Generator {
    /// `y = 1 + 2u - 3v + N(0, 0.5^2)`
    Linear,
    /// `y = 1 + u + 2u^2 - 1.5uv + v^2 + N(0, 0.5^2)`
    Quadratic,
    /// `y = 1 + 2u + 3v - uv + v^2 + N(0, 0.1^2)`
    Recovery,
    /// `y = 2u + u^2 + N(0, 0.3^2)` with a distractor `w`
    Support,
    /// Three well separated Gaussian classes in the plane
    Blobs,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Quadratic => "quadratic",
            Self::Recovery => "recovery",
            Self::Support => "support",
            Self::Blobs => "blobs",
        }
    }

    /// Noise standard deviation of the regression generators.
    pub fn noise_sd(self) -> f64 {
        match self {
            Self::Linear | Self::Quadratic => 0.5,
            Self::Recovery => 0.1,
            Self::Support => 0.3,
            Self::Blobs => 0.0,
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn generate(kind: Generator, n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if kind == Generator::Blobs {
        return blobs(&mut rng, n);
    }
    let noise = Normal::new(0.0, kind.noise_sd()).expect("positive sd");
    let u = uniform(&mut rng, n, -2.0, 2.0);
    let v = uniform(&mut rng, n, -2.0, 2.0);
    let w = (kind == Generator::Support).then(|| uniform(&mut rng, n, -2.0, 2.0));
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let (u, v) = (u[i], v[i]);
            let mean = match kind {
                Generator::Linear => 1.0 + 2.0 * u - 3.0 * v,
                Generator::Quadratic => 1.0 + u + 2.0 * u * u - 1.5 * u * v + v * v,
                Generator::Recovery => 1.0 + 2.0 * u + 3.0 * v - u * v + v * v,
                Generator::Support => 2.0 * u + u * u,
                Generator::Blobs => unreachable!(),
            };
            mean + noise.sample(&mut rng)
        })
        .collect();
    let mut specs = vec![ColumnSpec::numeric("u"), ColumnSpec::numeric("v")];
    let mut cols = vec![Column::Numeric(u), Column::Numeric(v)];
    if let Some(w) = w {
        specs.push(ColumnSpec::numeric("w"));
        cols.push(Column::Numeric(w));
    }
    specs.push(ColumnSpec::response_numeric("y"));
    Ok(Dataset::new(Schema::new(specs)?, cols, Response::Numeric(y))?)
}

fn blobs(rng: &mut ChaCha8Rng, n: usize) -> Result<Dataset> {
    const CENTERS: [(f64, f64); 3] = [(-4.0, 0.0), (4.0, 0.0), (0.0, 6.0)];
    let unit = Normal::new(0.0, 1.0).expect("positive sd");
    let (mut u, mut v, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let c = i % 3;
        u.push(CENTERS[c].0 + unit.sample(rng));
        v.push(CENTERS[c].1 + unit.sample(rng));
        y.push(c as u32);
    }
    let schema = Schema::new(vec![
        ColumnSpec::numeric("u"),
        ColumnSpec::numeric("v"),
        ColumnSpec::response_class("class", ["a", "b", "c"]),
    ])?;
    Ok(Dataset::new(
        schema,
        vec![Column::Numeric(u), Column::Numeric(v)],
        Response::Class(y),
    )?)
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).map_err(|_| Error::Usage(format!("unknown generator `{s}`")))
    }
}
