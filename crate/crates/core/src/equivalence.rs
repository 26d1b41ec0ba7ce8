//! Exact polynomial extraction from networks with square or identity
//! activations.
//!
//! Each unit's output is carried as a [`SymbolicPoly`] in the network
//! inputs. An affine layer is a linear combination of the previous layer's
//! polynomials plus a constant; a square activation squares the polynomial.
//! Coefficients with magnitude below `1e-12` are dropped after every
//! operation.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mlp::{Activation, Layer, Mlp, Transfer};
use crate::polyterms::powi;

pub const PRUNE_TOL: f64 = 1e-12;
pub const DEFAULT_COEFFICIENT_BUDGET: usize = 1_000_000;

/// A multivariate polynomial: exponent vector (one entry per variable) to
/// coefficient. The zero polynomial has no entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicPoly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl SymbolicPoly {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: f64) -> Self {
        let mut p = Self::zero(vars);
        p.insert(vec![0; vars], c);
        p
    }

    /// The polynomial `x_i`.
    pub fn variable(vars: usize, i: usize) -> Self {
        assert!(i < vars, "variable {i} out of range for {vars} variables");
        let mut e = vec![0; vars];
        e[i] = 1;
        let mut p = Self::zero(vars);
        p.insert(e, 1.0);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms(vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars {
                return Err(Error::Dimension(alloc::format!(
                    "exponent vector of length {} for {vars} variables",
                    e.len()
                )));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
            *p.terms.entry(e).or_insert(0.0) += c;
        }
        p.prune();
        Ok(p)
    }

    fn insert(&mut self, e: Vec<u32>, c: f64) {
        if libm::fabs(c) >= PRUNE_TOL {
            self.terms.insert(e, c);
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| libm::fabs(*c) >= PRUNE_TOL);
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    /// Constant term.
    pub fn constant_term(&self) -> f64 {
        self.coefficient(&vec![0; self.vars])
    }

    /// Maximum total degree; 0 for constants and the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.vars, "point dimension");
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &v)| powi(v, k)).product::<f64>())
            .sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_vars(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            *out.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_vars(other);
        let mut out = Self::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        out.prune();
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.vars, 1.0);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn check_vars(&self, other: &Self) {
        assert_eq!(self.vars, other.vars, "polynomials over different variable counts");
    }
}

/// Writes `c` or `c*x1^2*x3`, terms in ascending degree.
impl fmt::Display for SymbolicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<(&Vec<u32>, f64)> = self.terms.iter().map(|(e, c)| (e, *c)).collect();
        terms.sort_by_key(|(e, _)| (e.iter().sum::<u32>(), core::cmp::Reverse(*e)));
        for (i, (e, c)) in terms.into_iter().enumerate() {
            if i > 0 {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
                write!(f, "{}", libm::fabs(c))?;
            } else {
                write!(f, "{c}")?;
            }
            for (v, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

/// Polynomials computed by every dense layer of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// `hidden[l][u]`: unit `u` of hidden dense layer `l`, after activation.
    pub hidden: Vec<Vec<SymbolicPoly>>,
    /// One per output unit.
    pub outputs: Vec<SymbolicPoly>,
}

impl Extraction {
    pub fn degree(&self) -> u32 {
        self.outputs.iter().map(SymbolicPoly::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.outputs.iter().map(|p| p.eval(x)).collect()
    }
}

/// Extracts the exact polynomial of every unit. Dropout layers are the
/// identity at inference and are passed through.
pub fn extract_polynomial(mlp: &Mlp, budget: usize) -> Result<Extraction> {
    let p = mlp.input_width();
    let mut current: Vec<SymbolicPoly> = (0..p).map(|i| SymbolicPoly::variable(p, i)).collect();
    let mut hidden = Vec::new();
    let dense_total = mlp.dense_layers().count();
    let mut dense_seen = 0;
    for (index, layer) in mlp.layers().iter().enumerate() {
        let Layer::Dense(d) = layer else { continue };
        let act = match d.transfer {
            Transfer::Pointwise(a) if a.is_polynomial() => a,
            other => {
                return Err(Error::NonPolynomial {
                    layer: index,
                    activation: other.name(),
                })
            }
        };
        let mut next = Vec::with_capacity(d.output_width());
        let mut entries = 0usize;
        for o in 0..d.output_width() {
            let mut unit = SymbolicPoly::constant(p, d.bias[o]);
            for (w, poly) in d.weights.row(o).iter().zip(&current) {
                if *w != 0.0 {
                    unit = unit.add(&poly.scale(*w));
                }
            }
            if act == Activation::Square {
                unit = unit.pow(2);
            }
            entries += unit.term_count();
            if entries > budget {
                return Err(Error::CoefficientBudget { entries, budget });
            }
            next.push(unit);
        }
        current = next;
        dense_seen += 1;
        if dense_seen < dense_total {
            hidden.push(current.clone());
        }
    }
    Ok(Extraction {
        hidden,
        outputs: current,
    })
}

/// Largest relative deviation `|f - g| / max(|f|, |g|, 1)` between the
/// network and the extracted polynomials over `n_points` uniform points in
/// `[-1, 1]^p`.
pub fn equivalence_check(mlp: &Mlp, extracted: &Extraction, n_points: usize, seed: u64) -> Result<f64> {
    let p = mlp.input_width();
    if extracted.outputs.len() != mlp.output_width() || extracted.outputs.iter().any(|q| q.vars() != p) {
        return Err(Error::Dimension("extraction does not match the network".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_fn(n_points, p, |_, _| rng.gen_range(-1.0..=1.0));
    let out = mlp.forward(&x)?;
    let mut worst = 0.0f64;
    for i in 0..n_points {
        for (f, poly) in out.row(i).iter().zip(&extracted.outputs) {
            let g = poly.eval(x.row(i));
            let dev = libm::fabs(f - g) / libm::fabs(*f).max(libm::fabs(g)).max(1.0);
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

/// Maximum total degree after each hidden layer.
pub fn degree_growth_report(extraction: &Extraction) -> Vec<u32> {
    extraction
        .hidden
        .iter()
        .map(|layer| layer.iter().map(SymbolicPoly::degree).max().unwrap_or(0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{Dense, MlpConfig, OutputKind};

    fn u() -> SymbolicPoly {
        SymbolicPoly::variable(2, 0)
    }
    fn v() -> SymbolicPoly {
        SymbolicPoly::variable(2, 1)
    }

    #[test]
    fn binomial_square() {
        let s = u().add(&v()).pow(2);
        assert_eq!(s.term_count(), 3);
        assert_eq!(s.coefficient(&[2, 0]), 1.0);
        assert_eq!(s.coefficient(&[1, 1]), 2.0);
        assert_eq!(s.coefficient(&[0, 2]), 1.0);
        assert_eq!(s.to_string(), "1*x1^2 + 2*x1*x2 + 1*x2^2");
    }

    #[test]
    fn pow_zero_and_zero_product() {
        let p = u().add(&SymbolicPoly::constant(2, 3.0));
        assert_eq!(p.pow(0), SymbolicPoly::constant(2, 1.0));
        assert!(p.mul(&SymbolicPoly::zero(2)).is_zero());
        assert_eq!(SymbolicPoly::zero(2).degree(), 0);
    }

    #[test]
    fn cancellation_prunes() {
        let p = u().add(&u().scale(-1.0));
        assert!(p.is_zero());
    }

    #[test]
    fn single_square_unit() {
        let net = Mlp::from_layers(vec![
            Layer::Dense(Dense {
                weights: Matrix::from_rows(&[[1.0]]).unwrap(),
                bias: vec![0.0],
                transfer: Transfer::Pointwise(Activation::Square),
            }),
            Layer::Dense(Dense {
                weights: Matrix::from_rows(&[[1.0]]).unwrap(),
                bias: vec![0.0],
                transfer: Transfer::Pointwise(Activation::Identity),
            }),
        ])
        .unwrap();
        let ex = extract_polynomial(&net, DEFAULT_COEFFICIENT_BUDGET).unwrap();
        assert_eq!(ex.outputs[0], SymbolicPoly::from_terms(1, [(vec![2], 1.0)]).unwrap());
        assert_eq!(degree_growth_report(&ex), vec![2]);
    }

    #[test]
    fn relu_is_rejected() {
        let cfg = MlpConfig::new(vec![2, 3, 1], vec![Activation::Relu], OutputKind::Linear);
        let net = Mlp::new(&cfg).unwrap();
        assert!(matches!(
            extract_polynomial(&net, DEFAULT_COEFFICIENT_BUDGET),
            Err(Error::NonPolynomial {
                layer: 0,
                activation: "relu"
            })
        ));
    }

    #[test]
    fn budget_is_enforced() {
        let cfg = MlpConfig::new(vec![3, 4, 4, 1], vec![Activation::Square; 2], OutputKind::Linear);
        let net = Mlp::new(&cfg).unwrap();
        assert!(matches!(
            extract_polynomial(&net, 5),
            Err(Error::CoefficientBudget { .. })
        ));
    }

    #[test]
    fn origin_gives_constant_terms() {
        let mut cfg = MlpConfig::new(vec![2, 3, 3, 2], vec![Activation::Square; 2], OutputKind::Linear);
        cfg.seed = 4;
        let mut net = Mlp::new(&cfg).unwrap();
        // nonzero biases so the constant term is not trivially zero
        let mut layers = net.layers().to_vec();
        for l in &mut layers {
            if let Layer::Dense(d) = l {
                d.bias
                    .iter_mut()
                    .enumerate()
                    .for_each(|(i, b)| *b = 0.1 * (i as f64 + 1.0));
            }
        }
        net = Mlp::from_layers(layers).unwrap();
        let ex = extract_polynomial(&net, DEFAULT_COEFFICIENT_BUDGET).unwrap();
        let out = net.forward(&Matrix::zeros(1, 2)).unwrap();
        for (o, p) in out.row(0).iter().zip(&ex.outputs) {
            assert!((o - p.constant_term()).abs() < 1e-12);
        }
    }
}
