use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::Standardization;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, Matrix};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogisticOptions {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the mean log-likelihood
    /// gradient.
    pub tol: f64,
    /// Largest Euclidean norm allowed for the standardized slope vector;
    /// reaching it signals (quasi-)separation.
    pub norm_cap: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
            norm_cap: 1e3,
        }
    }
}

/// One binary logistic model per class, coefficients on the raw scale.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub intercepts: Vec<f64>,
    /// `coefficients[c]` has one entry per design column.
    pub coefficients: Vec<Vec<f64>>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub standardization: Standardization,
    pub warnings: Vec<String>,
}

impl LogisticFit {
    pub fn classes(&self) -> usize {
        self.intercepts.len()
    }

    /// Linear scores, one column per class.
    pub fn scores(&self, x: &Matrix) -> Matrix {
        Matrix::from_fn(x.rows(), self.classes(), |i, c| {
            self.intercepts[c]
                + x.row(i)
                    .iter()
                    .zip(&self.coefficients[c])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
    }

    pub fn predict(&self, x: &Matrix) -> Vec<u32> {
        let s = self.scores(x);
        (0..s.rows()).map(|i| argmax(s.row(i))).collect()
    }
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(row: &[f64]) -> u32 {
    let mut best = 0;
    for (j, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = j;
        }
    }
    best as u32
}

/// One-vs-all logistic regression by Newton/IRLS with step halving. Each
/// class is an independent binary fit on the same standardized design, so
/// the classes may run in parallel without changing the result.
pub fn fit_logistic_ova(x: &Matrix, labels: &[u32], classes: usize, opts: LogisticOptions) -> Result<LogisticFit> {
    let n = x.rows();
    if labels.len() != n {
        return Err(Error::Dimension(alloc::format!(
            "{} labels for {} rows",
            labels.len(),
            n
        )));
    }
    if classes < 2 {
        return Err(Error::InvalidArgument("need at least two classes".into()));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("design matrix"));
    }
    let mut counts = vec![0usize; classes];
    for &l in labels {
        let l = l as usize;
        if l >= classes {
            return Err(Error::InvalidArgument(alloc::format!("label {l} outside 0..{classes}")));
        }
        counts[l] += 1;
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "class {c} has no training cases"
        )));
    }

    let standardization = Standardization::from_matrix(x);
    let z = standardization.apply(x);
    let fits = par::map_range(classes, |c| {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l as usize == c { 1.0 } else { 0.0 })
            .collect();
        binary_irls(&z, &y, opts)
    });

    let mut out = LogisticFit {
        intercepts: Vec::with_capacity(classes),
        coefficients: Vec::with_capacity(classes),
        iterations: Vec::with_capacity(classes),
        converged: Vec::with_capacity(classes),
        standardization,
        warnings: Vec::new(),
    };
    for (c, fit) in fits.into_iter().enumerate() {
        let fit = fit?;
        if fit.capped {
            out.warnings.push(alloc::format!(
                "class {c}: coefficient norm reached the cap {}; the class is (nearly) separable",
                opts.norm_cap
            ));
        } else if !fit.converged {
            out.warnings.push(alloc::format!(
                "class {c}: no convergence after {} iterations",
                fit.iterations
            ));
        }
        let (b0, b) = out.standardization.unscale(fit.beta[0], &fit.beta[1..]);
        out.intercepts.push(b0);
        out.coefficients.push(b);
        out.iterations.push(fit.iterations);
        out.converged.push(fit.converged);
    }
    Ok(out)
}

struct BinaryFit {
    beta: Vec<f64>,
    iterations: usize,
    converged: bool,
    capped: bool,
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

// log(1 + e^t) without overflow
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

fn linear(z: &Matrix, beta: &[f64]) -> Vec<f64> {
    (0..z.rows())
        .map(|i| beta[0] + z.row(i).iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

fn log_lik(eta: &[f64], y: &[f64]) -> f64 {
    eta.iter().zip(y).map(|(e, y)| y * e - softplus(*e)).sum()
}

fn slope_norm(beta: &[f64]) -> f64 {
    libm::sqrt(beta[1..].iter().map(|b| b * b).sum())
}

fn binary_irls(z: &Matrix, y: &[f64], opts: LogisticOptions) -> Result<BinaryFit> {
    let (n, k) = z.shape();
    let dim = k + 1;
    let nf = n as f64;
    let mut beta = vec![0.0; dim];
    let ybar = y.iter().sum::<f64>() / nf;
    beta[0] = libm::log(ybar / (1.0 - ybar));
    let mut eta = linear(z, &beta);
    let mut ll = log_lik(&eta, y);
    let mut converged = false;
    let mut capped = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        let mut grad = vec![0.0; dim];
        let mut hess = Matrix::zeros(dim, dim);
        for i in 0..n {
            let p = sigmoid(eta[i]);
            let r = y[i] - p;
            let w = p * (1.0 - p);
            let row = z.row(i);
            grad[0] += r;
            for (g, v) in grad[1..].iter_mut().zip(row) {
                *g += r * v;
            }
            if w > 0.0 {
                hess[(0, 0)] += w;
                for a in 0..k {
                    let wa = w * row[a];
                    hess[(0, a + 1)] += wa;
                    for b in a..k {
                        hess[(a + 1, b + 1)] += wa * row[b];
                    }
                }
            }
        }
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(libm::fabs(*g))) / nf;
        if gmax <= opts.tol {
            converged = true;
            break;
        }
        for a in 0..dim {
            for b in 0..a {
                hess[(a, b)] = hess[(b, a)];
            }
        }
        let step = newton_step(&hess, &grad, nf)?;

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + t * s).collect();
            let cand_eta = linear(z, &cand);
            let cand_ll = log_lik(&cand_eta, y);
            if cand_ll.is_finite() && cand_ll >= ll - 1e-12 * libm::fabs(ll) {
                beta = cand;
                eta = cand_eta;
                ll = cand_ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
        let norm = slope_norm(&beta);
        if norm > opts.norm_cap {
            let s = opts.norm_cap / norm;
            for b in &mut beta[1..] {
                *b *= s;
            }
            capped = true;
            break;
        }
    }
    Ok(BinaryFit {
        beta,
        iterations,
        converged,
        capped,
    })
}

// Solves H d = g with a small ridge on the diagonal, increased until the
// factorization succeeds.
fn newton_step(hess: &Matrix, grad: &[f64], n: f64) -> Result<Vec<f64>> {
    let dim = grad.len();
    let mut jitter = 1e-10 * n;
    for _ in 0..12 {
        let mut h = hess.clone();
        for a in 0..dim {
            h[(a, a)] += jitter;
        }
        if let Ok(l) = cholesky(&h) {
            return Ok(cholesky_solve(&l, grad));
        }
        jitter *= 100.0;
    }
    Err(Error::NotPositiveDefinite)
}
