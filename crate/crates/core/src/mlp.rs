//! A small dense feedforward network: enough to train the networks whose
//! layer outputs the VIF probe inspects, and to build polynomial-activation
//! networks for exact polynomial extraction.
//!
//! Layers are stored in order, dense and dropout alike, so layer indices
//! match the `dense_1, dropout_1, dense_2, ...` listing. Dropout is inverted
//! (kept units are scaled by `1 / (1 - rate)` during training), which makes
//! it the identity at inference.
//!
//! Weights are uniform on `[-a, a]` with `a = sqrt(6 / fan_in)` for ReLU
//! layers and `a = sqrt(3 / fan_in)` otherwise; biases start at zero.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Square,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Self::Relu => t.max(0.0),
            Self::Tanh => libm::tanh(t),
            Self::Square => t * t,
            Self::Identity => t,
        }
    }

    /// Derivative with respect to the pre-activation `t`.
    #[inline]
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Self::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => {
                let h = libm::tanh(t);
                1.0 - h * h
            }
            Self::Square => 2.0 * t,
            Self::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Relu => "relu",
            Self::Tanh => "tanh",
            Self::Square => "square",
            Self::Identity => "identity",
        }
    }

    pub fn is_polynomial(self) -> bool {
        matches!(self, Self::Square | Self::Identity)
    }
}

impl core::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Self::Relu),
            "tanh" => Ok(Self::Tanh),
            "square" => Ok(Self::Square),
            "identity" | "linear" => Ok(Self::Identity),
            other => Err(Error::InvalidArgument(alloc::format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputKind {
    /// Identity output, squared-error loss.
    Linear,
    /// Softmax output, cross-entropy loss.
    Softmax,
}

/// What a dense layer applies after its affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    Pointwise(Activation),
    Softmax,
}

impl Transfer {
    pub fn name(self) -> &'static str {
        match self {
            Self::Pointwise(a) => a.name(),
            Self::Softmax => "softmax",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `out x in`.
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub transfer: Transfer,
}

impl Dense {
    pub fn input_width(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_width(&self) -> usize {
        self.weights.rows()
    }

    fn affine(&self, a: &Matrix) -> Matrix {
        let (n, out) = (a.rows(), self.output_width());
        let mut z = Matrix::zeros(n, out);
        for i in 0..n {
            let ai = a.row(i);
            let zi = z.row_mut(i);
            for (o, zo) in zi.iter_mut().enumerate() {
                *zo = self.bias[o] + self.weights.row(o).iter().zip(ai).map(|(w, x)| w * x).sum::<f64>();
            }
        }
        z
    }

    fn transfer(&self, z: &Matrix) -> Matrix {
        match self.transfer {
            Transfer::Pointwise(act) => Matrix::from_fn(z.rows(), z.cols(), |i, j| act.apply(z[(i, j)])),
            Transfer::Softmax => {
                let mut out = z.clone();
                for i in 0..out.rows() {
                    softmax_in_place(out.row_mut(i));
                }
                out
            }
        }
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - max);
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Dense(Dense),
    Dropout { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// Input width followed by the output width of every dense layer.
    pub layer_widths: Vec<usize>,
    /// One per hidden dense layer (all dense layers but the last).
    pub activations: Vec<Activation>,
    /// One per hidden dense layer; a dropout layer follows hidden layer `i`
    /// when `dropout_rates[i] > 0`. Empty means no dropout.
    pub dropout_rates: Vec<f64>,
    pub output_kind: OutputKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl MlpConfig {
    pub fn new(layer_widths: Vec<usize>, activations: Vec<Activation>, output_kind: OutputKind) -> Self {
        Self {
            layer_widths,
            activations,
            dropout_rates: Vec::new(),
            output_kind,
            epochs: 10,
            batch_size: 32,
            learning_rate: 0.01,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let w = &self.layer_widths;
        if w.len() < 2 || w.contains(&0) {
            return Err(Error::InvalidArgument(
                "need an input width and at least one layer, all widths >= 1".into(),
            ));
        }
        let hidden = w.len() - 2;
        if self.activations.len() != hidden {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} activations for {} hidden layers",
                self.activations.len(),
                hidden
            )));
        }
        if !self.dropout_rates.is_empty() && self.dropout_rates.len() != hidden {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} dropout rates for {} hidden layers",
                self.dropout_rates.len(),
                hidden
            )));
        }
        if self.dropout_rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(Error::InvalidArgument("dropout rates must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    output_kind: OutputKind,
}

/// Gradients of one dense layer.
#[derive(Debug, Clone)]
pub struct DenseGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Mlp {
    /// Fresh network with seeded random weights.
    pub fn new(config: &MlpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        Ok(Self::init(config, &mut rng))
    }

    fn init(config: &MlpConfig, rng: &mut ChaCha8Rng) -> Self {
        let w = &config.layer_widths;
        let dense_count = w.len() - 1;
        let mut layers = Vec::new();
        for d in 0..dense_count {
            let (fan_in, fan_out) = (w[d], w[d + 1]);
            let transfer = if d + 1 < dense_count {
                Transfer::Pointwise(config.activations[d])
            } else {
                match config.output_kind {
                    OutputKind::Linear => Transfer::Pointwise(Activation::Identity),
                    OutputKind::Softmax => Transfer::Softmax,
                }
            };
            let gain = if transfer == Transfer::Pointwise(Activation::Relu) {
                6.0
            } else {
                3.0
            };
            let a = libm::sqrt(gain / fan_in as f64);
            let weights = Matrix::from_fn(fan_out, fan_in, |_, _| rng.gen_range(-a..=a));
            layers.push(Layer::Dense(Dense {
                weights,
                bias: vec![0.0; fan_out],
                transfer,
            }));
            if d + 1 < dense_count {
                if let Some(&rate) = config.dropout_rates.get(d) {
                    if rate > 0.0 {
                        layers.push(Layer::Dropout { rate });
                    }
                }
            }
        }
        Self {
            layers,
            output_kind: config.output_kind,
        }
    }

    /// Assembles a network from explicit layers. The last layer must be
    /// dense; its transfer determines the output kind.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let mut width: Option<usize> = None;
        for (i, l) in layers.iter().enumerate() {
            match l {
                Layer::Dense(d) => {
                    if d.bias.len() != d.output_width() {
                        return Err(Error::Dimension(alloc::format!(
                            "layer {i}: {} biases for {} units",
                            d.bias.len(),
                            d.output_width()
                        )));
                    }
                    if let Some(w) = width {
                        if w != d.input_width() {
                            return Err(Error::Dimension(alloc::format!(
                                "layer {i} expects {} inputs, previous layer gives {w}",
                                d.input_width()
                            )));
                        }
                    }
                    if d.output_width() == 0 || d.input_width() == 0 {
                        return Err(Error::Dimension(alloc::format!("layer {i} is empty")));
                    }
                    width = Some(d.output_width());
                }
                Layer::Dropout { rate } => {
                    if width.is_none() {
                        return Err(Error::InvalidArgument("network cannot start with dropout".into()));
                    }
                    if !(0.0..1.0).contains(rate) {
                        return Err(Error::InvalidArgument("dropout rates must lie in [0, 1)".into()));
                    }
                }
            }
        }
        let output_kind = match layers.last() {
            Some(Layer::Dense(d)) => match d.transfer {
                Transfer::Softmax => OutputKind::Softmax,
                Transfer::Pointwise(_) => OutputKind::Linear,
            },
            _ => return Err(Error::InvalidArgument("the last layer must be dense".into())),
        };
        if let Some(i) = layers[..layers.len() - 1]
            .iter()
            .position(|l| matches!(l, Layer::Dense(d) if d.transfer == Transfer::Softmax))
        {
            return Err(Error::InvalidArgument(alloc::format!(
                "softmax is only allowed on the last layer (found on layer {i})"
            )));
        }
        Ok(Self { layers, output_kind })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output_kind(&self) -> OutputKind {
        self.output_kind
    }

    pub fn input_width(&self) -> usize {
        self.dense_layers().next().map_or(0, Dense::input_width)
    }

    pub fn output_width(&self) -> usize {
        self.dense_layers().last().map_or(0, Dense::output_width)
    }

    pub fn dense_layers(&self) -> impl Iterator<Item = &Dense> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::Dropout { .. } => None,
        })
    }

    /// Output width of every layer, dropout included.
    pub fn layer_widths(&self) -> Vec<usize> {
        let mut w = 0;
        self.layers
            .iter()
            .map(|l| {
                if let Layer::Dense(d) = l {
                    w = d.output_width();
                }
                w
            })
            .collect()
    }

    /// `dense_1, dropout_1, dense_2, ...`
    pub fn layer_labels(&self) -> Vec<String> {
        let (mut dense, mut drop) = (0, 0);
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Dense(_) => {
                    dense += 1;
                    alloc::format!("dense_{dense}")
                }
                Layer::Dropout { .. } => {
                    drop += 1;
                    alloc::format!("dropout_{drop}")
                }
            })
            .collect()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.input_width() {
            return Err(Error::Dimension(alloc::format!(
                "network takes {} inputs, got {}",
                self.input_width(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// Inference-mode forward pass.
    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        self.layer_activations(x, self.layers.len() - 1)
    }

    /// Inference-mode output of layer `index` (post-activation), one row per
    /// input row.
    pub fn layer_activations(&self, x: &Matrix, index: usize) -> Result<Matrix> {
        if index >= self.layers.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "layer index {index} out of range (network has {} layers)",
                self.layers.len()
            )));
        }
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers[..=index] {
            if let Layer::Dense(d) = layer {
                a = d.transfer(&d.affine(&a));
            }
        }
        Ok(a)
    }

    /// Mean loss over the rows: half the squared error summed over outputs
    /// for linear output, cross-entropy for softmax output.
    pub fn loss(&self, x: &Matrix, targets: &Matrix) -> Result<f64> {
        let out = self.forward(x)?;
        check_targets(&out, targets)?;
        Ok(loss_of(self.output_kind, &out, targets))
    }

    /// Loss and gradients of every dense layer, without dropout.
    pub fn loss_and_gradients(&self, x: &Matrix, targets: &Matrix) -> Result<(f64, Vec<DenseGrad>)> {
        self.check_input(x)?;
        let (loss, grads) = self.backprop(x, targets, None)?;
        Ok((loss, grads))
    }

    fn backprop(
        &self,
        x: &Matrix,
        targets: &Matrix,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, Vec<DenseGrad>)> {
        // Forward, keeping what the backward pass needs.
        enum Saved {
            Dense { input: Matrix, pre: Matrix },
            Dropout { mask: Vec<f64> },
        }
        let mut saved = Vec::with_capacity(self.layers.len());
        let mut a = x.clone();
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => {
                    let z = d.affine(&a);
                    let out = d.transfer(&z);
                    saved.push(Saved::Dense { input: a, pre: z });
                    a = out;
                }
                Layer::Dropout { rate } => match rng.as_deref_mut() {
                    Some(r) if *rate > 0.0 => {
                        let keep = 1.0 - rate;
                        let mask: Vec<f64> = (0..a.rows() * a.cols())
                            .map(|_| if r.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                            .collect();
                        let dropped = Matrix::new(
                            a.rows(),
                            a.cols(),
                            a.as_slice().iter().zip(&mask).map(|(v, m)| v * m).collect(),
                        )?;
                        saved.push(Saved::Dropout { mask });
                        a = dropped;
                    }
                    _ => saved.push(Saved::Dropout { mask: Vec::new() }),
                },
            }
        }
        check_targets(&a, targets)?;
        let n = x.rows() as f64;
        let loss = loss_of(self.output_kind, &a, targets);

        // Both losses give (output - target) / n at the pre-activation of a
        // softmax or identity output layer.
        let mut delta = Matrix::from_fn(a.rows(), a.cols(), |i, j| (a[(i, j)] - targets[(i, j)]) / n);
        let mut grads: Vec<DenseGrad> = Vec::new();
        let first_dense = self.layers.iter().position(|l| matches!(l, Layer::Dense(_)));
        let mut at_output = true;
        for (idx, (layer, s)) in self.layers.iter().zip(saved).enumerate().rev() {
            match (layer, s) {
                (Layer::Dense(d), Saved::Dense { input, pre }) => {
                    if !at_output {
                        if let Transfer::Pointwise(act) = d.transfer {
                            for i in 0..delta.rows() {
                                for (dv, zv) in delta.row_mut(i).iter_mut().zip(pre.row(i)) {
                                    *dv *= act.derivative(*zv);
                                }
                            }
                        }
                    } else if let Transfer::Pointwise(act) = d.transfer {
                        if act != Activation::Identity {
                            for i in 0..delta.rows() {
                                for (dv, zv) in delta.row_mut(i).iter_mut().zip(pre.row(i)) {
                                    *dv *= act.derivative(*zv);
                                }
                            }
                        }
                    }
                    at_output = false;
                    let (out_w, in_w) = d.weights.shape();
                    let mut gw = Matrix::zeros(out_w, in_w);
                    let mut gb = vec![0.0; out_w];
                    for i in 0..delta.rows() {
                        let di = delta.row(i);
                        let ai = input.row(i);
                        for (o, &dv) in di.iter().enumerate() {
                            if dv == 0.0 {
                                continue;
                            }
                            gb[o] += dv;
                            for (g, x) in gw.row_mut(o).iter_mut().zip(ai) {
                                *g += dv * x;
                            }
                        }
                    }
                    if Some(idx) != first_dense {
                        let mut prev = Matrix::zeros(delta.rows(), in_w);
                        for i in 0..delta.rows() {
                            let pi = prev.row_mut(i);
                            for (o, &dv) in delta.row(i).iter().enumerate() {
                                if dv == 0.0 {
                                    continue;
                                }
                                for (p, w) in pi.iter_mut().zip(d.weights.row(o)) {
                                    *p += dv * w;
                                }
                            }
                        }
                        delta = prev;
                    }
                    grads.push(DenseGrad { weights: gw, bias: gb });
                }
                (Layer::Dropout { .. }, Saved::Dropout { mask }) => {
                    if !mask.is_empty() {
                        delta = Matrix::new(
                            delta.rows(),
                            delta.cols(),
                            delta.as_slice().iter().zip(&mask).map(|(d, m)| d * m).collect(),
                        )?;
                    }
                }
                _ => unreachable!("saved state follows layer order"),
            }
        }
        grads.reverse();
        Ok((loss, grads))
    }

    /// Minibatch SGD with a fixed learning rate. Returns the mean training
    /// loss of every epoch.
    pub fn fit(&mut self, x: &Matrix, targets: &Matrix, config: &MlpConfig) -> Result<Vec<f64>> {
        config.validate()?;
        self.check_input(x)?;
        if targets.rows() != x.rows() || targets.cols() != self.output_width() {
            return Err(Error::Dimension(alloc::format!(
                "targets are {}x{}, expected {}x{}",
                targets.rows(),
                targets.cols(),
                x.rows(),
                self.output_width()
            )));
        }
        if !x.is_finite() || !targets.is_finite() {
            return Err(Error::NonFinite("training data"));
        }
        // Separate stream from initialization so reseeding training alone
        // is possible.
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
        let n = x.rows();
        let mut order: Vec<usize> = (0..n).collect();
        let mut losses = Vec::with_capacity(config.epochs);
        for epoch in 0..config.epochs {
            shuffle(&mut order, &mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(config.batch_size) {
                let xb = x.select_rows(chunk);
                let tb = targets.select_rows(chunk);
                let (loss, grads) = self.backprop(&xb, &tb, Some(&mut rng))?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch });
                }
                total += loss * chunk.len() as f64;
                self.sgd_step(&grads, config.learning_rate);
            }
            let mean = total / n.max(1) as f64;
            if !mean.is_finite() || self.dense_layers().any(|d| !d.weights.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
            losses.push(mean);
        }
        Ok(losses)
    }

    fn sgd_step(&mut self, grads: &[DenseGrad], lr: f64) {
        let dense = self.layers.iter_mut().filter_map(|l| match l {
            Layer::Dense(d) => Some(d),
            Layer::Dropout { .. } => None,
        });
        for (d, g) in dense.zip(grads) {
            let w = d.weights.clone();
            d.weights = Matrix::new(
                w.rows(),
                w.cols(),
                w.as_slice()
                    .iter()
                    .zip(g.weights.as_slice())
                    .map(|(w, g)| w - lr * g)
                    .collect(),
            )
            .expect("same shape");
            for (b, gb) in d.bias.iter_mut().zip(&g.bias) {
                *b -= lr * gb;
            }
        }
    }
}

// Fisher-Yates with the crate's seeded generator.
fn shuffle(v: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

fn check_targets(out: &Matrix, targets: &Matrix) -> Result<()> {
    if out.shape() != targets.shape() {
        return Err(Error::Dimension(alloc::format!(
            "targets are {}x{}, network produces {}x{}",
            targets.rows(),
            targets.cols(),
            out.rows(),
            out.cols()
        )));
    }
    Ok(())
}

fn loss_of(kind: OutputKind, out: &Matrix, targets: &Matrix) -> f64 {
    let n = out.rows().max(1) as f64;
    let s: f64 = match kind {
        OutputKind::Linear => out
            .as_slice()
            .iter()
            .zip(targets.as_slice())
            .map(|(o, t)| 0.5 * (o - t) * (o - t))
            .sum(),
        OutputKind::Softmax => out
            .as_slice()
            .iter()
            .zip(targets.as_slice())
            .filter(|(_, &t)| t != 0.0)
            .map(|(o, t)| -t * libm::log(o.max(1e-300)))
            .sum(),
    };
    s / n
}

/// Trains a freshly initialized network.
pub fn train_mlp(x: &Matrix, targets: &Matrix, config: &MlpConfig) -> Result<Mlp> {
    let mut mlp = Mlp::new(config)?;
    mlp.fit(x, targets, config)?;
    Ok(mlp)
}

/// One-hot rows for class ids `0..classes`.
pub fn one_hot(labels: &[u32], classes: usize) -> Matrix {
    Matrix::from_fn(
        labels.len(),
        classes,
        |i, j| if labels[i] as usize == j { 1.0 } else { 0.0 },
    )
}
