//! Minimal sequence-model engine in 64-bit floats: LSTM, GRU and Conv1D layers
//! with full backpropagation through time, a dense regression head, Adam, and
//! RMSE/MAE metrics.

mod io;
mod layers;
mod tensor;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use io::{load_model, save_model, MODEL_MAGIC};
pub use layers::{Conv1d, Dense, Gru, Lstm};
pub use tensor::Tensor;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

/// Convolution width used by the Conv1D front end of the stacked model.
pub const CONV_KERNEL: usize = 3;

/// Forward pass of a single LSTM layer on batch-major `[batch, steps, features]`
/// input, returning every hidden state as `[batch, steps, units]`.
pub fn lstm_forward(x: &Tensor, layer: &Lstm) -> Result<Tensor> {
    let mut l = layer.clone();
    l.return_sequences = true;
    Ok(l.forward(&x.transpose01())?.transpose01())
}

pub fn gru_forward(x: &Tensor, layer: &Gru) -> Result<Tensor> {
    let mut l = layer.clone();
    l.return_sequences = true;
    Ok(l.forward(&x.transpose01())?.transpose01())
}

/// `[batch, steps, features]` in, `[batch, steps − kernel + 1, filters]` out.
pub fn conv1d_forward(x: &Tensor, layer: &Conv1d) -> Result<Tensor> {
    let mut l = layer.clone();
    Ok(l.forward(&x.transpose01())?.transpose01())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Lstm { units: usize },
    Gru { units: usize },
    Conv1d { filters: usize, kernel: usize },
    Dense { units: usize },
}

/// Stacked architectures available to experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Lstm,
    LstmLstm,
    LstmGru,
    Gru,
    GruGru,
    Conv1dLstm,
}

impl Architecture {
    pub const ALL: [Architecture; 6] = [
        Architecture::Lstm,
        Architecture::LstmLstm,
        Architecture::LstmGru,
        Architecture::Gru,
        Architecture::GruGru,
        Architecture::Conv1dLstm,
    ];

    pub fn layers(self, units: usize) -> Vec<LayerSpec> {
        use LayerSpec as L;
        let mut v = match self {
            Architecture::Lstm => vec![L::Lstm { units }],
            Architecture::LstmLstm => vec![L::Lstm { units }, L::Lstm { units }],
            Architecture::LstmGru => vec![L::Lstm { units }, L::Gru { units }],
            Architecture::Gru => vec![L::Gru { units }],
            Architecture::GruGru => vec![L::Gru { units }, L::Gru { units }],
            Architecture::Conv1dLstm => vec![
                L::Conv1d {
                    filters: units,
                    kernel: CONV_KERNEL,
                },
                L::Lstm { units },
            ],
        };
        v.push(L::Dense { units: 1 });
        v
    }

    pub fn label(self) -> &'static str {
        match self {
            Architecture::Lstm => "LSTM",
            Architecture::LstmLstm => "LSTM -> LSTM",
            Architecture::LstmGru => "LSTM -> GRU",
            Architecture::Gru => "GRU",
            Architecture::GruGru => "GRU -> GRU",
            Architecture::Conv1dLstm => "Conv1D -> LSTM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_features: usize,
    pub layers: Vec<LayerSpec>,
}

impl ModelSpec {
    pub fn new(input_features: usize, layers: Vec<LayerSpec>) -> Result<Self> {
        let s = ModelSpec { input_features, layers };
        s.validate()?;
        Ok(s)
    }

    pub fn for_architecture(input_features: usize, arch: Architecture, units: usize) -> Result<Self> {
        Self::new(input_features, arch.layers(units))
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_features == 0 {
            return Err(Error::Config("model needs at least one input feature".into()));
        }
        let Some((last, body)) = self.layers.split_last() else {
            return Err(Error::Config("model has no layers".into()));
        };
        if *last != (LayerSpec::Dense { units: 1 }) {
            return Err(Error::Config("last layer must be Dense(1)".into()));
        }
        let Some(last_seq) = body.last() else {
            return Err(Error::Config("model needs a sequence layer before the dense head".into()));
        };
        if matches!(last_seq, LayerSpec::Conv1d { .. }) {
            return Err(Error::Config("Conv1D must be followed by a recurrent layer".into()));
        }
        for l in body {
            match *l {
                LayerSpec::Dense { .. } => return Err(Error::Config("Dense is only allowed as the output layer".into())),
                LayerSpec::Lstm { units } | LayerSpec::Gru { units } if units == 0 => {
                    return Err(Error::Config("recurrent layers need at least one unit".into()))
                }
                LayerSpec::Conv1d { filters, kernel } if filters == 0 || kernel == 0 => {
                    return Err(Error::Config("Conv1D needs filters ≥ 1 and kernel ≥ 1".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Sequence shrinkage from convolutions, i.e. the minimum usable steps minus one.
    pub fn min_steps(&self) -> usize {
        1 + self
            .layers
            .iter()
            .map(|l| match l {
                LayerSpec::Conv1d { kernel, .. } => kernel - 1,
                _ => 0,
            })
            .sum::<usize>()
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Lstm(Lstm),
    Gru(Gru),
    Conv1d(Conv1d),
    Dense(Dense),
}

impl Layer {
    fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Lstm(l) => l.forward(x),
            Layer::Gru(l) => l.forward(x),
            Layer::Conv1d(l) => l.forward(x),
            Layer::Dense(l) => l.forward(x),
        }
    }

    fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Lstm(l) => l.backward(dy),
            Layer::Gru(l) => l.backward(dy),
            Layer::Conv1d(l) => l.backward(dy),
            Layer::Dense(l) => l.backward(dy),
        }
    }

    /// Parameter tensors and their gradient buffers, in serialization order.
    fn slots(&mut self) -> Vec<(&mut Vec<f64>, &mut Vec<f64>)> {
        match self {
            Layer::Lstm(l) => vec![(&mut l.w, &mut l.gw), (&mut l.u, &mut l.gu), (&mut l.b, &mut l.gb)],
            Layer::Gru(l) => vec![
                (&mut l.w, &mut l.gw),
                (&mut l.u_zr, &mut l.gu_zr),
                (&mut l.u_n, &mut l.gu_n),
                (&mut l.b, &mut l.gb),
            ],
            Layer::Conv1d(l) => vec![(&mut l.w, &mut l.gw), (&mut l.b, &mut l.gb)],
            Layer::Dense(l) => vec![(&mut l.w, &mut l.gw), (&mut l.b, &mut l.gb)],
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Layer::Lstm(l) => l.n_params(),
            Layer::Gru(l) => l.n_params(),
            Layer::Conv1d(l) => l.n_params(),
            Layer::Dense(l) => l.n_params(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    layers: Vec<Layer>,
}

impl Model {
    pub fn new(spec: &ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(spec.layers.len());
        let mut width = spec.input_features;
        let n = spec.layers.len();
        for (i, l) in spec.layers.iter().enumerate() {
            // All but the last sequence layer hand full sequences downstream.
            let sequences = i + 2 < n;
            let layer = match *l {
                LayerSpec::Lstm { units } => {
                    let l = Lstm::new(width, units, sequences, &mut rng);
                    width = units;
                    Layer::Lstm(l)
                }
                LayerSpec::Gru { units } => {
                    let l = Gru::new(width, units, sequences, &mut rng);
                    width = units;
                    Layer::Gru(l)
                }
                LayerSpec::Conv1d { filters, kernel } => {
                    let l = Conv1d::new(width, filters, kernel, &mut rng);
                    width = filters;
                    Layer::Conv1d(l)
                }
                LayerSpec::Dense { units } => {
                    let l = Dense::new(width, units, &mut rng);
                    width = units;
                    Layer::Dense(l)
                }
            };
            layers.push(layer);
        }
        Ok(Model {
            spec: spec.clone(),
            layers,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    /// All parameters, flattened in serialization order.
    pub fn params(&mut self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &mut self.layers {
            for (p, _) in l.slots() {
                out.extend_from_slice(p);
            }
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::Shape {
                op: "set_params",
                expected: vec![self.n_params()],
                actual: vec![flat.len()],
            });
        }
        let mut k = 0;
        for l in &mut self.layers {
            for (p, _) in l.slots() {
                let n = p.len();
                p.copy_from_slice(&flat[k..k + n]);
                k += n;
            }
        }
        Ok(())
    }

    /// Gradients accumulated since the last `zero_grad`, flattened like `params`.
    pub fn grads(&mut self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &mut self.layers {
            for (_, g) in l.slots() {
                out.extend_from_slice(g);
            }
        }
        out
    }

    pub fn zero_grad(&mut self) {
        for l in &mut self.layers {
            for (_, g) in l.slots() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    /// Predictions for batch-major `[batch, steps, features]` input.
    pub fn forward(&mut self, x: &Tensor) -> Result<Vec<f64>> {
        let s = x.shape();
        if s.len() != 3 || s[2] != self.spec.input_features {
            return Err(Error::Shape {
                op: "model_forward",
                expected: vec![s.first().copied().unwrap_or(0), s.get(1).copied().unwrap_or(0), self.spec.input_features],
                actual: s.to_vec(),
            });
        }
        self.forward_time_major(&x.transpose01())
    }

    fn forward_time_major(&mut self, x: &Tensor) -> Result<Vec<f64>> {
        let mut h = x.clone();
        for l in &mut self.layers {
            h = l.forward(&h)?;
            debug_assert!(h.all_finite(), "non-finite activation");
        }
        Ok(h.into_data())
    }

    /// Backpropagates `d loss / d prediction` through the cached forward pass.
    pub fn backward(&mut self, dpred: &[f64]) -> Result<()> {
        let mut g = Tensor::new(&[1, dpred.len(), 1], dpred.to_vec())?;
        for l in self.layers.iter_mut().rev() {
            g = l.backward(&g)?;
            debug_assert!(g.all_finite(), "non-finite gradient");
        }
        Ok(())
    }

    /// Mean squared error on one batch; gradients are accumulated into the layers.
    pub fn loss_and_backward(&mut self, x: &Tensor, y: &[f64]) -> Result<f64> {
        let pred = self.forward(x)?;
        let (loss, d) = mse_grad(&pred, y)?;
        self.backward(&d)?;
        Ok(loss)
    }

    pub fn loss(&mut self, x: &Tensor, y: &[f64]) -> Result<f64> {
        let pred = self.forward(x)?;
        Ok(mse_grad(&pred, y)?.0)
    }
}

fn mse_grad(pred: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != y.len() {
        return Err(Error::Shape {
            op: "mse",
            expected: vec![pred.len()],
            actual: vec![y.len()],
        });
    }
    let n = y.len() as f64;
    let loss = pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n;
    let d = pred.iter().zip(y).map(|(p, t)| 2.0 * (p - t) / n).collect();
    Ok((loss, d))
}

/// A set of fixed-length sequences with scalar targets.
pub trait Samples: Sync {
    fn len(&self) -> usize;
    fn seq_len(&self) -> usize;
    fn n_features(&self) -> usize;
    /// `seq_len × n_features`, row-major.
    fn input(&self, i: usize) -> &[f64];
    fn target(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples held as one contiguous buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct InMemorySamples {
    pub seq_len: usize,
    pub n_features: usize,
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Samples for InMemorySamples {
    fn len(&self) -> usize {
        self.targets.len()
    }
    fn seq_len(&self) -> usize {
        self.seq_len
    }
    fn n_features(&self) -> usize {
        self.n_features
    }
    fn input(&self, i: usize) -> &[f64] {
        let w = self.seq_len * self.n_features;
        &self.inputs[i * w..(i + 1) * w]
    }
    fn target(&self, i: usize) -> f64 {
        self.targets[i]
    }
}

/// Gathers samples into a time-major `[steps, batch, features]` tensor.
fn gather(data: &dyn Samples, idx: &[usize]) -> (Tensor, Vec<f64>) {
    let (t, f, b) = (data.seq_len(), data.n_features(), idx.len());
    let mut x = vec![0.0; t * b * f];
    for (bi, &i) in idx.iter().enumerate() {
        let s = data.input(i);
        for step in 0..t {
            x[(step * b + bi) * f..(step * b + bi + 1) * f].copy_from_slice(&s[step * f..(step + 1) * f]);
        }
    }
    let y = idx.iter().map(|&i| data.target(i)).collect();
    (Tensor::new(&[t, b, f], x).expect("sized above"), y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 128,
            epochs: 5,
            learning_rate: 1e-3,
            seed: DEFAULT_SEED,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        Ok(())
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step(&mut self, model: &mut Model) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        let mut k = 0;
        for l in &mut model.layers {
            for (p, g) in l.slots() {
                if self.m.len() <= k {
                    self.m.push(vec![0.0; p.len()]);
                    self.v.push(vec![0.0; p.len()]);
                }
                let (m, v) = (&mut self.m[k], &mut self.v[k]);
                for i in 0..p.len() {
                    m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                    v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                    let mh = m[i] / bc1;
                    let vh = v[i] / bc2;
                    p[i] -= self.lr * mh / (vh.sqrt() + self.eps);
                }
                k += 1;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    /// Root of the sample-weighted mean batch MSE, per epoch, in model space.
    pub epoch_rmse: Vec<f64>,
}

/// Mini-batch training; per-epoch shuffling is driven by `cfg.seed`, so equal
/// seeds give identical histories and parameters.
pub fn train(model: &mut Model, data: &dyn Samples, cfg: &TrainConfig) -> Result<TrainHistory> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    if data.n_features() != model.spec.input_features {
        return Err(Error::Shape {
            op: "train",
            expected: vec![model.spec.input_features],
            actual: vec![data.n_features()],
        });
    }
    if data.seq_len() < model.spec.min_steps() {
        return Err(Error::Config(format!(
            "sequence length {} is shorter than the model needs ({})",
            data.seq_len(),
            model.spec.min_steps()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(cfg.learning_rate);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = TrainHistory { epoch_rmse: Vec::new() };
    for epoch in 0..cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut sse = 0.0;
        for (bi, idx) in order.chunks(cfg.batch_size).enumerate() {
            let (x, y) = gather(data, idx);
            model.zero_grad();
            let pred = model.forward_time_major(&x)?;
            let (loss, d) = mse_grad(&pred, &y)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch: epoch + 1,
                    batch: bi + 1,
                    detail: format!("batch loss is {loss}"),
                });
            }
            model.backward(&d)?;
            if model.grads().iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence {
                    epoch: epoch + 1,
                    batch: bi + 1,
                    detail: "non-finite gradient".into(),
                });
            }
            adam.step(model);
            sse += loss * idx.len() as f64;
        }
        let rmse = (sse / data.len() as f64).sqrt();
        log::debug!("epoch {}/{}: rmse {rmse:.6}", epoch + 1, cfg.epochs);
        history.epoch_rmse.push(rmse);
    }
    Ok(history)
}

/// Model-space predictions for every sample, in order.
pub fn predict(model: &mut Model, data: &dyn Samples, batch_size: usize) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..data.len()).collect();
    let mut out = Vec::with_capacity(data.len());
    for chunk in idx.chunks(batch_size.max(1)) {
        let (x, _) = gather(data, chunk);
        out.extend(model.forward_time_major(&x)?);
    }
    Ok(out)
}

fn check_pair(pred: &[f64], actual: &[f64]) -> Result<()> {
    if pred.len() != actual.len() {
        return Err(Error::Shape {
            op: "metric",
            expected: vec![actual.len()],
            actual: vec![pred.len()],
        });
    }
    if pred.is_empty() {
        return Err(Error::Data("metric over zero samples".into()));
    }
    Ok(())
}

pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(pred, actual)?;
    let sse: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64> {
    check_pair(pred, actual)?;
    let sae: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sae / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub train_mae: f64,
    pub test_mae: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let r = rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap();
        assert!((r - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((mae(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(rmse(&[1.0], &[1.0]).unwrap(), 0.0);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mae(&[], &[]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::new(3, vec![LayerSpec::Lstm { units: 4 }]).is_err());
        assert!(ModelSpec::new(3, vec![LayerSpec::Conv1d { filters: 2, kernel: 2 }, LayerSpec::Dense { units: 1 }]).is_err());
        assert!(ModelSpec::new(0, Architecture::Gru.layers(4)).is_err());
        for a in Architecture::ALL {
            assert!(ModelSpec::for_architecture(5, a, 8).is_ok());
        }
    }

    #[test]
    fn parameter_counts() {
        let (h, f) = (4, 3);
        let m = Model::new(&ModelSpec::for_architecture(f, Architecture::Gru, h).unwrap(), 1).unwrap();
        assert_eq!(m.layers()[0].n_params(), 3 * (h * f + h * h + h));
        let m = Model::new(&ModelSpec::for_architecture(f, Architecture::Lstm, h).unwrap(), 1).unwrap();
        assert_eq!(m.layers()[0].n_params(), 4 * (h * f + h * h + h));
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }
}
