use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Window};
use crate::error::{Error, Result};

use super::grad::{loss_and_gradient, mae_loss};
use super::lstm::{LstmModel, LstmShape, GATES};
use super::quant::{quantize_model, QuantSpec, QuantizedLstm};
use super::ForecastModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    /// Plain gradient descent with a fixed step.
    Sgd,
    /// Adam with the usual moment decays (0.9, 0.999).
    #[default]
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub hidden_size: usize,
    /// Total passes over the training windows.
    pub epochs: usize,
    /// Final epochs run with the quantizer in the loop when a bit width is
    /// requested (plain float epochs otherwise, so totals match).
    pub finetune_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Global gradient-norm ceiling.
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::Adam,
            hidden_size: 32,
            epochs: 30,
            finetune_epochs: 5,
            batch_size: 32,
            learning_rate: 0.005,
            clip_norm: 1.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0 || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidInput("hidden_size, epochs and batch_size must be at least 1".into()));
        }
        if self.finetune_epochs > self.epochs {
            return Err(Error::InvalidInput("finetune_epochs cannot exceed epochs".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.clip_norm > 0.0) {
            return Err(Error::InvalidInput("learning_rate and clip_norm must be positive".into()));
        }
        Ok(())
    }

    fn pretrain(&self) -> Self {
        Self { epochs: self.epochs - self.finetune_epochs, ..self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: LstmModel,
    /// Training-set MAE before the first epoch, then the mean batch loss of
    /// each epoch.
    pub losses: Vec<f64>,
}

pub fn dataset_shape(dataset: &Dataset, hidden_size: usize) -> Result<LstmShape> {
    let first = dataset.train.first().ok_or_else(|| Error::Training("no training windows".into()))?;
    let width = dataset.width().max(1);
    Ok(LstmShape {
        input_size: width,
        hidden_size,
        output_size: first.target.len(),
        input_len: first.input.len() / width,
    })
}

/// Float training for `config.epochs` epochs.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    train_windows(&dataset.train, dataset_shape(dataset, config.hidden_size)?, config)
}

/// Mini-batch training on MAE with global-norm gradient clipping, from a
/// seeded random initialization. Bit-reproducible.
pub fn train_windows(windows: &[Window], shape: LstmShape, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    if windows.is_empty() {
        return Err(Error::Training("no training windows".into()));
    }
    if let Some(w) = windows.iter().find(|w| w.input.len() != shape.window_len() || w.target.len() != shape.output_size)
    {
        return Err(Error::Training(format!("window at {} does not match model shape {shape:?}", w.start)));
    }
    let mut model = LstmModel::random(shape, config.seed);
    let all: Vec<&Window> = windows.iter().collect();
    let mut losses = vec![mae_loss(&model, &all)];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9));
    let mut stepper = Stepper::new(config.optimizer);
    for epoch in 0..config.epochs {
        let loss = run_epoch(&mut model, windows, None, config, &mut rng, &mut stepper)?;
        debug!("epoch {epoch}: train MAE {loss:.5}");
        losses.push(loss);
    }
    Ok(TrainReport { model, losses })
}

struct Stepper {
    kind: Optimizer,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Stepper {
    fn new(kind: Optimizer) -> Self {
        Self { kind, m: Vec::new(), v: Vec::new(), t: 0 }
    }

    fn apply(&mut self, model: &mut LstmModel, grad: &LstmModel, config: &TrainConfig) {
        let norm = grad.params().iter().flat_map(|p| p.iter()).map(|g| g * g).sum::<f64>().sqrt();
        let clip = if norm > config.clip_norm { config.clip_norm / norm } else { 1.0 };
        let lr = config.learning_rate;
        let grads = grad.params().concat();
        match self.kind {
            Optimizer::Sgd => {
                for (p, g) in model.params_mut().into_iter().flat_map(|p| p.iter_mut()).zip(grads) {
                    *p -= lr * clip * g;
                }
            }
            Optimizer::Adam => {
                const B1: f64 = 0.9;
                const B2: f64 = 0.999;
                if self.m.is_empty() {
                    self.m = vec![0.0; grads.len()];
                    self.v = vec![0.0; grads.len()];
                }
                self.t += 1;
                let (c1, c2) = (1.0 - B1.powi(self.t), 1.0 - B2.powi(self.t));
                let params = model.params_mut().into_iter().flat_map(|p| p.iter_mut());
                for (((p, g), m), v) in params.zip(grads).zip(&mut self.m).zip(&mut self.v) {
                    let g = g * clip;
                    *m = B1 * *m + (1.0 - B1) * g;
                    *v = B2 * *v + (1.0 - B2) * g * g;
                    *p -= lr * (*m / c1) / ((*v / c2).sqrt() + 1e-8);
                }
            }
        }
    }
}

/// One shuffled pass. With `quant`, forward and backward passes run on the
/// dequantized weights and updates land on the float weights, passing
/// straight through the rounding and stopping where a weight is clipped.
fn run_epoch(
    model: &mut LstmModel,
    windows: &[Window],
    quant: Option<&QuantSpec>,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
    stepper: &mut Stepper,
) -> Result<f64> {
    let mut order: Vec<&Window> = windows.iter().collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for batch in order.chunks(config.batch_size) {
        let (loss, grad) = match quant {
            None => loss_and_gradient(model, batch),
            Some(spec) => {
                let q = quantize_model(model, spec)?;
                let (loss, mut grad) = loss_and_gradient(&q.dequantized(), batch);
                let limits = clip_limits(&q);
                for (k, (g, w)) in grad.params_mut().into_iter().zip(model.params()).enumerate() {
                    if let Some(limit) = limits[k] {
                        g.iter_mut().zip(w).filter(|(_, w)| w.abs() > limit).for_each(|(g, _)| *g = 0.0);
                    }
                }
                (loss, grad)
            }
        };
        if !loss.is_finite() {
            return Err(Error::Training(format!("loss became {loss}")));
        }
        total += loss * batch.len() as f64;
        stepper.apply(model, &grad, config);
    }
    if !model.is_finite() {
        return Err(Error::Training("weights diverged".into()));
    }
    Ok(total / windows.len() as f64)
}

/// Clip magnitude per parameter block, `None` for biases.
fn clip_limits(q: &QuantizedLstm) -> [Option<f64>; 14] {
    let mut out = [None; 14];
    for g in GATES {
        out[g as usize] = Some(0.5 * q.input_weights(g).scale());
        out[4 + g as usize] = Some(0.5 * q.recurrent_weights(g).scale());
    }
    out[12] = Some(0.5 * q.output_weights().scale());
    out
}

/// Continues training a model for `epochs` epochs, quantization-aware when
/// `quant` is given, and returns the final float or quantized model.
pub fn fine_tune(
    model: &LstmModel,
    windows: &[Window],
    quant: Option<&QuantSpec>,
    config: &TrainConfig,
    epochs: usize,
) -> Result<ForecastModel> {
    config.validate()?;
    if windows.is_empty() {
        return Err(Error::Training("no training windows".into()));
    }
    let mut m = model.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x7f4a_7c15));
    let mut stepper = Stepper::new(config.optimizer);
    for _ in 0..epochs {
        run_epoch(&mut m, windows, quant, config, &mut rng, &mut stepper)?;
    }
    Ok(match quant {
        Some(spec) => ForecastModel::Quantized(quantize_model(&m, spec)?),
        None => ForecastModel::Float(m),
    })
}

/// Float pretraining for `epochs - finetune_epochs`, then the remaining
/// epochs either in float or with the quantizer in the loop.
pub fn train_model(dataset: &Dataset, config: &TrainConfig, quant: Option<&QuantSpec>) -> Result<ForecastModel> {
    let base = train(dataset, &config.pretrain())?.model;
    fine_tune(&base, &dataset.train, quant, config, config.finetune_epochs)
}

/// Shared pretraining for several widths.
pub fn pretrain(dataset: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    train(dataset, &config.pretrain())
}
