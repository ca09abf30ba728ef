//! Recurrent wind forecaster: a single-layer LSTM with a dense multi-step
//! head, trained on MAE, plus post-training fixed-point quantization.

pub mod codec;
mod experiments;
mod grad;
mod lstm;
mod metrics;
mod quant;
mod train;

pub use codec::{decode_model, encode_model, SavedModel};
pub use experiments::{quantization_table, resolution_comparison, QuantRow, ResolutionModels, ResolutionReport};
pub use grad::{loss_and_gradient, mae_loss};
pub use lstm::{Gate, Linear, Lstm, LstmModel, LstmShape, Matrix, GATES};
pub use metrics::{evaluate, metrics, persistence_forecast, Forecaster, Metrics, Persistence};
pub use quant::{
    check_bits, max_code, quantize, quantize_model, quantize_with_gamma, quantize_with_scale, zero_code, QuantSpec,
    QuantizedLstm, QuantizedMatrix, DEFAULT_GAMMA, DEFAULT_SPARSE_THRESHOLD, SUPPORTED_BITS,
};
pub use train::{
    dataset_shape, fine_tune, pretrain, train, train_model, train_windows, Optimizer, TrainConfig, TrainReport,
};

use crate::error::Result;

/// A float or quantized forecaster.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum ForecastModel {
    Float(LstmModel),
    Quantized(QuantizedLstm),
}

impl ForecastModel {
    pub fn shape(&self) -> LstmShape {
        match self {
            ForecastModel::Float(m) => m.shape(),
            ForecastModel::Quantized(m) => m.shape(),
        }
    }

    /// Weight bit width, 32 for the float model.
    pub fn bits(&self) -> u8 {
        match self {
            ForecastModel::Float(_) => 32,
            ForecastModel::Quantized(m) => m.input_weights(Gate::Forget).bits(),
        }
    }

    pub fn forecast(&self, window: &[f64]) -> Result<Vec<f64>> {
        match self {
            ForecastModel::Float(m) => m.forecast(window),
            ForecastModel::Quantized(m) => m.forecast(window),
        }
    }
}

impl Forecaster for ForecastModel {
    fn predict(&self, window: &[f64]) -> Result<Vec<f64>> {
        self.forecast(window)
    }
}
