//! Desk-scale reproductions of the forecasting comparisons: accuracy per
//! quantization width, and 5-minute versus hourly input resolution.

use serde::{Deserialize, Serialize};

use crate::data::{
    make_windows, make_windows_with, resample_hourly, Dataset, ForecastConfig, MinMax, WindSeries, Window,
};
use crate::error::{Error, Result};

use super::lstm::{LstmModel, LstmShape};
use super::metrics::{evaluate, metrics, Metrics, Persistence};
use super::quant::{QuantSpec, DEFAULT_GAMMA};
use super::train::{fine_tune, pretrain, train, train_windows, TrainConfig};
use super::ForecastModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantRow {
    /// Weight bit width; 32 is the float model.
    pub bits: u8,
    pub mae: f64,
    pub rmse: f64,
}

/// Pretrains one float model, then finishes it once per width (in float for
/// width 32, quantization-aware otherwise) and scores each on the test split.
/// Returns the finished models alongside their rows.
pub fn quantization_table(
    dataset: &Dataset,
    config: &TrainConfig,
    widths: &[u8],
) -> Result<Vec<(ForecastModel, QuantRow)>> {
    if dataset.test.is_empty() {
        return Err(Error::InvalidInput("dataset has no test windows".into()));
    }
    let base = pretrain(dataset, config)?.model;
    widths
        .iter()
        .map(|&bits| {
            let spec = (bits != 32).then_some(QuantSpec { weight_bits: bits, output_bits: bits, gamma: DEFAULT_GAMMA });
            let model = fine_tune(&base, &dataset.train, spec.as_ref(), config, config.finetune_epochs)?;
            let m = evaluate(&model, &dataset.test, None)?;
            Ok((model, QuantRow { bits, mae: m.mae, rmse: m.rmse }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionReport {
    pub five_minute: Metrics,
    pub hourly: Metrics,
    /// 5-minute persistence on the same points, for reference.
    pub persistence: Metrics,
    /// `1 - five_minute.mae / hourly.mae`
    pub reduction: f64,
    /// Hour-aligned forecast origins in the held-out span.
    pub points: usize,
}

const PER_HOUR: usize = 12;

/// A model fed 5-minute samples and one fed hourly means, for one channel,
/// sharing the 5-minute training split's normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionModels {
    pub fine: ForecastModel,
    /// Predicts the next hourly mean from `input_len` hourly means.
    pub coarse: LstmModel,
    pub norms: Vec<MinMax>,
    /// First held-out 5-minute index.
    pub split: usize,
    pub config: ForecastConfig,
}

impl ResolutionModels {
    /// Trains a float 5-minute model and an hourly model.
    pub fn train(series: &WindSeries, config: &ForecastConfig, train_config: &TrainConfig) -> Result<Self> {
        let fine = make_windows(series, config)?;
        let model = ForecastModel::Float(train(&fine, train_config)?.model);
        Self::with_fine(series, config, train_config, model)
    }

    /// Trains only the hourly model, pairing it with an existing 5-minute
    /// model. The hourly model sees only hours that end before the
    /// 5-minute split, with as many gradient updates as a 5-minute run.
    pub fn with_fine(
        series: &WindSeries,
        config: &ForecastConfig,
        train_config: &TrainConfig,
        fine_model: ForecastModel,
    ) -> Result<Self> {
        if series.resolution_s() != 300 {
            return Err(Error::InvalidInput("resolution comparison needs a 5-minute series".into()));
        }
        let fine = make_windows(series, config)?;
        if fine_model.shape().window_len() != config.input_len * fine.width() {
            return Err(Error::Model("5-minute model does not match the forecast config".into()));
        }
        let hourly = resample_hourly(series)?.series;
        let train_hours = (fine.split / PER_HOUR).min(hourly.len());
        let hourly_config = ForecastConfig { horizon: 1, resolution_s: 3600, train_fraction: 1.0, ..config.clone() };
        let coarse = make_windows_with(&hourly.slice(0, train_hours), &hourly_config, Some(&fine.norms))?;
        let updates = train_config.epochs * fine.train.len().div_ceil(train_config.batch_size);
        let per_epoch = coarse.train.len().div_ceil(train_config.batch_size).max(1);
        let coarse_config =
            TrainConfig { epochs: updates.div_ceil(per_epoch), finetune_epochs: 0, ..train_config.clone() };
        let width = fine.width();
        let shape = LstmShape {
            input_size: width,
            hidden_size: train_config.hidden_size,
            output_size: width,
            input_len: config.input_len,
        };
        let coarse_model = train_windows(&coarse.train, shape, &coarse_config)?.model;
        Ok(Self {
            fine: fine_model,
            coarse: coarse_model,
            norms: fine.norms,
            split: fine.split,
            config: config.clone(),
        })
    }

    fn width(&self) -> usize {
        self.norms.len()
    }

    fn scaled(&self, series: &WindSeries) -> Vec<Vec<f64>> {
        let cols = self.config.channel.columns(series);
        cols.into_iter().zip(&self.norms).map(|(c, m)| c.into_iter().map(|x| m.normalize(x)).collect()).collect()
    }

    /// Earliest hour-aligned 5-minute index in the held-out span from which
    /// both models have enough history.
    pub fn first_origin(&self) -> usize {
        self.split.max(self.config.input_len * PER_HOUR).next_multiple_of(PER_HOUR)
    }

    /// Normalized forecasts over 5-minute indices `[from, to)`: the 5-minute
    /// model issued every `horizon` steps, and the hourly model issued every
    /// hour and held flat. `from` must be hour-aligned and at or after
    /// [`Self::first_origin`]. Values are step-major over channels.
    pub fn tracks(&self, series: &WindSeries, from: usize, to: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if !from.is_multiple_of(PER_HOUR)
            || from < self.config.input_len * PER_HOUR
            || from < self.config.input_len
            || to > series.len()
        {
            return Err(Error::InvalidInput(format!("cannot forecast span [{from}, {to})")));
        }
        let w = self.width();
        let fine_cols = self.scaled(series);
        let coarse_cols = self.scaled(&resample_hourly(series)?.series);
        let gather = |cols: &[Vec<f64>], a: usize, b: usize| -> Vec<f64> {
            (a..b).flat_map(|t| cols.iter().map(move |c| c[t])).collect()
        };
        let h = self.config.horizon;
        let mut fine = Vec::with_capacity((to - from) * w);
        for origin in (from..to).step_by(h) {
            let out = self.fine.forecast(&gather(&fine_cols, origin - self.config.input_len, origin))?;
            fine.extend_from_slice(&out[..(to - origin).min(h) * w]);
        }
        let mut coarse = Vec::with_capacity((to - from) * w);
        for origin in (from..to).step_by(PER_HOUR) {
            let hour = origin / PER_HOUR;
            let out = self.coarse.forecast(&gather(&coarse_cols, hour - self.config.input_len, hour))?;
            coarse.extend(out.iter().copied().cycle().take((to - origin).min(PER_HOUR) * w));
        }
        Ok((fine, coarse))
    }

    /// Both models forecast from hour-aligned origins in the held-out span
    /// and are scored against the same 5-minute truth over `horizon` steps,
    /// in normalized units.
    pub fn compare(&self, series: &WindSeries) -> Result<ResolutionReport> {
        let w = self.width();
        let h = self.config.horizon;
        let fine_cols = self.scaled(series);
        let coarse_cols = self.scaled(&resample_hourly(series)?.series);
        let gather = |cols: &[Vec<f64>], a: usize, b: usize| -> Vec<f64> {
            (a..b).flat_map(|t| cols.iter().map(move |c| c[t])).collect()
        };
        let mut windows = Vec::new();
        let mut coarse_pred = Vec::new();
        let mut truth = Vec::new();
        for origin in (self.first_origin()..=series.len().saturating_sub(h)).step_by(PER_HOUR) {
            let hour = origin / PER_HOUR;
            let target = gather(&fine_cols, origin, origin + h);
            let next = self.coarse.forecast(&gather(&coarse_cols, hour - self.config.input_len, hour))?;
            coarse_pred.extend(next.iter().copied().cycle().take(h * w));
            truth.extend_from_slice(&target);
            windows.push(Window {
                input: gather(&fine_cols, origin - self.config.input_len, origin),
                target,
                start: origin,
            });
        }
        if windows.is_empty() {
            return Err(Error::InvalidInput("held-out span has no hour-aligned forecast origins".into()));
        }
        let five_minute = evaluate(&self.fine, &windows, None)?;
        let hourly = metrics(&truth, &coarse_pred)?;
        let persistence = evaluate(&Persistence { width: w, horizon: h }, &windows, None)?;
        Ok(ResolutionReport {
            reduction: 1.0 - five_minute.mae / hourly.mae,
            five_minute,
            hourly,
            persistence,
            points: windows.len(),
        })
    }
}

/// Trains both models and compares them; see [`ResolutionModels`].
pub fn resolution_comparison(
    series: &WindSeries,
    config: &ForecastConfig,
    train_config: &TrainConfig,
) -> Result<ResolutionReport> {
    ResolutionModels::train(series, config, train_config)?.compare(series)
}
