use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::series::WindSeries;

/// Which quantities a model reads and forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    #[default]
    Speed,
    /// Raw meteorological direction in degrees.
    Direction,
    /// Direction as (sin, cos), avoiding the 0/360 seam.
    DirectionSinCos,
    /// Speed and raw direction in one model.
    Joint,
}

impl Channel {
    pub fn width(self) -> usize {
        match self {
            Channel::Speed | Channel::Direction => 1,
            Channel::DirectionSinCos | Channel::Joint => 2,
        }
    }

    /// Raw per-step feature columns for a series.
    pub fn columns(self, series: &WindSeries) -> Vec<Vec<f64>> {
        match self {
            Channel::Speed => vec![series.speeds()],
            Channel::Direction => vec![series.directions_deg()],
            Channel::DirectionSinCos => {
                let d = series.samples().iter().map(|s| s.direction);
                vec![d.clone().map(f64::sin).collect(), d.map(f64::cos).collect()]
            }
            Channel::Joint => vec![series.speeds(), series.directions_deg()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastConfig {
    /// Input samples per window.
    pub input_len: usize,
    /// Forecast samples per window.
    pub horizon: usize,
    /// s
    pub resolution_s: i64,
    /// Leading fraction of the series used for training.
    pub train_fraction: f64,
    pub channel: Channel,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self { input_len: 24, horizon: 8, resolution_s: 300, train_fraction: 0.8, channel: Channel::Speed }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_len == 0 || self.horizon == 0 {
            return Err(Error::InvalidInput("input_len and horizon must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!("train_fraction {} outside (0, 1]", self.train_fraction)));
        }
        Ok(())
    }
}

/// Min-max scaling of one feature to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("cannot fit normalization to no values".into()));
        }
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Ok(Self { min, max })
    }

    /// Width of the fitted range; 1 when the range is empty.
    pub fn span(&self) -> f64 {
        let s = self.max - self.min;
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    pub fn normalize(&self, x: f64) -> f64 {
        (x - self.min) / self.span()
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        y * self.span() + self.min
    }
}

/// One training example. Values are step-major: all channels of step 0,
/// then step 1, and so on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    /// Series index of the first input sample.
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub train: Vec<Window>,
    pub test: Vec<Window>,
    pub norms: Vec<MinMax>,
    /// Series index of the first test sample.
    pub split: usize,
    pub config: ForecastConfig,
}

impl Dataset {
    pub fn width(&self) -> usize {
        self.norms.len()
    }
}

/// Stride-1 windows over already-scaled columns; `offset` is added to the
/// reported start index.
pub fn sliding_windows(columns: &[Vec<f64>], input_len: usize, horizon: usize, offset: usize) -> Vec<Window> {
    let n = columns.first().map_or(0, Vec::len);
    if n < input_len + horizon {
        return Vec::new();
    }
    let gather = |from: usize, len: usize| -> Vec<f64> {
        (from..from + len).flat_map(|t| columns.iter().map(move |c| c[t])).collect()
    };
    (0..=n - input_len - horizon)
        .map(|s| Window { input: gather(s, input_len), target: gather(s + input_len, horizon), start: s + offset })
        .collect()
}

/// Chronological split, normalization fitted on the training part only,
/// then stride-1 windows on each side of the split.
pub fn make_windows(series: &WindSeries, config: &ForecastConfig) -> Result<Dataset> {
    make_windows_with(series, config, None)
}

/// As [`make_windows`], optionally reusing normalization bounds fitted
/// elsewhere (e.g. on a finer-resolution training split).
pub fn make_windows_with(series: &WindSeries, config: &ForecastConfig, norms: Option<&[MinMax]>) -> Result<Dataset> {
    config.validate()?;
    let n = series.len();
    let need = config.input_len + config.horizon;
    if n < need {
        return Err(Error::InvalidInput(format!("series of {n} samples is shorter than one window ({need})")));
    }
    let split = ((n as f64 * config.train_fraction).round() as usize).clamp(1, n);
    let raw = config.channel.columns(series);
    let norms = match norms {
        Some(n) if n.len() == raw.len() => n.to_vec(),
        Some(_) => return Err(Error::InvalidInput("normalization width does not match channel".into())),
        None => raw.iter().map(|c| MinMax::fit(&c[..split])).collect::<Result<_>>()?,
    };
    let scaled: Vec<Vec<f64>> =
        raw.iter().zip(&norms).map(|(c, m)| c.iter().map(|&x| m.normalize(x)).collect()).collect();
    let head: Vec<Vec<f64>> = scaled.iter().map(|c| c[..split].to_vec()).collect();
    let tail: Vec<Vec<f64>> = scaled.iter().map(|c| c[split..].to_vec()).collect();
    Ok(Dataset {
        train: sliding_windows(&head, config.input_len, config.horizon, 0),
        test: sliding_windows(&tail, config.input_len, config.horizon, split),
        norms,
        split,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic;
    use proptest::prelude::*;

    #[test]
    fn window_counts() {
        let col = vec![(0..32).map(f64::from).collect::<Vec<_>>()];
        assert_eq!(sliding_windows(&col, 24, 8, 0).len(), 1);
        let col = vec![(0..33).map(f64::from).collect::<Vec<_>>()];
        let w = sliding_windows(&col, 24, 8, 0);
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].input[0], 1.0);
        assert_eq!(w[1].target, (25..33).map(f64::from).collect::<Vec<_>>());
        let col = vec![(0..31).map(f64::from).collect::<Vec<_>>()];
        assert!(sliding_windows(&col, 24, 8, 0).is_empty());
    }

    #[test]
    fn test_windows_come_after_training_windows() {
        let s = synthetic::generate(2, 1);
        let d = make_windows(&s, &ForecastConfig::default()).unwrap();
        assert!(!d.train.is_empty() && !d.test.is_empty());
        let last_train = d.train.iter().map(|w| w.start + 24 + 8 - 1).max().unwrap();
        let first_test = d.test.iter().map(|w| w.start).min().unwrap();
        assert!(last_train < d.split && first_test >= d.split);
        let ts = s.samples();
        assert!(ts[last_train].timestamp < ts[first_test].timestamp);
    }

    #[test]
    fn bounds_come_from_training_split_only() {
        let s = synthetic::generate(2, 4);
        let d = make_windows(&s, &ForecastConfig::default()).unwrap();
        let expected = MinMax::fit(&s.speeds()[..d.split]).unwrap();
        assert_eq!(d.norms[0], expected);
        assert!(d.train.iter().flat_map(|w| &w.input).all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn too_short_series_is_rejected() {
        let s = synthetic::generate(1, 1).slice(0, 31);
        assert!(make_windows(&s, &ForecastConfig::default()).is_err());
    }

    #[test]
    fn multi_channel_windows_are_step_major() {
        let s = synthetic::generate(1, 2);
        let cfg = ForecastConfig { channel: Channel::Joint, train_fraction: 1.0, ..ForecastConfig::default() };
        let d = make_windows(&s, &cfg).unwrap();
        assert_eq!(d.width(), 2);
        let w = &d.train[3];
        assert_eq!(w.input.len(), 48);
        assert_eq!(w.target.len(), 16);
        let speed0 = d.norms[0].normalize(s.samples()[3].speed);
        let dir0 = d.norms[1].normalize(s.samples()[3].direction.to_degrees());
        assert!((w.input[0] - speed0).abs() < 1e-12 && (w.input[1] - dir0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn normalization_round_trip(lo in -100.0f64..100.0, span in 0.1f64..50.0, f in 0.0f64..=1.0) {
            let m = MinMax { min: lo, max: lo + span };
            let x = lo + f * span;
            prop_assert!((m.denormalize(m.normalize(x)) - x).abs() < 1e-9);
        }
    }
}
