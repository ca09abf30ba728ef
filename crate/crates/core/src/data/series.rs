use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wind::{wind_vector, WindVector};

/// One meteorological reading. `direction` is the meteorological
/// direction in radians, `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindSample {
    pub timestamp: DateTime<Utc>,
    /// m/s
    pub speed: f64,
    /// rad, meteorological convention
    pub direction: f64,
}

impl WindSample {
    pub fn wind(&self) -> Result<WindVector> {
        wind_vector(self.speed, self.direction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesSource {
    #[serde(rename = "5-min-wind")]
    FiveMinute,
    #[serde(rename = "1-hr-wind")]
    Hourly,
    Synthetic,
}

/// Uniformly spaced, strictly increasing wind samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindSeries {
    samples: Vec<WindSample>,
    resolution_s: i64,
    pub source: SeriesSource,
}

impl WindSeries {
    pub fn new(samples: Vec<WindSample>, resolution_s: i64, source: SeriesSource) -> Result<Self> {
        if resolution_s <= 0 {
            return Err(Error::InvalidInput(format!("resolution must be positive, got {resolution_s}")));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.speed >= 0.0) || !s.speed.is_finite() {
                return Err(Error::InvalidInput(format!("sample {i}: speed {} must be >= 0", s.speed)));
            }
            if !(0.0..std::f64::consts::TAU).contains(&s.direction) {
                return Err(Error::InvalidInput(format!("sample {i}: direction {} outside [0, 2π)", s.direction)));
            }
        }
        for (i, pair) in samples.windows(2).enumerate() {
            let step = (pair[1].timestamp - pair[0].timestamp).num_seconds();
            if step != resolution_s {
                return Err(Error::InvalidInput(format!(
                    "samples {i}->{}: spacing {step} s, expected {resolution_s} s",
                    i + 1
                )));
            }
        }
        Ok(Self { samples, resolution_s, source })
    }

    pub fn samples(&self) -> &[WindSample] {
        &self.samples
    }

    pub fn resolution_s(&self) -> i64 {
        self.resolution_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.speed).collect()
    }

    /// Directions in degrees, `[0, 360)`.
    pub fn directions_deg(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.direction.to_degrees()).collect()
    }

    pub fn winds(&self) -> Result<Vec<WindVector>> {
        self.samples.iter().map(WindSample::wind).collect()
    }

    /// Sub-series `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> WindSeries {
        WindSeries { samples: self.samples[start..end].to_vec(), resolution_s: self.resolution_s, source: self.source }
    }
}
