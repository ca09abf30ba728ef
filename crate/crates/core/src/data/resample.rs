use crate::error::{Error, Result};
use crate::wind::normalize_angle;

use super::series::{SeriesSource, WindSample, WindSeries};

/// Direction of the mean unit vector, `[0, 2π)`. Opposing headings that
/// cancel exactly give 0.
pub fn circular_mean(angles: &[f64]) -> f64 {
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    normalize_angle(s.atan2(c))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub series: WindSeries,
    pub warnings: Vec<String>,
}

const PER_HOUR: usize = 12;

/// Averages consecutive blocks of twelve 5-minute samples into hourly
/// samples stamped at the block start. Speed uses the arithmetic mean,
/// direction the circular mean. A partial trailing block is dropped.
pub fn resample_hourly(series: &WindSeries) -> Result<Resampled> {
    if series.resolution_s() != 300 {
        return Err(Error::InvalidInput(format!(
            "hourly resampling needs 300 s input, got {} s",
            series.resolution_s()
        )));
    }
    let mut warnings = Vec::new();
    let leftover = series.len() % PER_HOUR;
    if leftover != 0 {
        let msg = format!("dropped {leftover} trailing sample(s) that do not fill an hour");
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let samples: Vec<WindSample> = series
        .samples()
        .chunks_exact(PER_HOUR)
        .map(|block| {
            let dirs: Vec<f64> = block.iter().map(|s| s.direction).collect();
            WindSample {
                timestamp: block[0].timestamp,
                speed: block.iter().map(|s| s.speed).sum::<f64>() / PER_HOUR as f64,
                direction: circular_mean(&dirs),
            }
        })
        .collect();
    Ok(Resampled { series: WindSeries::new(samples, 3600, SeriesSource::Hourly)?, warnings })
}
