use std::f64::consts::TAU;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wind::normalize_angle;

use super::series::{SeriesSource, WindSample, WindSeries};

/// Column names for the three required fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CsvSchema {
    pub timestamp: String,
    pub speed: String,
    pub direction: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self { timestamp: "timestamp".into(), speed: "wind_speed_ms".into(), direction: "wind_direction_deg".into() }
    }
}

/// Result of loading a file: contiguous segments plus what was repaired.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub segments: Vec<WindSeries>,
    pub warnings: Vec<String>,
    /// Number of samples filled in by interpolation.
    pub interpolated: usize,
}

impl LoadedSeries {
    pub fn longest(self) -> Option<WindSeries> {
        self.segments.into_iter().max_by_key(|s| s.len())
    }
}

/// Largest gap, in missing samples, that is filled by interpolation.
const MAX_FILLED_GAP: i64 = 2;

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { row: 1, message: format!("missing column `{name}`") })
    };
    let (ti, si, di) = (col(&schema.timestamp)?, col(&schema.speed)?, col(&schema.direction)?);

    let mut warnings = Vec::new();
    let mut raw: Vec<WindSample> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Header is row 1.
        let row = i + 2;
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let timestamp = parse_timestamp(field(ti))
            .ok_or_else(|| Error::Parse { row, message: format!("bad timestamp `{}`", field(ti)) })?;
        let speed: f64 =
            field(si).parse().map_err(|_| Error::Parse { row, message: format!("bad speed `{}`", field(si)) })?;
        if !(speed >= 0.0) || !speed.is_finite() {
            return Err(Error::Parse { row, message: format!("negative or non-finite speed {speed}") });
        }
        let deg: f64 =
            field(di).parse().map_err(|_| Error::Parse { row, message: format!("bad direction `{}`", field(di)) })?;
        if !deg.is_finite() {
            return Err(Error::Parse { row, message: "non-finite direction".into() });
        }
        if !(0.0..360.0).contains(&deg) {
            let wrapped = deg.rem_euclid(360.0);
            let msg = format!("row {row}: direction {deg}° normalized to {wrapped}°");
            log::warn!("{msg}");
            warnings.push(msg);
        }
        if let Some(prev) = raw.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::Parse {
                    row,
                    message: format!("timestamp {timestamp} does not increase past {}", prev.timestamp),
                });
            }
        }
        raw.push(WindSample { timestamp, speed, direction: normalize_angle(deg.to_radians()) });
    }
    if raw.is_empty() {
        return Err(Error::Parse { row: 1, message: "no data rows".into() });
    }
    assemble(raw, warnings)
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|n| n.and_utc())
}

/// Infers the resolution, fills short gaps and splits at long ones.
fn assemble(raw: Vec<WindSample>, mut warnings: Vec<String>) -> Result<LoadedSeries> {
    let source = SeriesSource::FiveMinute;
    if raw.len() == 1 {
        let series = WindSeries::new(raw, 300, source)?;
        return Ok(LoadedSeries { segments: vec![series], warnings, interpolated: 0 });
    }
    let resolution = modal_step(&raw);
    let source = if resolution == 3600 { SeriesSource::Hourly } else { source };

    let mut segments = Vec::new();
    let mut current = vec![raw[0]];
    let mut interpolated = 0;
    for pair in raw.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let step = (b.timestamp - a.timestamp).num_seconds();
        let missing = step / resolution - 1;
        if step % resolution == 0 && (0..=MAX_FILLED_GAP).contains(&missing) {
            for k in 1..=missing {
                let f = k as f64 / (missing + 1) as f64;
                current.push(WindSample {
                    timestamp: a.timestamp + chrono::Duration::seconds(resolution * k),
                    speed: a.speed + f * (b.speed - a.speed),
                    direction: interpolate_direction(a.direction, b.direction, f),
                });
            }
            if missing > 0 {
                interpolated += missing as usize;
                warnings.push(format!("filled {missing} missing sample(s) after {}", a.timestamp));
            }
        } else {
            warnings.push(format!("gap of {step} s after {} splits the series", a.timestamp));
            segments.push(WindSeries::new(std::mem::take(&mut current), resolution, source)?);
        }
        current.push(b);
    }
    segments.push(WindSeries::new(current, resolution, source)?);
    Ok(LoadedSeries { segments, warnings, interpolated })
}

fn modal_step(raw: &[WindSample]) -> i64 {
    let mut steps: Vec<i64> = raw.windows(2).map(|p| (p[1].timestamp - p[0].timestamp).num_seconds()).collect();
    steps.sort_unstable();
    let mut best = (steps[0], 0);
    let mut run = (steps[0], 0);
    for &s in &steps {
        run = if s == run.0 { (s, run.1 + 1) } else { (s, 1) };
        if run.1 > best.1 {
            best = run;
        }
    }
    best.0
}

/// Shortest-arc interpolation between two directions.
fn interpolate_direction(a: f64, b: f64, f: f64) -> f64 {
    let mut d = (b - a).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d -= TAU;
    }
    normalize_angle(a + f * d)
}

pub fn write_csv(series: &WindSeries, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let schema = CsvSchema::default();
    w.write_record([&schema.timestamp, &schema.speed, &schema.direction])?;
    for s in series.samples() {
        let deg = format!("{:.3}", s.direction.to_degrees());
        w.write_record([
            s.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            format!("{:.4}", s.speed),
            // just below 360 rounds up to the seam
            if deg == "360.000" { "0.000".to_string() } else { deg },
        ])?;
    }
    w.flush()?;
    Ok(())
}
