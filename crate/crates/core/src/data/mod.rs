//! Wind time-series ingestion: CSV loading and validation, hourly
//! resampling, normalization, and windowing into forecasting datasets.

mod csv_io;
mod resample;
mod series;
pub mod synthetic;
mod windows;

pub use csv_io::{load_csv, write_csv, CsvSchema, LoadedSeries};
pub use resample::{circular_mean, resample_hourly, Resampled};
pub use series::{SeriesSource, WindSample, WindSeries};
pub use windows::{make_windows, make_windows_with, sliding_windows, Channel, Dataset, ForecastConfig, MinMax, Window};
