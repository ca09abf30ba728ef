use serde::{Deserialize, Serialize};

use crate::data::{MinMax, Window};
use crate::error::{Error, Result};

use super::lstm::{Linear, Lstm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    /// Number of compared values.
    pub n: usize,
}

pub fn metrics(y: &[f64], y_hat: &[f64]) -> Result<Metrics> {
    if y.len() != y_hat.len() {
        return Err(Error::InvalidInput(format!("length mismatch: {} vs {}", y.len(), y_hat.len())));
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("no values to compare".into()));
    }
    let n = y.len();
    let (abs, sq) = y.iter().zip(y_hat).fold((0.0, 0.0), |(a, s), (t, p)| {
        let e = t - p;
        (a + e.abs(), s + e * e)
    });
    Ok(Metrics { mae: abs / n as f64, rmse: (sq / n as f64).sqrt(), n })
}

/// Repeats the last observed step (all `width` channels) `horizon` times.
pub fn persistence_forecast(window: &[f64], width: usize, horizon: usize) -> Result<Vec<f64>> {
    if width == 0 || window.len() < width || !window.len().is_multiple_of(width) {
        return Err(Error::InvalidInput(format!(
            "window of {} values is not a whole number of {width}-wide steps",
            window.len()
        )));
    }
    let last = &window[window.len() - width..];
    Ok(last.iter().copied().cycle().take(width * horizon).collect())
}

/// Anything mapping an input window to a flat forecast.
pub trait Forecaster {
    fn predict(&self, window: &[f64]) -> Result<Vec<f64>>;
}

impl<M: Linear> Forecaster for Lstm<M> {
    fn predict(&self, window: &[f64]) -> Result<Vec<f64>> {
        self.forecast(window)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Persistence {
    pub width: usize,
    pub horizon: usize,
}

impl Forecaster for Persistence {
    fn predict(&self, window: &[f64]) -> Result<Vec<f64>> {
        persistence_forecast(window, self.width, self.horizon)
    }
}

/// Pooled metrics over every output of every window, in normalized units,
/// or in physical units when `norms` is given (output `j` uses channel
/// `j % norms.len()`).
pub fn evaluate<F: Forecaster + ?Sized>(model: &F, windows: &[Window], norms: Option<&[MinMax]>) -> Result<Metrics> {
    let mut y = Vec::new();
    let mut y_hat = Vec::new();
    for w in windows {
        let p = model.predict(&w.input)?;
        if p.len() != w.target.len() {
            return Err(Error::Model(format!("forecast has {} values, target {}", p.len(), w.target.len())));
        }
        y.extend_from_slice(&w.target);
        y_hat.extend(p);
    }
    if let Some(norms) = norms.filter(|n| !n.is_empty()) {
        let width = norms.len();
        for (j, (a, b)) in y.iter_mut().zip(y_hat.iter_mut()).enumerate() {
            let m = norms[j % width];
            *a = m.denormalize(*a);
            *b = m.denormalize(*b);
        }
    }
    metrics(&y, &y_hat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        let m = metrics(&[0.3, 0.4], &[0.3, 0.4]).unwrap();
        assert_eq!((m.mae, m.rmse), (0.0, 0.0));
        let m = metrics(&[0.0, 0.0], &[1.0, -1.0]).unwrap();
        assert_eq!((m.mae, m.rmse), (1.0, 1.0));
        let m = metrics(&[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_eq!(m.mae, 1.0);
        assert!((m.rmse - 2f64.sqrt()).abs() < 1e-15);
        assert!(metrics(&[], &[]).is_err());
        assert!(metrics(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn persistence_examples() {
        assert_eq!(persistence_forecast(&[2.0; 5], 1, 3).unwrap(), vec![2.0; 3]);
        assert_eq!(persistence_forecast(&[1.0, 2.0, 3.0], 1, 2).unwrap(), vec![3.0, 3.0]);
        assert_eq!(persistence_forecast(&[1.0, 5.0, 2.0, 6.0], 2, 2).unwrap(), vec![2.0, 6.0, 2.0, 6.0]);
        assert!(persistence_forecast(&[], 1, 2).is_err());
        let w = Window { input: vec![0.4; 6], target: vec![0.4; 3], start: 0 };
        let m = evaluate(&Persistence { width: 1, horizon: 3 }, &[w], None).unwrap();
        assert_eq!(m.mae, 0.0);
    }

    #[test]
    fn denormalized_metrics_scale_with_span() {
        let w = Window { input: vec![0.0, 0.5], target: vec![0.7], start: 0 };
        let norms = [MinMax { min: 2.0, max: 12.0 }];
        let p = Persistence { width: 1, horizon: 1 };
        let a = evaluate(&p, std::slice::from_ref(&w), None).unwrap();
        let b = evaluate(&p, &[w], Some(&norms)).unwrap();
        assert!((b.mae - 10.0 * a.mae).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn rmse_never_below_mae(v in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40)) {
            let (y, p): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            let m = metrics(&y, &p).unwrap();
            proptest::prop_assert!(m.rmse + 1e-12 >= m.mae);
        }
    }
}
