use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::kinematics::{flight_time_with, UavSpec};
use crate::wind::{TurbineSpec, WindVector};

use super::PlannerConfig;

/// Flight times between a UAV's start point (node 0) and its turbines
/// (nodes `1..`). Infeasible edges hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeMatrix {
    labels: Vec<String>,
    times: Vec<f64>,
}

impl TimeMatrix {
    /// Builds a matrix from explicit rows; node 0 is the start point.
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("time matrix must be {n}x{n}")));
        }
        let mut times = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, t) in row.into_iter().enumerate() {
                let t = if i == j { 0.0 } else { t };
                if t.is_nan() || t < 0.0 || (i != j && t == 0.0) {
                    return Err(Error::InvalidInput(format!("bad time {t} at ({i}, {j})")));
                }
                times.push(t);
            }
        }
        Ok(Self { labels, times })
    }

    /// Unlabelled matrix, handy for solver tests.
    pub fn from_unlabelled(rows: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (0..rows.len()).map(|i| if i == 0 { "s".to_string() } else { i.to_string() }).collect();
        Self::from_rows(labels, rows)
    }

    /// Number of nodes including the start point.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.times[from * self.labels.len() + to]
    }

    pub fn is_feasible(&self, from: usize, to: usize) -> bool {
        self.get(from, to).is_finite()
    }

    /// Closed-tour cost `s → order… → s`, summed left to right.
    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        let mut cost = 0.0;
        let mut prev = 0;
        for &k in order {
            cost += self.get(prev, k);
            prev = k;
        }
        cost + self.get(prev, 0)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            (0..i).all(|j| {
                let (a, b) = (self.get(i, j), self.get(j, i));
                a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
            })
        })
    }
}

/// Flight-time matrix for one UAV over its turbines under a frozen wind.
pub fn build_time_matrix(uav: &UavSpec, turbines: &[&TurbineSpec], wind: &WindVector) -> Result<TimeMatrix> {
    build_time_matrix_with(uav, turbines, wind, &PlannerConfig::default())
}

pub fn build_time_matrix_with(
    uav: &UavSpec,
    turbines: &[&TurbineSpec],
    wind: &WindVector,
    config: &PlannerConfig,
) -> Result<TimeMatrix> {
    check_wind_resistance(uav, wind)?;
    let mut labels = Vec::with_capacity(turbines.len() + 1);
    labels.push(uav.id.clone());
    labels.extend(turbines.iter().map(|t| t.id.clone()));
    let points: Vec<Vec2> = std::iter::once(uav.pos).chain(turbines.iter().map(|t| t.pos)).collect();

    let n = points.len();
    let mut times = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let t = match flight_time_with(config.ground_speed_rule, points[i], points[j], wind, uav.u_max) {
                Ok(t) => t,
                Err(Error::LegInfeasible { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            times[i * n + j] = if j == 0 { t } else { t + config.service_time };
        }
    }
    Ok(TimeMatrix { labels, times })
}

pub(crate) fn check_wind_resistance(uav: &UavSpec, wind: &WindVector) -> Result<()> {
    let ws = wind.speed();
    if ws > uav.wind_resist {
        return Err(Error::WindExceedsResistance { uav: uav.id.clone(), wind_speed: ws, limit: uav.wind_resist });
    }
    Ok(())
}
