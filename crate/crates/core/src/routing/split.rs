use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::atsp::Tour;
use super::matrix::TimeMatrix;

/// One start-anchored loop `s → nodes… → s` cut from a tour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRoute {
    pub nodes: Vec<usize>,
    /// Per-leg times, `nodes.len() + 1` entries, the last being the return.
    pub leg_times: Vec<f64>,
    pub time: f64,
}

/// Walks the tour in order and closes the current loop at the start point
/// whenever adding the next turbine plus its return leg would exceed
/// `t_max`.
pub fn split_route(tour: &Tour, matrix: &TimeMatrix, t_max: f64) -> Result<Vec<SplitRoute>> {
    for &k in &tour.order {
        let round_trip = matrix.get(0, k) + matrix.get(k, 0);
        if !(round_trip <= t_max) {
            return Err(Error::InfeasibleTurbine { turbine: matrix.label(k).to_string(), round_trip, t_max });
        }
    }

    let mut routes = Vec::new();
    let mut nodes: Vec<usize> = Vec::new();
    let mut legs: Vec<f64> = Vec::new();
    let mut elapsed = 0.0;
    let mut prev = 0;
    for &k in &tour.order {
        let hop = matrix.get(prev, k);
        if !nodes.is_empty() && !(elapsed + hop + matrix.get(k, 0) <= t_max) {
            routes.push(close(&mut nodes, &mut legs, elapsed, matrix.get(prev, 0)));
            elapsed = 0.0;
            prev = 0;
        }
        let hop = matrix.get(prev, k);
        elapsed += hop;
        legs.push(hop);
        nodes.push(k);
        prev = k;
    }
    if !nodes.is_empty() {
        routes.push(close(&mut nodes, &mut legs, elapsed, matrix.get(prev, 0)));
    }
    Ok(routes)
}

fn close(nodes: &mut Vec<usize>, legs: &mut Vec<f64>, elapsed: f64, back: f64) -> SplitRoute {
    legs.push(back);
    SplitRoute { nodes: std::mem::take(nodes), leg_times: std::mem::take(legs), time: elapsed + back }
}
