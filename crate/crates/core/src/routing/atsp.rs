//! Asymmetric TSP over a [`TimeMatrix`]: exact subset dynamic programming
//! and a construction-plus-exchange heuristic for larger instances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::matrix::TimeMatrix;

/// Closed tour starting and ending at node 0. `order` lists the other
/// nodes in visiting sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub cost: f64,
}

/// Largest node count (start included) the exact solver accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 16;

const NONE: u8 = u8::MAX;

/// Minimum-cost Hamiltonian cycle through every node, O(n²·2ⁿ).
///
/// Costs accumulate left to right along the path, so the optimum equals the
/// minimum over all permutations of their sequential sums exactly. Among
/// equal-cost tours the first one found with the lowest node indices wins.
pub fn solve_atsp_exact(matrix: &TimeMatrix, cap: usize) -> Result<Tour> {
    let n = matrix.len();
    if n > cap || n > 24 {
        return Err(Error::SolverCapExceeded { nodes: n, cap: cap.min(24) });
    }
    let m = n.saturating_sub(1);
    if m == 0 {
        return Ok(Tour { order: Vec::new(), cost: 0.0 });
    }

    let full = (1usize << m) - 1;
    let idx = |mask: usize, j: usize| mask * m + j;
    let mut cost = vec![f64::INFINITY; (full + 1) * m];
    let mut parent = vec![NONE; (full + 1) * m];

    for j in 0..m {
        cost[idx(1 << j, j)] = matrix.get(0, j + 1);
    }
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let here = cost[idx(mask, j)];
            if !here.is_finite() {
                continue;
            }
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let cand = here + matrix.get(j + 1, k + 1);
                let slot = idx(mask | (1 << k), k);
                if cand < cost[slot] {
                    cost[slot] = cand;
                    parent[slot] = j as u8;
                }
            }
        }
    }

    let mut best = f64::INFINITY;
    let mut last = NONE;
    for j in 0..m {
        let total = cost[idx(full, j)] + matrix.get(j + 1, 0);
        if total < best {
            best = total;
            last = j as u8;
        }
    }
    if !best.is_finite() {
        return Err(Error::InfeasibleTour);
    }

    let mut order = Vec::with_capacity(m);
    let mut mask = full;
    let mut j = last;
    while j != NONE {
        order.push(j as usize + 1);
        let p = parent[idx(mask, j as usize)];
        mask &= !(1 << j);
        j = p;
    }
    order.reverse();
    Ok(Tour { order, cost: best })
}

/// Nearest-neighbour construction from the start, then first-improvement
/// local search over node relocation, pairwise exchange and segment
/// reversal until no move lowers the cost.
pub fn solve_atsp_heuristic(matrix: &TimeMatrix) -> Result<Tour> {
    let n = matrix.len();
    let mut order = Vec::with_capacity(n.saturating_sub(1));
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut cur = 0;
    for _ in 1..n {
        let next = (1..n)
            .filter(|&k| !visited[k])
            .min_by(|&a, &b| matrix.get(cur, a).total_cmp(&matrix.get(cur, b)))
            .expect("unvisited node remains");
        visited[next] = true;
        order.push(next);
        cur = next;
    }

    let mut cost = matrix.tour_cost(&order);
    let len = order.len();
    let mut improved = true;
    let mut candidate = order.clone();
    while improved {
        improved = false;
        'moves: for i in 0..len {
            for j in 0..len {
                if i == j {
                    continue;
                }
                for kind in 0..3 {
                    candidate.clear();
                    candidate.extend_from_slice(&order);
                    match kind {
                        0 => {
                            let node = candidate.remove(i);
                            candidate.insert(j, node);
                        }
                        1 if i < j => candidate.swap(i, j),
                        2 if i + 1 < j => candidate[i..=j].reverse(),
                        _ => continue,
                    }
                    let c = matrix.tour_cost(&candidate);
                    let better = if cost.is_finite() { c < cost - 1e-12 * cost.abs().max(1.0) } else { c.is_finite() };
                    if better {
                        std::mem::swap(&mut order, &mut candidate);
                        cost = c;
                        improved = true;
                        break 'moves;
                    }
                }
            }
        }
    }
    if !cost.is_finite() {
        return Err(Error::InfeasibleTour);
    }
    Ok(Tour { order, cost })
}

/// Exact below `cap` nodes, heuristic above.
pub fn solve_atsp(matrix: &TimeMatrix, cap: usize) -> Result<Tour> {
    if matrix.len() <= cap {
        solve_atsp_exact(matrix, cap)
    } else {
        solve_atsp_heuristic(matrix)
    }
}
