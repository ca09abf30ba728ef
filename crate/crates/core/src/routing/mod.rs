//! Wind-aware multi-UAV inspection routing.
//!
//! Planning pipeline per call, with the wind frozen:
//! stranded-turbine detection → reassignment → per-UAV flight-time matrix →
//! tour (exact subset DP up to a node cap, heuristic above) → split of the
//! tour into start-anchored loops within each UAV's flight-time budget.

mod assign;
mod atsp;
mod matrix;
mod plan;
mod split;

pub mod fixture;

use serde::{Deserialize, Serialize};

use crate::kinematics::GroundSpeedRule;

pub use assign::{cluster_assign, out_of_range_set, reassign, Assignment, Move, Reassignment, UavAssignment};
pub use atsp::{solve_atsp, solve_atsp_exact, solve_atsp_heuristic, Tour, DEFAULT_EXACT_CAP};
pub use matrix::{build_time_matrix, build_time_matrix_with, TimeMatrix};
pub use plan::{plan_inspection, replay_plan, Leg, Replay, Route, RoutePlan, UavPlan, PLAN_SCHEMA_VERSION};
pub use split::{split_route, SplitRoute};

/// Turbines closer than this to a UAV's start point are treated as
/// inspected at launch rather than as tour nodes, m.
pub const BASE_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Move stranded turbines to other UAVs before routing.
    pub reassign: bool,
    /// Largest node count (start included) solved exactly.
    pub exact_cap: usize,
    /// Hover/inspection time added on arrival at each turbine, s.
    pub service_time: f64,
    pub ground_speed_rule: GroundSpeedRule,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            reassign: true,
            exact_cap: DEFAULT_EXACT_CAP,
            service_time: 0.0,
            ground_speed_rule: GroundSpeedRule::default(),
        }
    }
}

impl PlannerConfig {
    /// Same pipeline without range checks or reassignment.
    pub fn baseline() -> Self {
        Self { reassign: false, ..Self::default() }
    }
}
