use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{flight_time_with, UavSpec};
use crate::wind::{TurbineSpec, WindVector};

use super::assign::{reassign, Assignment, Move};
use super::atsp::solve_atsp;
use super::matrix::{build_time_matrix_with, check_wind_resistance};
use super::split::split_route;
use super::{PlannerConfig, BASE_RADIUS};

pub const PLAN_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub from: String,
    pub to: String,
    /// s
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub turbines: Vec<String>,
    pub legs: Vec<Leg>,
    /// s
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavPlan {
    pub uav: String,
    /// Name of the start point: the co-located turbine if any, else the UAV.
    pub base_label: String,
    /// Turbines at the start point, inspected at launch.
    pub base_turbines: Vec<String>,
    pub routes: Vec<Route>,
}

impl UavPlan {
    pub fn route_count(&self) -> usize {
        self.routes.len()
    }

    pub fn time(&self) -> f64 {
        self.routes.iter().map(|r| r.time).sum()
    }

    /// Routes rendered as `BASE>T1>T2>BASE`.
    pub fn paths(&self) -> Vec<String> {
        self.routes
            .iter()
            .map(|r| {
                let mut parts = vec![self.base_label.as_str()];
                parts.extend(r.turbines.iter().map(String::as_str));
                parts.push(&self.base_label);
                parts.join(">")
            })
            .collect()
    }

    pub fn visited(&self) -> impl Iterator<Item = &String> {
        self.base_turbines.iter().chain(self.routes.iter().flat_map(|r| &r.turbines))
    }
}

/// Inspection plan for a whole fleet under one frozen wind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub schema_version: u32,
    pub wind: WindVector,
    pub reassigned: bool,
    pub moves: Vec<Move>,
    pub assignment: Assignment,
    pub uavs: Vec<UavPlan>,
    /// Total inspection time over all UAVs and routes, s.
    pub total_time: f64,
}

impl RoutePlan {
    pub fn uav(&self, id: &str) -> Option<&UavPlan> {
        self.uavs.iter().find(|u| u.uav == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: RoutePlan = serde_json::from_str(text)?;
        if plan.schema_version != PLAN_SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!("unsupported plan schema {}", plan.schema_version)));
        }
        Ok(plan)
    }
}

/// Runs the full planning pipeline for every UAV.
pub fn plan_inspection(
    uavs: &[UavSpec],
    turbines: &[TurbineSpec],
    initial: &Assignment,
    wind: &WindVector,
    config: &PlannerConfig,
) -> Result<RoutePlan> {
    for u in uavs {
        u.validate()?;
        check_wind_resistance(u, wind)?;
    }
    for t in turbines {
        t.validate()?;
    }
    initial.validate(uavs, turbines)?;

    let (assignment, moves) = if config.reassign {
        let r = reassign(initial, uavs, turbines, wind)?;
        (r.assignment, r.moves)
    } else {
        (initial.clone(), Vec::new())
    };

    let lookup = |id: &str| turbines.iter().find(|t| t.id == id).expect("validated");
    let mut plans = Vec::with_capacity(uavs.len());
    for (uav, entry) in uavs.iter().zip(&assignment.entries) {
        let (base, others): (Vec<&TurbineSpec>, Vec<&TurbineSpec>) =
            entry.turbines.iter().map(|id| lookup(id)).partition(|t| t.pos.distance(uav.pos) < BASE_RADIUS);

        let matrix = build_time_matrix_with(uav, &others, wind, config)?;
        let tour = solve_atsp(&matrix, config.exact_cap)?;
        let routes = split_route(&tour, &matrix, uav.t_max)?
            .into_iter()
            .map(|r| {
                let mut stops = vec![0];
                stops.extend(&r.nodes);
                stops.push(0);
                let legs = stops
                    .windows(2)
                    .zip(&r.leg_times)
                    .map(|(w, &time)| Leg {
                        from: label(&matrix, &base, uav, w[0]),
                        to: label(&matrix, &base, uav, w[1]),
                        time,
                    })
                    .collect();
                Route { turbines: r.nodes.iter().map(|&k| matrix.label(k).to_string()).collect(), legs, time: r.time }
            })
            .collect();

        plans.push(UavPlan {
            uav: uav.id.clone(),
            base_label: base.first().map_or_else(|| uav.id.clone(), |t| t.id.clone()),
            base_turbines: base.iter().map(|t| t.id.clone()).collect(),
            routes,
        });
    }

    let total_time = plans.iter().flat_map(|p| &p.routes).map(|r| r.time).sum();
    Ok(RoutePlan {
        schema_version: PLAN_SCHEMA_VERSION,
        wind: *wind,
        reassigned: config.reassign,
        moves,
        assignment,
        uavs: plans,
        total_time,
    })
}

/// The same routes flown under a different wind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    /// s
    pub total_time: f64,
    /// Per UAV, per route, s.
    pub route_times: Vec<Vec<f64>>,
    /// Routes whose replayed time exceeds their UAV's t_max.
    pub over_budget: usize,
}

/// Re-times every leg of `plan` under `wind`, keeping the visiting order.
pub fn replay_plan(
    plan: &RoutePlan,
    uavs: &[UavSpec],
    turbines: &[TurbineSpec],
    wind: &WindVector,
    config: &PlannerConfig,
) -> Result<Replay> {
    let mut route_times = Vec::with_capacity(plan.uavs.len());
    let mut over_budget = 0;
    for p in &plan.uavs {
        let uav = uavs
            .iter()
            .find(|u| u.id == p.uav)
            .ok_or_else(|| Error::InvalidInput(format!("plan names unknown UAV {}", p.uav)))?;
        check_wind_resistance(uav, wind)?;
        let pos = |id: &str| {
            if id == p.base_label {
                return Ok(uav.pos);
            }
            turbines
                .iter()
                .find(|t| t.id == id)
                .map(|t| t.pos)
                .ok_or_else(|| Error::InvalidInput(format!("plan names unknown turbine {id}")))
        };
        let mut times = Vec::with_capacity(p.routes.len());
        for r in &p.routes {
            let mut total = 0.0;
            for leg in &r.legs {
                let t = flight_time_with(config.ground_speed_rule, pos(&leg.from)?, pos(&leg.to)?, wind, uav.u_max)?;
                total += if leg.to == p.base_label { t } else { t + config.service_time };
            }
            if total > uav.t_max {
                over_budget += 1;
            }
            times.push(total);
        }
        route_times.push(times);
    }
    let total_time = route_times.iter().flatten().sum();
    Ok(Replay { total_time, route_times, over_budget })
}

fn label(matrix: &super::TimeMatrix, base: &[&TurbineSpec], uav: &UavSpec, node: usize) -> String {
    if node == 0 {
        base.first().map_or_else(|| uav.id.clone(), |t| t.id.clone())
    } else {
        matrix.label(node).to_string()
    }
}
