//! Two-UAV, seven-turbine reference scenario on an offshore-style layout,
//! used by tests, the CLI and the benches.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::Vec2;
use crate::kinematics::UavSpec;
use crate::wind::{wind_vector, TurbineSpec, WindVector};

use super::{Assignment, UavAssignment};

/// A fleet, its turbines, their initial assignment and a wind condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub uavs: Vec<UavSpec>,
    pub turbines: Vec<TurbineSpec>,
    pub assignment: Assignment,
    /// Wind speed, m/s.
    pub wind_speed: f64,
    /// Meteorological wind direction, degrees.
    pub wind_direction_deg: f64,
}

impl Scenario {
    pub fn wind(&self) -> Result<WindVector> {
        wind_vector(self.wind_speed, self.wind_direction_deg.to_radians())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Flying distance used for both UAVs in the scenario, m.
pub const REFERENCE_FLYING_DISTANCE: f64 = 12_000.0;

/// Coordinates in m, approximate. UAV 1 launches from B110
/// and UAV 2 from A213.
pub fn reference_scenario() -> Scenario {
    let at = |id: &str, x: f64, y: f64| TurbineSpec::sg_8_0_167(id, Vec2::new(x, y));
    let turbines = vec![
        at("B110", 0.0, 0.0),
        at("C214", -60.0, 890.0),
        at("A106", -820.0, 3530.0),
        at("A411", -540.0, -1050.0),
        at("E105", 3250.0, -920.0),
        at("A213", 3390.0, -5150.0),
        at("D101", 1060.0, -510.0),
    ];
    let uavs = vec![
        UavSpec::falcon_8("UAV1", Vec2::new(0.0, 0.0)).with_flying_distance(REFERENCE_FLYING_DISTANCE),
        UavSpec::falcon_8("UAV2", Vec2::new(3390.0, -5150.0)).with_flying_distance(REFERENCE_FLYING_DISTANCE),
    ];
    let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let assignment = Assignment {
        entries: vec![
            UavAssignment { uav: "UAV1".into(), turbines: ids(&["B110", "C214", "A106", "A411", "E105"]) },
            UavAssignment { uav: "UAV2".into(), turbines: ids(&["A213", "D101"]) },
        ],
    };
    Scenario { uavs, turbines, assignment, wind_speed: 10.0, wind_direction_deg: FRAC_PI_2.to_degrees() }
}
