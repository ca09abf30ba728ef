//! UAV velocity triangle under a frozen wind field, leg flight times, and
//! the wind-drifted flying range.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::wind::WindVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavSpec {
    pub id: String,
    pub pos: Vec2,
    /// Airspeed limit, m/s.
    pub u_max: f64,
    /// Maximum flight time per route, s.
    pub t_max: f64,
    /// Operator flying distance, m. Defaults to `u_max·t_max/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_i: Option<f64>,
    /// Largest wind speed the airframe tolerates, m/s.
    pub wind_resist: f64,
}

impl UavSpec {
    /// AscTec Falcon 8 figures: 16 m/s airspeed, 18 min flight time,
    /// 15 m/s wind resistance.
    pub fn falcon_8(id: impl Into<String>, pos: Vec2) -> Self {
        Self { id: id.into(), pos, u_max: 16.0, t_max: 18.0 * 60.0, rho_i: None, wind_resist: 15.0 }
    }

    pub fn with_flying_distance(mut self, rho: f64) -> Self {
        self.rho_i = Some(rho);
        self
    }

    pub fn flying_distance(&self) -> f64 {
        self.rho_i.unwrap_or(0.5 * self.u_max * self.t_max)
    }

    pub fn validate(&self) -> Result<()> {
        let rho = self.flying_distance();
        if !(self.u_max > 0.0 && self.t_max > 0.0 && rho > 0.0 && self.pos.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "UAV {} needs positive u_max, t_max and flying distance",
                self.id
            )));
        }
        if !(self.wind_resist < self.u_max) || !(self.wind_resist >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "UAV {}: wind resistance {} must lie in [0, u_max)",
                self.id, self.wind_resist
            )));
        }
        Ok(())
    }

    pub fn flying_range(&self) -> FlyingRange {
        FlyingRange { center: self.pos, radius: self.flying_distance() }
    }

    /// Flying range re-centred on the wind-drifted point.
    pub fn drifted_range(&self, wind: &WindVector) -> FlyingRange {
        FlyingRange { center: drifted_center(self, wind), radius: self.flying_distance() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlyingRange {
    pub center: Vec2,
    pub radius: f64,
}

impl FlyingRange {
    pub fn contains(&self, p: Vec2) -> bool {
        self.center.distance(p) <= self.radius
    }
}

/// How the ground speed is chosen when the wind has a tailwind component
/// (`θ_sw ≤ π/2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundSpeedRule {
    /// Ground speed is the crab-angle solution capped at `u_max`, so both the
    /// airspeed and the ground speed respect the limit on every heading.
    #[default]
    Capped,
    /// Tailwind legs always fly at exactly `u_max` ground speed, even near a
    /// pure crosswind where that needs more than `u_max` of airspeed.
    Piecewise,
}

/// Velocity triangle `v + w = s` for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityTriangle {
    pub air_velocity: Vec2,
    pub ground_velocity: Vec2,
    /// Angle between ground and air velocity (crab angle), rad.
    pub theta_sv: f64,
    /// Angle between ground velocity and wind, rad in `[0, π]`.
    pub theta_sw: f64,
}

impl VelocityTriangle {
    pub fn ground_speed(&self) -> f64 {
        self.ground_velocity.norm()
    }

    pub fn airspeed(&self) -> f64 {
        self.air_velocity.norm()
    }
}

pub fn ground_velocity(from: Vec2, to: Vec2, wind: &WindVector, u_max: f64) -> Result<VelocityTriangle> {
    ground_velocity_with(GroundSpeedRule::default(), from, to, wind, u_max)
}

pub fn ground_velocity_with(
    rule: GroundSpeedRule,
    from: Vec2,
    to: Vec2,
    wind: &WindVector,
    u_max: f64,
) -> Result<VelocityTriangle> {
    let leg = to - from;
    let dist = leg.norm();
    if dist == 0.0 {
        return Err(Error::DegenerateLeg { x: from.x, y: from.y });
    }
    let heading = leg.heading();
    let w = wind.as_vec2();
    let ws = w.norm();

    let (theta_sw, speed) = if ws == 0.0 {
        (0.0, u_max)
    } else {
        let unit = leg * (1.0 / dist);
        let theta_sw = (unit.dot(w) / ws).clamp(-1.0, 1.0).acos();
        let sin_crab = ws * (PI - theta_sw).sin() / u_max;
        let crab =
            if sin_crab <= 1.0 { Some(u_max * sin_crab.asin().cos() - ws * (PI - theta_sw).cos()) } else { None };
        let speed = match (rule, crab) {
            (GroundSpeedRule::Piecewise, _) if theta_sw <= FRAC_PI_2 => u_max,
            (_, Some(c)) => c.min(u_max),
            (_, None) => return Err(Error::LegInfeasible { wind_speed: ws, u_max }),
        };
        (theta_sw, speed)
    };
    if !(speed > 0.0) {
        return Err(Error::LegInfeasible { wind_speed: ws, u_max });
    }

    let ground = Vec2::from_polar(speed, heading);
    let air = ground - w;
    let air_norm = air.norm();
    let theta_sv = if air_norm == 0.0 { 0.0 } else { (ground.dot(air) / (speed * air_norm)).clamp(-1.0, 1.0).acos() };
    Ok(VelocityTriangle { air_velocity: air, ground_velocity: ground, theta_sv, theta_sw })
}

pub fn flight_time(from: Vec2, to: Vec2, wind: &WindVector, u_max: f64) -> Result<f64> {
    flight_time_with(GroundSpeedRule::default(), from, to, wind, u_max)
}

pub fn flight_time_with(rule: GroundSpeedRule, from: Vec2, to: Vec2, wind: &WindVector, u_max: f64) -> Result<f64> {
    let tri = ground_velocity_with(rule, from, to, wind, u_max)?;
    Ok(from.distance(to) / tri.ground_speed())
}

/// Centre of the flying range after drifting with the wind for `t_max`.
pub fn drifted_center(uav: &UavSpec, wind: &WindVector) -> Vec2 {
    uav.pos + wind.as_vec2() * uav.t_max
}

/// Membership in the intersection of the nominal and the drifted range.
pub fn in_effective_range(point: Vec2, uav: &UavSpec, wind: &WindVector) -> bool {
    uav.flying_range().contains(point) && uav.drifted_range(wind).contains(point)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EAST: Vec2 = Vec2::new(1000.0, 0.0);

    fn leg_speed(rule: GroundSpeedRule, wind: WindVector) -> f64 {
        ground_velocity_with(rule, Vec2::ZERO, EAST, &wind, 16.0).unwrap().ground_speed()
    }

    /// Independent route: intersect the ray along the leg with the circle
    /// of airspeed `u` around the wind vector, taking the far root.
    fn triangle_oracle(unit: Vec2, w: Vec2, u: f64) -> f64 {
        let b = unit.dot(w);
        let c = w.dot(w) - u * u;
        b + (b * b - c).sqrt()
    }

    #[test]
    fn headwind_tailwind_and_calm() {
        for rule in [GroundSpeedRule::Capped, GroundSpeedRule::Piecewise] {
            let head = leg_speed(rule, WindVector::new(-10.0, 0.0));
            assert!((head - 6.0).abs() < 1e-12);
            assert!((head - triangle_oracle(Vec2::new(1.0, 0.0), Vec2::new(-10.0, 0.0), 16.0)).abs() < 1e-12);
            assert!((leg_speed(rule, WindVector::new(10.0, 0.0)) - 16.0).abs() < 1e-12);
            let calm = ground_velocity_with(rule, Vec2::ZERO, EAST, &WindVector::CALM, 16.0).unwrap();
            assert_eq!(calm.ground_speed(), 16.0);
            assert_eq!(calm.air_velocity, calm.ground_velocity);
        }
    }

    #[test]
    fn crosswind_rules_differ() {
        let cross = WindVector::new(0.0, 10.0);
        assert_eq!(leg_speed(GroundSpeedRule::Piecewise, cross), 16.0);
        let capped = leg_speed(GroundSpeedRule::Capped, cross);
        assert!((capped - (16.0f64 * 16.0 - 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn flight_time_examples() {
        let head = WindVector::new(-10.0, 0.0);
        let t = flight_time(Vec2::ZERO, Vec2::new(5400.0, 0.0), &head, 16.0).unwrap();
        assert!((t - 900.0).abs() < 1e-9);
        let calm = flight_time(Vec2::ZERO, Vec2::new(9600.0, 0.0), &WindVector::CALM, 16.0).unwrap();
        assert!((calm - 600.0).abs() < 1e-9);
        let w = WindVector::new(10.0, 0.0);
        let out = flight_time(Vec2::ZERO, EAST, &w, 16.0).unwrap();
        let back = flight_time(EAST, Vec2::ZERO, &w, 16.0).unwrap();
        assert!((out - back).abs() > 1.0);
    }

    #[test]
    fn degenerate_and_infeasible_legs() {
        let p = Vec2::new(3.0, 4.0);
        assert!(matches!(ground_velocity(p, p, &WindVector::CALM, 16.0), Err(Error::DegenerateLeg { .. })));
        // Wind at airspeed straight on the nose leaves no ground speed.
        assert!(matches!(
            ground_velocity(Vec2::ZERO, EAST, &WindVector::new(-16.0, 0.0), 16.0),
            Err(Error::LegInfeasible { .. })
        ));
        // Crosswind beyond airspeed cannot be crabbed against.
        assert!(matches!(
            ground_velocity(Vec2::ZERO, EAST, &WindVector::new(-1.0, 20.0), 16.0),
            Err(Error::LegInfeasible { .. })
        ));
    }

    #[test]
    fn drifted_center_examples() {
        let uav = UavSpec::falcon_8("U", Vec2::ZERO);
        let c = drifted_center(&uav, &WindVector::new(-10.0, 0.0));
        assert_eq!(c, Vec2::new(-10_800.0, 0.0));
        assert_eq!(drifted_center(&uav, &WindVector::CALM), uav.pos);
        let uav = UavSpec::falcon_8("U", Vec2::new(100.0, 200.0));
        assert_eq!(drifted_center(&uav, &WindVector::new(0.0, 5.0)), Vec2::new(100.0, 5600.0));
    }

    #[test]
    fn effective_range_examples() {
        let uav = UavSpec::falcon_8("U", Vec2::ZERO).with_flying_distance(5000.0);
        assert!(in_effective_range(uav.pos, &uav, &WindVector::CALM));
        assert!(!in_effective_range(Vec2::new(5001.0, 0.0), &uav, &WindVector::CALM));
        // Drift of 10 800 m west puts the drifted disc entirely past rho.
        let p = Vec2::new(-1000.0, 0.0);
        assert!(uav.flying_range().contains(p));
        assert!(!in_effective_range(p, &uav, &WindVector::new(-10.0, 0.0)));
    }

    #[test]
    fn default_flying_distance_is_out_and_back_reach() {
        let uav = UavSpec::falcon_8("U", Vec2::ZERO);
        assert_eq!(uav.flying_distance(), 16.0 * 1080.0 / 2.0);
        assert!(uav.validate().is_ok());
        let mut bad = uav.clone();
        bad.wind_resist = 20.0;
        assert!(bad.validate().is_err());
    }
}
