//! Wind representation, meteorological/polar angle conversion, effective
//! wind against a rotor, and turbine power.
//!
//! Meteorological directions give where the wind blows *from*, clockwise from
//! north. Polar directions give where the air moves *to*, counterclockwise
//! from +x. The two are related by `pol = 3π/2 − met (mod 2π)`, which is its
//! own inverse.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Betz limit on the power coefficient.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute difference between two angles, in `[0, π]`.
pub fn angle_between(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

fn check_finite(theta: f64) -> Result<f64> {
    if theta.is_finite() {
        Ok(theta)
    } else {
        Err(Error::InvalidAngle(theta))
    }
}

pub fn met_to_polar(theta_met: f64) -> Result<f64> {
    Ok(normalize_angle(3.0 * FRAC_PI_2 - check_finite(theta_met)?))
}

pub fn polar_to_met(theta_pol: f64) -> Result<f64> {
    Ok(normalize_angle(3.0 * FRAC_PI_2 - check_finite(theta_pol)?))
}

/// Cartesian wind velocity in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WindVector {
    pub wx: f64,
    pub wy: f64,
}

impl WindVector {
    pub const CALM: WindVector = WindVector { wx: 0.0, wy: 0.0 };

    pub const fn new(wx: f64, wy: f64) -> Self {
        Self { wx, wy }
    }

    /// Builds the vector from a speed and a meteorological direction.
    pub fn from_met(speed: f64, theta_met: f64) -> Result<Self> {
        if !(speed >= 0.0) || !speed.is_finite() {
            return Err(Error::InvalidInput(format!("wind speed must be finite and >= 0, got {speed}")));
        }
        let v = Vec2::from_polar(speed, met_to_polar(theta_met)?);
        Ok(Self::new(v.x, v.y))
    }

    pub fn speed(&self) -> f64 {
        self.wx.hypot(self.wy)
    }

    /// Polar direction in `[0, 2π)`; `None` for calm air.
    pub fn polar_direction(&self) -> Option<f64> {
        if self.speed() == 0.0 {
            None
        } else {
            Some(normalize_angle(self.wy.atan2(self.wx)))
        }
    }

    /// Meteorological direction in `[0, 2π)`; `None` for calm air.
    pub fn met_direction(&self) -> Option<f64> {
        self.polar_direction().map(|p| normalize_angle(3.0 * FRAC_PI_2 - p))
    }

    pub fn as_vec2(&self) -> Vec2 {
        Vec2::new(self.wx, self.wy)
    }

    pub fn angles(&self) -> Option<WindAngles> {
        self.polar_direction()
            .map(|theta_pol| WindAngles { theta_pol, theta_met: normalize_angle(3.0 * FRAC_PI_2 - theta_pol) })
    }
}

pub fn wind_vector(speed: f64, theta_met: f64) -> Result<WindVector> {
    WindVector::from_met(speed, theta_met)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindAngles {
    pub theta_pol: f64,
    pub theta_met: f64,
}

/// Split of the wind speed against a rotor.
///
/// `eff_speed` is the rotor-normal component and is clamped at zero when the
/// rotor faces away from the wind; `par_speed` is the remainder, so that
/// `eff² + par² = w_s²` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindDecomposition {
    pub eff_speed: f64,
    pub par_speed: f64,
}

pub fn effective_wind(w: &WindVector, yaw: f64) -> Result<WindDecomposition> {
    let yaw = check_finite(yaw)?;
    let ws = w.speed();
    let Some(dir) = w.polar_direction() else {
        return Ok(WindDecomposition { eff_speed: 0.0, par_speed: 0.0 });
    };
    let delta = angle_between(dir, yaw);
    if delta > FRAC_PI_2 {
        return Ok(WindDecomposition { eff_speed: 0.0, par_speed: ws });
    }
    Ok(WindDecomposition { eff_speed: ws * delta.cos(), par_speed: ws * delta.sin() })
}

/// Static description of a turbine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    pub id: String,
    pub pos: Vec2,
    /// Swept rotor area, m².
    pub rotor_area: f64,
    /// Rated electrical power, W.
    pub rated_power: f64,
    /// Blade pitch, rad.
    #[serde(default)]
    pub pitch: f64,
    /// Air density, kg/m³.
    pub air_density: f64,
}

impl TurbineSpec {
    /// Siemens SG 8.0-167 DD figures used in the desk experiments.
    pub fn sg_8_0_167(id: impl Into<String>, pos: Vec2) -> Self {
        Self { id: id.into(), pos, rotor_area: 21_900.0, rated_power: 8.0e6, pitch: 0.0, air_density: 1.065 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rotor_area > 0.0
            && self.rated_power > 0.0
            && self.air_density > 0.0
            && self.pitch.is_finite()
            && self.pos.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("turbine {} has a non-physical spec", self.id)))
        }
    }
}

/// `min(½·ρ·A·v³·cp, rated)`.
pub fn turbine_power(spec: &TurbineSpec, eff_speed: f64, cp: f64) -> f64 {
    let raw = 0.5 * spec.air_density * spec.rotor_area * eff_speed.max(0.0).powi(3) * cp;
    raw.min(spec.rated_power)
}

pub trait PowerCoefficient {
    /// Power coefficient for a tip-speed ratio and a pitch angle in radians.
    fn cp(&self, tip_speed_ratio: f64, pitch: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantCp(pub f64);

impl PowerCoefficient for ConstantCp {
    fn cp(&self, _tip_speed_ratio: f64, _pitch: f64) -> f64 {
        self.0.clamp(0.0, BETZ_LIMIT)
    }
}

/// `c1·(c2/λi − c3·β − c4)·exp(−c5/λi) + c6·λ` with
/// `1/λi = 1/(λ + 0.08β) − 0.035/(β³ + 1)` and β in degrees.
///
/// Defaults are the widely used Heier coefficients, peaking at cp ≈ 0.480
/// near λ ≈ 8.1 for zero pitch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCp {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl Default for AnalyticCp {
    fn default() -> Self {
        Self { c1: 0.5176, c2: 116.0, c3: 0.4, c4: 5.0, c5: 21.0, c6: 0.0068 }
    }
}

impl AnalyticCp {
    pub fn try_cp(&self, tip_speed_ratio: f64, pitch: f64) -> Result<f64> {
        if !(tip_speed_ratio > 0.0) || !tip_speed_ratio.is_finite() {
            return Err(Error::InvalidInput(format!("tip-speed ratio must be positive, got {tip_speed_ratio}")));
        }
        if !(pitch >= 0.0) || !pitch.is_finite() {
            return Err(Error::InvalidInput(format!("pitch must be >= 0, got {pitch}")));
        }
        let beta = pitch.to_degrees();
        let inv = 1.0 / (tip_speed_ratio + 0.08 * beta) - 0.035 / (beta.powi(3) + 1.0);
        let raw =
            self.c1 * (self.c2 * inv - self.c3 * beta - self.c4) * (-self.c5 * inv).exp() + self.c6 * tip_speed_ratio;
        Ok(raw.clamp(0.0, BETZ_LIMIT))
    }
}

impl PowerCoefficient for AnalyticCp {
    fn cp(&self, tip_speed_ratio: f64, pitch: f64) -> f64 {
        self.try_cp(tip_speed_ratio, pitch).unwrap_or(0.0)
    }
}

pub fn default_cp(tip_speed_ratio: f64, pitch: f64) -> Result<f64> {
    AnalyticCp::default().try_cp(tip_speed_ratio, pitch)
}

/// Serializable choice of power-coefficient model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CpModel {
    Constant { value: f64 },
    Analytic(AnalyticCp),
}

impl Default for CpModel {
    fn default() -> Self {
        CpModel::Analytic(AnalyticCp::default())
    }
}

impl PowerCoefficient for CpModel {
    fn cp(&self, tip_speed_ratio: f64, pitch: f64) -> f64 {
        match self {
            CpModel::Constant { value } => ConstantCp(*value).cp(tip_speed_ratio, pitch),
            CpModel::Analytic(a) => a.cp(tip_speed_ratio, pitch),
        }
    }
}

/// A turbine together with its operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineModel<C = CpModel> {
    pub spec: TurbineSpec,
    pub cp_model: C,
    pub tip_speed_ratio: f64,
}

impl<C: PowerCoefficient> TurbineModel<C> {
    pub fn new(spec: TurbineSpec, cp_model: C, tip_speed_ratio: f64) -> Self {
        Self { spec, cp_model, tip_speed_ratio }
    }

    pub fn cp(&self) -> f64 {
        self.cp_model.cp(self.tip_speed_ratio, self.spec.pitch)
    }

    /// Power for a rotor-normal wind speed, capped at rated power.
    pub fn power(&self, eff_speed: f64) -> f64 {
        turbine_power(&self.spec, eff_speed, self.cp())
    }

    /// Power before the rated-power cap.
    pub fn uncapped_power(&self, eff_speed: f64) -> f64 {
        0.5 * self.spec.air_density * self.spec.rotor_area * eff_speed.max(0.0).powi(3) * self.cp()
    }
}
