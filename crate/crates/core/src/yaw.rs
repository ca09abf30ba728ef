//! Yaw set-point selection from a wind forecast and realized power under
//! the actual wind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wind::{effective_wind, normalize_angle, PowerCoefficient, TurbineModel, WindVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YawDecision {
    pub turbine_id: String,
    /// Commanded yaw, rad in `[0, 2π)`.
    pub yaw: f64,
    /// Power expected at this yaw if the forecast is right, W.
    pub predicted_power: f64,
}

/// Points the rotor at the forecast wind unless the turbine would already
/// exceed rated power facing it, in which case the yaw is left alone.
/// Calm air has no direction, so the current yaw is kept as well.
pub fn optimize_yaw<C: PowerCoefficient>(
    turbine: &TurbineModel<C>,
    forecast_wind: &WindVector,
    current_yaw: f64,
) -> Result<YawDecision> {
    let current_yaw = normalize_angle(current_yaw);
    let yaw = match forecast_wind.polar_direction() {
        Some(dir) if turbine.uncapped_power(forecast_wind.speed()) <= turbine.spec.rated_power => dir,
        _ => current_yaw,
    };
    let predicted_power = turbine.power(effective_wind(forecast_wind, yaw)?.eff_speed);
    Ok(YawDecision { turbine_id: turbine.spec.id.clone(), yaw, predicted_power })
}

/// Power produced by the real wind at a commanded yaw.
pub fn realized_power<C: PowerCoefficient>(turbine: &TurbineModel<C>, true_wind: &WindVector, yaw: f64) -> Result<f64> {
    Ok(turbine.power(effective_wind(true_wind, yaw)?.eff_speed))
}

/// Applies [`optimize_yaw`] step by step along a forecast, carrying the yaw
/// forward between steps.
pub fn yaw_schedule<C: PowerCoefficient>(
    turbine: &TurbineModel<C>,
    forecast: &[WindVector],
    initial_yaw: f64,
) -> Result<Vec<f64>> {
    let mut yaw = initial_yaw;
    forecast
        .iter()
        .map(|w| {
            yaw = optimize_yaw(turbine, w, yaw)?.yaw;
            Ok(yaw)
        })
        .collect()
}

/// Energy in Wh over a uniformly sampled series, each sample held for
/// `step_seconds`.
pub fn energy_over_horizon<C: PowerCoefficient>(
    turbine: &TurbineModel<C>,
    true_wind: &[WindVector],
    yaw: &[f64],
    step_seconds: f64,
) -> Result<f64> {
    if true_wind.is_empty() {
        return Err(Error::InvalidInput("empty wind series".into()));
    }
    if true_wind.len() != yaw.len() {
        return Err(Error::InvalidInput(format!("{} wind samples but {} yaw set-points", true_wind.len(), yaw.len())));
    }
    let joules: f64 = true_wind
        .iter()
        .zip(yaw)
        .map(|(w, &y)| realized_power(turbine, w, y).map(|p| p * step_seconds))
        .sum::<Result<f64>>()?;
    Ok(joules / 3600.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use crate::wind::{wind_vector, CpModel, TurbineSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn turbine(cp: f64) -> TurbineModel {
        TurbineModel::new(TurbineSpec::sg_8_0_167("T1", Vec2::ZERO), CpModel::Constant { value: cp }, 8.1)
    }

    #[test]
    fn below_rated_points_at_wind() {
        let t = turbine(0.45);
        let w = wind_vector(8.0, 0.3).unwrap();
        let d = optimize_yaw(&t, &w, 2.0).unwrap();
        assert!((d.yaw - w.polar_direction().unwrap()).abs() < 1e-12);
        assert_eq!(d.turbine_id, "T1");
        assert!((d.predicted_power - t.power(8.0)).abs() < 1e-6);
    }

    #[test]
    fn above_rated_keeps_yaw() {
        let t = turbine(0.45);
        let w = wind_vector(14.0, 0.3).unwrap();
        let d = optimize_yaw(&t, &w, 2.0).unwrap();
        assert_eq!(d.yaw, 2.0);
    }

    #[test]
    fn calm_keeps_yaw() {
        let d = optimize_yaw(&turbine(0.45), &WindVector::CALM, 1.25).unwrap();
        assert_eq!(d.yaw, 1.25);
        assert_eq!(d.predicted_power, 0.0);
    }

    #[test]
    fn misalignment_follows_cos_cubed() {
        let t = turbine(0.45);
        let w = WindVector::new(9.0, 0.0);
        let aligned = realized_power(&t, &w, 0.0).unwrap();
        let off = realized_power(&t, &w, 6f64.to_radians()).unwrap();
        assert!((off / aligned - 6f64.to_radians().cos().powi(3)).abs() < 1e-12);
        assert_eq!(realized_power(&t, &w, FRAC_PI_2 + 1e-9).unwrap(), 0.0);
        assert_eq!(realized_power(&t, &w, PI).unwrap(), 0.0);
    }

    #[test]
    fn aligned_yaw_maximises_realized_power_on_fine_grid() {
        let t = turbine(0.45);
        let w = wind_vector(9.5, 4.0).unwrap();
        let best_dir = w.polar_direction().unwrap();
        let best = realized_power(&t, &w, best_dir).unwrap();
        let mut prev = best;
        // Walk away from the wind direction in 0.1° steps up to 90°.
        for i in 0..=900 {
            let delta = (i as f64 * 0.1).to_radians();
            let p = realized_power(&t, &w, best_dir + delta).unwrap();
            assert!(p <= best + 1e-9);
            assert!(p <= prev + 1e-9);
            prev = p;
        }
        for i in 0..3600 {
            let p = realized_power(&t, &w, (i as f64 * 0.1).to_radians()).unwrap();
            assert!(p <= best + 1e-9);
        }
    }

    #[test]
    fn hour_of_constant_wind_closed_form() {
        let t = turbine(0.45);
        let series = vec![WindVector::new(10.0, 0.0); 12];
        let yaws = yaw_schedule(&t, &series, 1.0).unwrap();
        let wh = energy_over_horizon(&t, &series, &yaws, 300.0).unwrap();
        let expected = 0.5 * 1.065 * 21_900.0 * 1000.0 * 0.45;
        assert!((wh - expected).abs() < 1e-6);
        let calm = vec![WindVector::CALM; 12];
        assert_eq!(energy_over_horizon(&t, &calm, &[0.0; 12], 300.0).unwrap(), 0.0);
        assert!(energy_over_horizon(&t, &[], &[], 300.0).is_err());
        assert!(energy_over_horizon(&t, &series, &[0.0], 300.0).is_err());
    }

    #[test]
    fn oracle_forecast_beats_perturbed_forecasts() {
        let t = turbine(0.45);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let truth: Vec<WindVector> = (0..48)
                .map(|_| wind_vector(rng.random_range(2.0..11.0), rng.random_range(0.0..TAU)).unwrap())
                .collect();
            let perturbed: Vec<WindVector> = truth
                .iter()
                .map(|w| {
                    let dir = w.met_direction().unwrap() + rng.random_range(-0.6..0.6);
                    wind_vector(w.speed(), dir).unwrap()
                })
                .collect();
            let ideal = energy_over_horizon(&t, &truth, &yaw_schedule(&t, &truth, 0.0).unwrap(), 300.0).unwrap();
            let noisy = energy_over_horizon(&t, &truth, &yaw_schedule(&t, &perturbed, 0.0).unwrap(), 300.0).unwrap();
            assert!(ideal >= noisy - 1e-9);
            assert!(ideal <= t.spec.rated_power * 48.0 * 300.0 / 3600.0);
        }
    }
}
