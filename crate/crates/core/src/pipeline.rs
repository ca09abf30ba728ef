//! End-to-end wiring: wind forecasts drive yaw control and inspection
//! routing, scored against the measured wind.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::data::{circular_mean, Channel, ForecastConfig, WindSeries};
use crate::error::{Error, Result};
use crate::forecast::{ResolutionModels, TrainConfig};
use crate::kinematics::UavSpec;
use crate::routing::{plan_inspection, replay_plan, Assignment, PlannerConfig};
use crate::wind::{normalize_angle, wind_vector, PowerCoefficient, TurbineModel, TurbineSpec, WindVector};
use crate::yaw::{energy_over_horizon, realized_power, yaw_schedule};

const STEP_S: f64 = 300.0;
const PER_HOUR: usize = 12;
const PER_DAY: usize = 288;

/// Where a yaw controller gets its wind from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindSource {
    /// Measured wind, as if known in advance.
    True,
    /// 5-minute model, as fed by on-site sensing.
    RemoteSensing,
    /// Hourly model.
    HourAhead,
}

impl WindSource {
    pub const ALL: [WindSource; 3] = [WindSource::True, WindSource::RemoteSensing, WindSource::HourAhead];

    pub fn label(self) -> &'static str {
        match self {
            WindSource::True => "true wind",
            WindSource::RemoteSensing => "remote sensing",
            WindSource::HourAhead => "hour ahead",
        }
    }
}

/// Separate speed and direction models at both resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct WindForecaster {
    pub speed: ResolutionModels,
    pub direction: ResolutionModels,
}

/// Measured and forecast wind over a span of 5-minute steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindTracks {
    /// Series index of the first step.
    pub start: usize,
    pub timestamps: Vec<DateTime<Utc>>,
    pub truth: Vec<WindVector>,
    pub remote: Vec<WindVector>,
    pub hour_ahead: Vec<WindVector>,
}

impl WindTracks {
    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    pub fn source(&self, s: WindSource) -> &[WindVector] {
        match s {
            WindSource::True => &self.truth,
            WindSource::RemoteSensing => &self.remote,
            WindSource::HourAhead => &self.hour_ahead,
        }
    }
}

fn to_winds(speed: &ResolutionModels, direction: &ResolutionModels, s: &[f64], d: &[f64]) -> Result<Vec<WindVector>> {
    s.iter()
        .zip(d)
        .map(|(&s, &d)| {
            let speed = speed.norms[0].denormalize(s).max(0.0);
            let met = normalize_angle(direction.norms[0].denormalize(d).to_radians());
            wind_vector(speed, met)
        })
        .collect()
}

impl WindForecaster {
    pub fn train(series: &WindSeries, config: &ForecastConfig, train_config: &TrainConfig) -> Result<Self> {
        let speed = ResolutionModels::train(
            series,
            &ForecastConfig { channel: Channel::Speed, ..config.clone() },
            train_config,
        )?;
        let direction = ResolutionModels::train(
            series,
            &ForecastConfig { channel: Channel::Direction, ..config.clone() },
            train_config,
        )?;
        Ok(Self { speed, direction })
    }

    pub fn first_origin(&self) -> usize {
        self.speed.first_origin().max(self.direction.first_origin())
    }

    /// Tracks over `[from, to)`; `from` must be hour-aligned and no earlier
    /// than [`Self::first_origin`].
    pub fn tracks(&self, series: &WindSeries, from: usize, to: usize) -> Result<WindTracks> {
        let (s_fine, s_coarse) = self.speed.tracks(series, from, to)?;
        let (d_fine, d_coarse) = self.direction.tracks(series, from, to)?;
        let samples = &series.samples()[from..to];
        Ok(WindTracks {
            start: from,
            timestamps: samples.iter().map(|s| s.timestamp).collect(),
            truth: samples.iter().map(|s| s.wind()).collect::<Result<_>>()?,
            remote: to_winds(&self.speed, &self.direction, &s_fine, &d_fine)?,
            hour_ahead: to_winds(&self.speed, &self.direction, &s_coarse, &d_coarse)?,
        })
    }

    /// Tracks over the whole held-out span.
    pub fn held_out_tracks(&self, series: &WindSeries) -> Result<WindTracks> {
        let from = self.first_origin();
        if from >= series.len() {
            return Err(Error::InvalidInput("series has no held-out span to forecast".into()));
        }
        self.tracks(series, from, series.len())
    }
}

/// Yaw set-points per source, all starting from the measured wind's
/// heading at the first step.
pub fn yaw_schedules<C: PowerCoefficient>(turbine: &TurbineModel<C>, tracks: &WindTracks) -> Result<[Vec<f64>; 3]> {
    let initial = tracks.truth.first().and_then(WindVector::polar_direction).unwrap_or(0.0);
    Ok([
        yaw_schedule(turbine, &tracks.truth, initial)?,
        yaw_schedule(turbine, &tracks.remote, initial)?,
        yaw_schedule(turbine, &tracks.hour_ahead, initial)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEnergy {
    pub source: WindSource,
    /// Circular mean of the commanded yaw, degrees.
    pub yaw_deg: f64,
    /// Wh
    pub energy_wh: f64,
}

/// Energy and mean yaw per source over `[from, from + len)` steps of the
/// tracks, with the schedules run over the whole track.
pub fn window_energy<C: PowerCoefficient>(
    turbine: &TurbineModel<C>,
    tracks: &WindTracks,
    from: usize,
    len: usize,
) -> Result<Vec<SourceEnergy>> {
    if len == 0 || from + len > tracks.len() {
        return Err(Error::InvalidInput(format!("window [{from}, {}) outside {} steps", from + len, tracks.len())));
    }
    let schedules = yaw_schedules(turbine, tracks)?;
    let truth = &tracks.truth[from..from + len];
    WindSource::ALL
        .iter()
        .zip(&schedules)
        .map(|(&source, yaw)| {
            let yaw = &yaw[from..from + len];
            Ok(SourceEnergy {
                source,
                yaw_deg: circular_mean(yaw).to_degrees(),
                energy_wh: energy_over_horizon(turbine, truth, yaw, STEP_S)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayEnergy {
    pub date: NaiveDate,
    /// Wh with yaw from each source, scored against the measured wind.
    pub true_wh: f64,
    pub remote_wh: f64,
    pub hour_ahead_wh: f64,
}

/// Energy per calendar day, over days fully covered by the tracks.
pub fn daily_energy<C: PowerCoefficient>(turbine: &TurbineModel<C>, tracks: &WindTracks) -> Result<Vec<DayEnergy>> {
    let schedules = yaw_schedules(turbine, tracks)?;
    let mut out = Vec::new();
    let mut k = 0;
    while k < tracks.len() {
        let date = tracks.timestamps[k].date_naive();
        let end = (k..tracks.len()).find(|&j| tracks.timestamps[j].date_naive() != date).unwrap_or(tracks.len());
        if end - k == PER_DAY {
            let e = |yaw: &[f64]| energy_over_horizon(turbine, &tracks.truth[k..end], &yaw[k..end], STEP_S);
            out.push(DayEnergy {
                date,
                true_wh: e(&schedules[0])?,
                remote_wh: e(&schedules[1])?,
                hour_ahead_wh: e(&schedules[2])?,
            });
        }
        k = end;
    }
    Ok(out)
}

/// One hour of the end-to-end simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourStep {
    pub timestamp: DateTime<Utc>,
    pub true_speed: f64,
    pub forecast_speed: f64,
    /// Energy over the hour with yaw from the 5-minute forecast, Wh.
    pub energy_wh: f64,
    /// Energy over the hour with yaw from the measured wind, Wh.
    pub oracle_energy_wh: f64,
    /// Planned under the forecast wind, s. `None` if the fleet is grounded.
    pub planned_time: Option<f64>,
    /// The same routes flown under the measured wind, s.
    pub flown_time: Option<f64>,
    pub routes: usize,
    /// Routes that overran t_max once flown under the measured wind.
    pub over_budget: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub hours: Vec<HourStep>,
    /// Wh summed over turbines and hours.
    pub energy_wh: f64,
    pub oracle_energy_wh: f64,
    /// s, over hours with a plan.
    pub planned_time: f64,
    pub flown_time: f64,
    pub grounded_hours: usize,
}

/// Rolls hour by hour over the tracks: every turbine yaws to the 5-minute
/// forecast, and the fleet plans an inspection under the forecast wind at
/// the top of the hour, then flies it under the measured wind.
pub fn simulate<C: PowerCoefficient>(
    tracks: &WindTracks,
    turbines: &[TurbineModel<C>],
    uavs: &[UavSpec],
    assignment: &Assignment,
    planner: &PlannerConfig,
) -> Result<Simulation> {
    let specs: Vec<TurbineSpec> = turbines.iter().map(|t| t.spec.clone()).collect();
    let schedules = turbines.iter().map(|t| yaw_schedules(t, tracks)).collect::<Result<Vec<_>>>()?;
    let mut hours = Vec::new();
    for k in (0..tracks.len()).step_by(PER_HOUR) {
        let end = (k + PER_HOUR).min(tracks.len());
        let truth = &tracks.truth[k..end];
        let mut energy = 0.0;
        let mut oracle = 0.0;
        for (t, s) in turbines.iter().zip(&schedules) {
            energy += energy_over_horizon(t, truth, &s[1][k..end], STEP_S)?;
            oracle += energy_over_horizon(t, truth, &s[0][k..end], STEP_S)?;
        }
        let (forecast, actual) = (tracks.remote[k], tracks.truth[k]);
        let mut step = HourStep {
            timestamp: tracks.timestamps[k],
            true_speed: actual.speed(),
            forecast_speed: forecast.speed(),
            energy_wh: energy,
            oracle_energy_wh: oracle,
            planned_time: None,
            flown_time: None,
            routes: 0,
            over_budget: 0,
            note: None,
        };
        match plan_inspection(uavs, &specs, assignment, &forecast, planner) {
            Ok(plan) => {
                step.planned_time = Some(plan.total_time);
                step.routes = plan.uavs.iter().map(|p| p.route_count()).sum();
                match replay_plan(&plan, uavs, &specs, &actual, planner) {
                    Ok(r) => {
                        step.flown_time = Some(r.total_time);
                        step.over_budget = r.over_budget;
                    }
                    Err(e @ (Error::WindExceedsResistance { .. } | Error::LegInfeasible { .. })) => {
                        step.note = Some(format!("not flyable under measured wind: {e}"));
                    }
                    Err(e) => return Err(e),
                }
            }
            Err(
                e @ (Error::WindExceedsResistance { .. }
                | Error::UnreachableTurbines(_)
                | Error::InfeasibleTurbine { .. }),
            ) => {
                step.note = Some(format!("grounded: {e}"));
            }
            Err(e) => return Err(e),
        }
        hours.push(step);
    }
    Ok(Simulation {
        energy_wh: hours.iter().map(|h| h.energy_wh).sum(),
        oracle_energy_wh: hours.iter().map(|h| h.oracle_energy_wh).sum(),
        planned_time: hours.iter().filter_map(|h| h.planned_time).sum(),
        flown_time: hours.iter().filter_map(|h| h.flown_time).sum(),
        grounded_hours: hours.iter().filter(|h| h.planned_time.is_none()).count(),
        hours,
    })
}

/// Realized power per step for one source; handy for plotting.
pub fn power_trace<C: PowerCoefficient>(
    turbine: &TurbineModel<C>,
    tracks: &WindTracks,
    yaw: &[f64],
) -> Result<Vec<f64>> {
    tracks.truth.iter().zip(yaw).map(|(w, &y)| realized_power(turbine, w, y)).collect()
}
