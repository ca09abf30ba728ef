use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, SecondsFormat, Utc};
use log::{info, warn};
use serde::Serialize;
use windfarm_core::data::{load_csv, make_windows, synthetic, write_csv, Channel, ForecastConfig, WindSeries};
use windfarm_core::forecast::codec::weight_storage;
use windfarm_core::forecast::{encode_model, quantization_table, train_model, Metrics, ResolutionModels, SavedModel};
use windfarm_core::pipeline::{
    daily_energy, power_trace, simulate as run_simulation, window_energy, yaw_schedules, DayEnergy, HourStep,
    Simulation, SourceEnergy, WindForecaster, WindTracks,
};
use windfarm_core::routing::{plan_inspection, Move, PlannerConfig, RoutePlan};
use windfarm_core::{Error as CoreError, WindVector};

use crate::config::RunConfig;
use crate::report::{emit, fixed, percent, Csv, Table};

const PER_HOUR: usize = 12;
/// Widths reported in the quantization table; 32 is the float model.
const TABLE_WIDTHS: [u8; 5] = [32, 16, 8, 4, 2];
const CHANNELS: [Channel; 2] = [Channel::Speed, Channel::Direction];

fn channel_name(c: Channel) -> &'static str {
    match c {
        Channel::Speed => "speed",
        Channel::Direction => "direction",
        Channel::DirectionSinCos => "direction_sincos",
        Channel::Joint => "joint",
    }
}

fn stamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn met_deg(w: &WindVector) -> String {
    w.met_direction().map_or_else(String::new, |d| fixed(d.to_degrees(), 2))
}

fn load_series(cfg: &RunConfig) -> Result<WindSeries> {
    let path = cfg.data_path()?;
    let loaded = load_csv(path, &cfg.csv_schema).with_context(|| format!("loading {}", path.display()))?;
    for w in &loaded.warnings {
        warn!("{w}");
    }
    if loaded.interpolated > 0 {
        info!("filled {} missing samples by interpolation", loaded.interpolated);
    }
    let series = loaded.longest().context("data file has no usable samples")?;
    if series.resolution_s() != synthetic::STEP_S {
        bail!("expected 5-minute data, found a {} s step", series.resolution_s());
    }
    info!("{} samples from {}", series.len(), path.display());
    Ok(series)
}

fn channel_config(cfg: &RunConfig, channel: Channel) -> ForecastConfig {
    ForecastConfig { channel, ..cfg.forecast.clone() }
}

/// Speed and direction forecasters with the 5-minute models at the
/// configured bit width.
fn deployed_forecaster(series: &WindSeries, cfg: &RunConfig) -> Result<WindForecaster> {
    let quant = cfg.quant();
    let mut models = Vec::with_capacity(2);
    for channel in CHANNELS {
        info!("training {} forecasters ({} bit)", channel_name(channel), cfg.bits);
        let fc = channel_config(cfg, channel);
        let ds = make_windows(series, &fc)?;
        let fine = train_model(&ds, &cfg.training, quant.as_ref())?;
        models.push(ResolutionModels::with_fine(series, &fc, &cfg.training, fine)?);
    }
    let direction = models.pop().expect("two channels");
    let speed = models.pop().expect("two channels");
    Ok(WindForecaster { speed, direction })
}

fn tracks_csv(path: &Path, tracks: &WindTracks) -> Result<()> {
    let mut csv = Csv::new(
        path.to_path_buf(),
        &[
            "timestamp",
            "true_speed",
            "remote_speed",
            "hourly_speed",
            "true_dir_deg",
            "remote_dir_deg",
            "hourly_dir_deg",
        ],
    );
    for k in 0..tracks.len() {
        let (t, r, h) = (&tracks.truth[k], &tracks.remote[k], &tracks.hour_ahead[k]);
        csv.row(&[
            stamp(tracks.timestamps[k]),
            fixed(t.speed(), 3),
            fixed(r.speed(), 3),
            fixed(h.speed(), 3),
            met_deg(t),
            met_deg(r),
            met_deg(h),
        ]);
    }
    csv.finish()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ResolutionRow {
    channel: &'static str,
    /// Physical units: m/s for speed, degrees for direction.
    five_minute: Metrics,
    hourly: Metrics,
    persistence: Metrics,
    reduction: f64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct QuantizationRow {
    channel: &'static str,
    bits: u8,
    mae: f64,
    rmse: f64,
    weight_bytes: usize,
}

#[derive(Debug, Serialize)]
struct ForecastReport {
    seed: u64,
    samples: usize,
    split: usize,
    resolution: Vec<ResolutionRow>,
    quantization: Vec<QuantizationRow>,
}

fn scaled(m: Metrics, span: f64) -> Metrics {
    Metrics { mae: m.mae * span, rmse: m.rmse * span, n: m.n }
}

pub fn forecast(cfg: &RunConfig) -> Result<()> {
    let series = load_series(cfg)?;
    let out = cfg.output_dir();
    let model_dir = cfg.model_dir();
    let mut resolution = Vec::new();
    let mut quantization = Vec::new();
    let mut split = 0;
    let mut pairs = Vec::new();
    for channel in CHANNELS {
        let name = channel_name(channel);
        let fc = channel_config(cfg, channel);
        let ds = make_windows(&series, &fc)?;
        split = ds.split;
        let span = ds.norms[0].span();
        info!("{name}: quantization sweep over {:?} bits", TABLE_WIDTHS);
        let rows = quantization_table(&ds, &cfg.training, &TABLE_WIDTHS)?;
        for (model, row) in &rows {
            let saved = SavedModel { model: model.clone(), channel, norms: ds.norms.clone() };
            crate::report::write(&model_dir.join(format!("{name}_{}bit.wfm", row.bits)), &encode_model(&saved))?;
            quantization.push(QuantizationRow {
                channel: name,
                bits: row.bits,
                mae: row.mae * span,
                rmse: row.rmse * span,
                weight_bytes: weight_storage(model).iter().map(|s| s.header_bytes + s.payload_bytes).sum(),
            });
        }
        info!("{name}: hourly model");
        let float = rows.into_iter().next().map(|(m, _)| m).context("float model missing")?;
        let models = ResolutionModels::with_fine(&series, &fc, &cfg.training, float)?;
        let r = models.compare(&series)?;
        resolution.push(ResolutionRow {
            channel: name,
            five_minute: scaled(r.five_minute, span),
            hourly: scaled(r.hourly, span),
            persistence: scaled(r.persistence, span),
            reduction: r.reduction,
            points: r.points,
        });
        pairs.push(models);
    }
    let direction = pairs.pop().expect("two channels");
    let speed = pairs.pop().expect("two channels");
    let tracks = WindForecaster { speed, direction }.held_out_tracks(&series)?;
    tracks_csv(&out.join("forecast_tracks.csv"), &tracks)?;

    let mut t1 = Table::new(
        "Forecast accuracy by input resolution (float models, speed m/s, direction deg)",
        &["input", "speed MAE", "speed RMSE", "dir MAE", "dir RMSE"],
    );
    let (s, d) = (&resolution[0], &resolution[1]);
    for (label, a, b) in [
        ("5-minute", s.five_minute, d.five_minute),
        ("hourly", s.hourly, d.hourly),
        ("persistence", s.persistence, d.persistence),
    ] {
        t1.row(vec![label.into(), fixed(a.mae, 4), fixed(a.rmse, 4), fixed(b.mae, 4), fixed(b.rmse, 4)]);
    }
    t1.row(vec!["MAE reduction".into(), percent(s.reduction), String::new(), percent(d.reduction), String::new()]);

    let mut t2 = Table::new(
        "Forecast accuracy by weight bit width (5-minute input)",
        &["bits", "speed MAE", "speed RMSE", "dir MAE", "dir RMSE", "weight bytes"],
    );
    let n = TABLE_WIDTHS.len();
    for (a, b) in quantization[..n].iter().zip(&quantization[n..]) {
        let label = if a.bits == 32 { "float32".to_string() } else { a.bits.to_string() };
        t2.row(vec![
            label,
            fixed(a.mae, 4),
            fixed(a.rmse, 4),
            fixed(b.mae, 4),
            fixed(b.rmse, 4),
            a.weight_bytes.to_string(),
        ]);
    }
    let text = format!("{}\n{}", t1.render(), t2.render());
    let doc = ForecastReport { seed: cfg.seed, samples: series.len(), split, resolution, quantization };
    emit(&out, "forecast_report", &doc, &text)
}

#[derive(Debug, Serialize)]
struct YawReport {
    seed: u64,
    bits: u8,
    /// First timestamp of the reported hour.
    hour_start: String,
    hour: Vec<SourceEnergy>,
    days: Vec<DayEnergy>,
    /// Wh per source over the whole held-out span.
    total_wh: [f64; 3],
}

pub fn yaw(cfg: &RunConfig) -> Result<()> {
    let series = load_series(cfg)?;
    let out = cfg.output_dir();
    let tracks = deployed_forecaster(&series, cfg)?.held_out_tracks(&series)?;
    let turbine = cfg.yaw_turbine();
    let hours = tracks.len() / PER_HOUR;
    if cfg.yaw.hour >= hours {
        bail!("yaw.hour {} is outside the {hours} held-out hours", cfg.yaw.hour);
    }
    let from = cfg.yaw.hour * PER_HOUR;
    let hour = window_energy(&turbine, &tracks, from, PER_HOUR)?;
    let days = daily_energy(&turbine, &tracks)?;
    let schedules = yaw_schedules(&turbine, &tracks)?;
    let powers =
        schedules.iter().map(|y| power_trace(&turbine, &tracks, y)).collect::<windfarm_core::Result<Vec<_>>>()?;

    let mut csv = Csv::new(
        out.join("yaw_power.csv"),
        &[
            "timestamp",
            "true_speed",
            "true_dir_deg",
            "yaw_true_deg",
            "yaw_remote_deg",
            "yaw_hour_ahead_deg",
            "power_true_kw",
            "power_remote_kw",
            "power_hour_ahead_kw",
        ],
    );
    for k in 0..tracks.len() {
        let w = &tracks.truth[k];
        let mut row = vec![stamp(tracks.timestamps[k]), fixed(w.speed(), 3), met_deg(w)];
        row.extend(schedules.iter().map(|y| fixed(y[k].to_degrees(), 2)));
        row.extend(powers.iter().map(|p| fixed(p[k] / 1e3, 3)));
        csv.row(&row);
    }
    csv.finish()?;

    let hour_start = stamp(tracks.timestamps[from]);
    let mut t1 = Table::new(
        format!("Yaw and energy over the hour from {hour_start}"),
        &["wind input", "yaw (deg)", "energy (kWh)"],
    );
    for e in &hour {
        t1.row(vec![e.source.label().into(), fixed(e.yaw_deg, 2), fixed(e.energy_wh / 1e3, 3)]);
    }
    let mut t2 = Table::new("Daily energy (MWh)", &["date", "true wind", "remote sensing", "hour ahead"]);
    for d in &days {
        t2.row(vec![
            d.date.to_string(),
            fixed(d.true_wh / 1e6, 4),
            fixed(d.remote_wh / 1e6, 4),
            fixed(d.hour_ahead_wh / 1e6, 4),
        ]);
    }
    let total_wh: [f64; 3] = std::array::from_fn(|i| powers[i].iter().sum::<f64>() * 300.0 / 3600.0);
    t2.row(vec![
        "held-out total".into(),
        fixed(total_wh[0] / 1e6, 4),
        fixed(total_wh[1] / 1e6, 4),
        fixed(total_wh[2] / 1e6, 4),
    ]);
    let text = format!("{}\n{}", t1.render(), t2.render());
    let doc = YawReport { seed: cfg.seed, bits: cfg.bits, hour_start, hour, days, total_wh };
    emit(&out, "yaw_report", &doc, &text)
}

#[derive(Debug, Serialize)]
struct RouteReport {
    wind_speed: f64,
    wind_direction_deg: f64,
    /// s; absent when the baseline cannot be flown.
    baseline_time: Option<f64>,
    baseline_note: Option<String>,
    wind_aware_time: f64,
    /// `(baseline - wind_aware) / baseline`
    reduction: Option<f64>,
    moves: Vec<Move>,
}

fn plan_rows(table: &mut Table, csv: &mut Csv, label: &str, plan: &RoutePlan) {
    for p in &plan.uavs {
        for (k, (path, r)) in p.paths().iter().zip(&p.routes).enumerate() {
            table.row(vec![label.into(), p.uav.clone(), (k + 1).to_string(), path.clone(), fixed(r.time, 1)]);
            csv.row(&[label.into(), p.uav.clone(), (k + 1).to_string(), path.clone(), fixed(r.time, 3)]);
        }
    }
    table.row(vec![label.into(), "total".into(), String::new(), String::new(), fixed(plan.total_time, 1)]);
}

pub fn route(cfg: &RunConfig) -> Result<()> {
    let out = cfg.output_dir();
    let scenario = cfg.scenario()?;
    let wind = scenario.wind()?;
    let baseline_cfg = PlannerConfig { reassign: false, ..cfg.planner.clone() };
    let aware_cfg = PlannerConfig { reassign: true, ..cfg.planner.clone() };
    let baseline = match plan_inspection(&scenario.uavs, &scenario.turbines, &scenario.assignment, &wind, &baseline_cfg)
    {
        Ok(p) => Ok(p),
        Err(
            e @ (CoreError::InfeasibleTurbine { .. } | CoreError::InfeasibleTour | CoreError::LegInfeasible { .. }),
        ) => Err(e.to_string()),
        Err(e) => return Err(e.into()),
    };
    let aware = plan_inspection(&scenario.uavs, &scenario.turbines, &scenario.assignment, &wind, &aware_cfg)
        .context("wind-aware plan")?;

    let mut table = Table::new(
        format!("Inspection plans, wind {:.1} m/s from {:.0} deg", scenario.wind_speed, scenario.wind_direction_deg),
        &["plan", "uav", "route", "path", "time (s)"],
    );
    let mut csv = Csv::new(out.join("routes.csv"), &["plan", "uav", "route", "path", "time_s"]);
    match &baseline {
        Ok(p) => {
            plan_rows(&mut table, &mut csv, "baseline", p);
            crate::report::write(&out.join("plan_baseline.json"), (p.to_json()? + "\n").as_bytes())?;
        }
        Err(note) => {
            table.row(vec!["baseline".into(), "infeasible".into(), String::new(), note.clone(), String::new()]);
        }
    }
    plan_rows(&mut table, &mut csv, "wind-aware", &aware);
    crate::report::write(&out.join("plan_wind_aware.json"), (aware.to_json()? + "\n").as_bytes())?;
    csv.finish()?;

    let baseline_time = baseline.as_ref().ok().map(|p| p.total_time);
    let reduction = baseline_time.filter(|&b| b > 0.0).map(|b| (b - aware.total_time) / b);
    let mut text = table.render();
    for m in &aware.moves {
        text.push_str(&format!("reassigned {} from {} to {}\n", m.turbine, m.from, m.to));
    }
    text.push_str(&format!("inspection time reduction: {}\n", reduction.map_or_else(|| "n/a".into(), percent)));
    let doc = RouteReport {
        wind_speed: scenario.wind_speed,
        wind_direction_deg: scenario.wind_direction_deg,
        baseline_time,
        baseline_note: baseline.err(),
        wind_aware_time: aware.total_time,
        reduction,
        moves: aware.moves.clone(),
    };
    emit(&out, "route_report", &doc, &text)
}

#[derive(Debug, Serialize)]
struct SimulateReport<'a> {
    seed: u64,
    bits: u8,
    turbines: usize,
    uavs: usize,
    #[serde(flatten)]
    simulation: &'a Simulation,
}

fn minutes(t: Option<f64>) -> String {
    t.map_or_else(|| "-".into(), |s| fixed(s / 60.0, 1))
}

fn hours_csv(path: &Path, hours: &[HourStep]) -> Result<()> {
    let mut csv = Csv::new(
        path.to_path_buf(),
        &[
            "timestamp",
            "true_speed",
            "forecast_speed",
            "energy_wh",
            "oracle_energy_wh",
            "planned_time_s",
            "flown_time_s",
            "routes",
            "over_budget",
        ],
    );
    for h in hours {
        csv.row(&[
            stamp(h.timestamp),
            fixed(h.true_speed, 3),
            fixed(h.forecast_speed, 3),
            fixed(h.energy_wh, 1),
            fixed(h.oracle_energy_wh, 1),
            h.planned_time.map_or_else(String::new, |t| fixed(t, 3)),
            h.flown_time.map_or_else(String::new, |t| fixed(t, 3)),
            h.routes.to_string(),
            h.over_budget.to_string(),
        ]);
    }
    csv.finish()?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<()> {
    let series = load_series(cfg)?;
    let out = cfg.output_dir();
    let scenario = cfg.scenario()?;
    let forecaster = deployed_forecaster(&series, cfg)?;
    let from = forecaster.first_origin();
    let to = match cfg.simulate.hours {
        Some(h) => (from + h * PER_HOUR).min(series.len()),
        None => series.len(),
    };
    if to <= from {
        bail!("no held-out span to simulate");
    }
    let tracks = forecaster.tracks(&series, from, to)?;
    let turbines: Vec<_> = scenario.turbines.iter().map(|t| cfg.turbine.model(t.clone())).collect();
    let sim = run_simulation(&tracks, &turbines, &scenario.uavs, &scenario.assignment, &cfg.planner)?;
    hours_csv(&out.join("simulate_hours.csv"), &sim.hours)?;

    let mut table = Table::new(
        format!("Rolling simulation, {} turbines, {} UAVs", turbines.len(), scenario.uavs.len()),
        &[
            "hour",
            "wind (m/s)",
            "forecast (m/s)",
            "energy (MWh)",
            "oracle (MWh)",
            "planned (min)",
            "flown (min)",
            "routes",
        ],
    );
    for h in &sim.hours {
        table.row(vec![
            stamp(h.timestamp),
            fixed(h.true_speed, 2),
            fixed(h.forecast_speed, 2),
            fixed(h.energy_wh / 1e6, 4),
            fixed(h.oracle_energy_wh / 1e6, 4),
            minutes(h.planned_time),
            minutes(h.flown_time),
            h.routes.to_string(),
        ]);
    }
    table.row(vec![
        "total".into(),
        String::new(),
        String::new(),
        fixed(sim.energy_wh / 1e6, 4),
        fixed(sim.oracle_energy_wh / 1e6, 4),
        fixed(sim.planned_time / 60.0, 1),
        fixed(sim.flown_time / 60.0, 1),
        String::new(),
    ]);
    let mut text = table.render();
    for h in sim.hours.iter().filter(|h| h.note.is_some()) {
        text.push_str(&format!("{}: {}\n", stamp(h.timestamp), h.note.as_deref().unwrap_or_default()));
    }
    text.push_str(&format!(
        "yaw capture {} of oracle, {} grounded hours\n",
        percent(sim.energy_wh / sim.oracle_energy_wh),
        sim.grounded_hours
    ));
    let doc = SimulateReport {
        seed: cfg.seed,
        bits: cfg.bits,
        turbines: turbines.len(),
        uavs: scenario.uavs.len(),
        simulation: &sim,
    };
    emit(&out, "simulate_report", &doc, &text)
}

pub fn synth(days: usize, seed: u64, output: &Path) -> Result<()> {
    if days == 0 {
        bail!("--days must be positive");
    }
    let series = synthetic::generate(days, seed);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    write_csv(&series, output)?;
    info!("wrote {} samples to {}", series.len(), output.display());
    Ok(())
}
