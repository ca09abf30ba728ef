//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::time::{Duration, Instant};

use itertools::Itertools;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windfarm_core::data::{load_csv, make_windows, Channel, CsvSchema, ForecastConfig, MinMax, WindSeries, Window};
use windfarm_core::forecast::codec::{payload_bytes, weight_storage};
use windfarm_core::forecast::{
    encode_model, loss_and_gradient, mae_loss, quantization_table, quantize_model, ForecastModel, LstmModel, LstmShape,
    QuantRow, QuantSpec, ResolutionModels, SavedModel, TrainConfig,
};
use windfarm_core::kinematics::{flight_time_with, ground_velocity_with};
use windfarm_core::pipeline::{daily_energy, WindForecaster};
use windfarm_core::routing::fixture::reference_scenario;
use windfarm_core::routing::{plan_inspection, solve_atsp_exact, PlannerConfig, TimeMatrix};
use windfarm_core::yaw::{energy_over_horizon, yaw_schedule};
use windfarm_core::{CpModel, GroundSpeedRule, TurbineModel, TurbineSpec, Vec2, WindVector};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/sample_wind_5min.csv");
const SEED: u64 = 42;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brute_force(m: &TimeMatrix) -> f64 {
    (1..m.len()).permutations(m.len() - 1).map(|order| m.tour_cost(&order)).fold(f64::INFINITY, f64::min)
}

fn atsp_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for n in 5..=8 {
        for _ in 0..100 {
            let rows = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(1.0..1000.0) }).collect())
                .collect();
            let m = TimeMatrix::from_unlabelled(rows).map_err(|e| e.to_string())?;
            let exact = solve_atsp_exact(&m, 16).map_err(|e| e.to_string())?;
            if exact.cost != brute_force(&m) || exact.cost != m.tour_cost(&exact.order) {
                mismatches += 1;
            }
        }
    }
    let t = start.elapsed();
    check(mismatches == 0 && t < Duration::from_secs(10), format!("400 matrices, {mismatches} mismatches, {t:.2?}"))
}

fn routing_scenario() -> Outcome {
    let start = Instant::now();
    let s = reference_scenario();
    let wind = s.wind().map_err(|e| e.to_string())?;
    let alg = plan_inspection(&s.uavs, &s.turbines, &s.assignment, &wind, &PlannerConfig::default())
        .map_err(|e| e.to_string())?;
    let base = plan_inspection(&s.uavs, &s.turbines, &s.assignment, &wind, &PlannerConfig::baseline())
        .map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let moved = alg.moves.iter().any(|m| m.turbine == "E105" && m.from == "UAV1" && m.to == "UAV2");
    let single = alg.uavs.iter().all(|p| p.route_count() == 1);
    let reduction = (base.total_time - alg.total_time) / base.total_time;
    let setup = s.wind_speed == 10.0
        && (s.wind_direction_deg.to_radians() - FRAC_PI_2).abs() < 1e-12
        && s.uavs.iter().all(|u| u.t_max == 1080.0 && u.u_max == 16.0);
    check(
        setup && moved && single && reduction >= 0.15 && t < Duration::from_secs(1),
        format!("E105 moved {moved}, one route each {single}, reduction {:.1}%, {t:.2?}", 100.0 * reduction),
    )
}

struct ForecastRun {
    series: WindSeries,
    /// Quantization rows per channel, float first.
    rows: Vec<(Channel, Vec<QuantRow>)>,
    resolution: Vec<(Channel, ResolutionModels)>,
    elapsed: Duration,
}

fn forecast_run() -> Result<ForecastRun, String> {
    let series = load_csv(SAMPLE, &CsvSchema::default())
        .map_err(|e| e.to_string())?
        .longest()
        .ok_or("bundled data has no samples")?;
    let train = TrainConfig { seed: SEED, ..TrainConfig::default() };
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut resolution = Vec::new();
    for channel in [Channel::Speed, Channel::Direction] {
        let fc = ForecastConfig { channel, ..ForecastConfig::default() };
        let ds = make_windows(&series, &fc).map_err(|e| e.to_string())?;
        let table = quantization_table(&ds, &train, &[32, 4, 2]).map_err(|e| e.to_string())?;
        let (models, r): (Vec<_>, Vec<_>) = table.into_iter().unzip();
        let float = models.into_iter().next().ok_or("no float model")?;
        let pair = ResolutionModels::with_fine(&series, &fc, &train, float).map_err(|e| e.to_string())?;
        rows.push((channel, r));
        resolution.push((channel, pair));
    }
    Ok(ForecastRun { series, rows, resolution, elapsed: start.elapsed() })
}

fn yaw_energy(run: &Result<ForecastRun, String>) -> Outcome {
    let turbine = TurbineModel::new(TurbineSpec::sg_8_0_167("T", Vec2::ZERO), CpModel::default(), 8.1);
    let truth = vec![WindVector::new(9.0, 0.0); 12];
    let off = vec![WindVector::from_met(9.0, (270.0f64 - 6.0).to_radians()).map_err(|e| e.to_string())?; 12];
    let energy = |forecast: &[WindVector]| -> Result<f64, String> {
        let yaw = yaw_schedule(&turbine, forecast, 0.0).map_err(|e| e.to_string())?;
        energy_over_horizon(&turbine, &truth, &yaw, 300.0).map_err(|e| e.to_string())
    };
    let ratio = energy(&off)? / energy(&truth)?;
    let cos3 = 6f64.to_radians().cos().powi(3);
    let misalign_ok = (ratio / cos3 - 1.0).abs() <= 0.02;

    let run = run.as_ref().map_err(Clone::clone)?;
    let mut pairs = run.resolution.iter().map(|(_, m)| m.clone());
    let forecaster =
        WindForecaster { speed: pairs.next().ok_or("no speed")?, direction: pairs.next().ok_or("no direction")? };
    let tracks = forecaster.held_out_tracks(&run.series).map_err(|e| e.to_string())?;
    let days = daily_energy(&turbine, &tracks).map_err(|e| e.to_string())?;
    let bad: Vec<String> = days
        .iter()
        .filter(|d| !(d.true_wh >= d.remote_wh && d.remote_wh >= d.hour_ahead_wh))
        .map(|d| {
            format!("{} ({:.3}/{:.3}/{:.3} MWh)", d.date, d.true_wh / 1e6, d.remote_wh / 1e6, d.hour_ahead_wh / 1e6)
        })
        .collect();
    check(
        misalign_ok && !days.is_empty() && bad.is_empty(),
        format!(
            "6 deg ratio {ratio:.5} vs cos^3 {cos3:.5}; ordering held on {}/{} days{}",
            days.len() - bad.len(),
            days.len(),
            if bad.is_empty() { String::new() } else { format!(", violated on {}", bad.join(", ")) }
        ),
    )
}

fn quantization_fidelity(run: &Result<ForecastRun, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let mut ok = run.elapsed < Duration::from_secs(600);
    let mut parts = Vec::new();
    for (channel, rows) in &run.rows {
        let mae = |bits: u8| rows.iter().find(|r| r.bits == bits).map(|r| r.mae).unwrap_or(f64::NAN);
        let (f, q4, q2) = (mae(32), mae(4), mae(2));
        ok &= q4 <= 1.15 * f && q2.is_finite() && q2 <= 2.0 * f;
        parts.push(format!("{channel:?} float {f:.4} 4-bit {q4:.4} ({:.3}x) 2-bit {q2:.4} ({:.3}x)", q4 / f, q2 / f));
    }
    check(ok, format!("{}; training {:.0?}", parts.join("; "), run.elapsed))
}

fn resolution_benefit(run: &Result<ForecastRun, String>) -> Outcome {
    let run = run.as_ref().map_err(Clone::clone)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (channel, models) in &run.resolution {
        let r = models.compare(&run.series).map_err(|e| e.to_string())?;
        ok &= r.five_minute.mae < r.hourly.mae && r.reduction >= 0.20;
        parts.push(format!(
            "{channel:?} 5-min {:.4} hourly {:.4} reduction {:.1}% over {} origins",
            r.five_minute.mae,
            r.hourly.mae,
            100.0 * r.reduction,
            r.points
        ));
    }
    check(ok, parts.join("; "))
}

fn storage() -> Outcome {
    let shape = LstmShape { input_size: 1, hidden_size: 32, output_size: 8, input_len: 24 };
    let model = LstmModel::random(shape, SEED);
    let quant = ForecastModel::Quantized(quantize_model(&model, &QuantSpec::uniform(4)).map_err(|e| e.to_string())?);
    let float = ForecastModel::Float(model);
    let (fs, qs) = (weight_storage(&float), weight_storage(&quant));
    let mut ok = fs.len() == qs.len();
    for (f, q) in fs.iter().zip(&qs) {
        ok &= f.payload_bytes == 4 * f.entries
            && q.payload_bytes == payload_bytes(4, q.entries)
            && q.payload_bytes + q.header_bytes <= f.payload_bytes / 8 + 64;
    }
    let f_total: usize = fs.iter().map(|s| s.payload_bytes).sum();
    let q_total: usize = qs.iter().map(|s| s.payload_bytes).sum();
    let q_with_headers: usize = qs.iter().map(|s| s.payload_bytes + s.header_bytes).sum();
    ok &= q_with_headers <= f_total / 8 + 64 * qs.len();
    // The container adds nothing beyond the accounted sections.
    let saved = |model| SavedModel { model, channel: Channel::Speed, norms: vec![MinMax { min: 0.0, max: 1.0 }] };
    let (fb, qb) = (encode_model(&saved(float)).len(), encode_model(&saved(quant)).len());
    let f_sec: usize = fs.iter().map(|s| s.payload_bytes + s.header_bytes).sum();
    ok &= fb - f_sec == qb - q_with_headers;
    check(
        ok,
        format!(
            "{} matrices: float32 payload {f_total} B, 4-bit payload {q_total} B ({:.4} of float), file {fb} B vs {qb} B",
            qs.len(),
            q_total as f64 / f_total as f64
        ),
    )
}

fn kinematics_suite() -> Outcome {
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 1000, failure_persistence: None, ..Config::default() },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let point = || (-5000.0f64..5000.0, -5000.0f64..5000.0).prop_map(|(x, y)| Vec2::new(x, y));
    let u_max = 16.0;
    let mut failures = Vec::new();

    let closure = runner.run(&(point(), point(), 0.0f64..15.0, 0.0f64..TAU), |(a, b, ws, dir)| {
        prop_assume!(a.distance(b) > 1.0);
        let w = WindVector::from_met(ws, dir).unwrap();
        for rule in [GroundSpeedRule::Capped, GroundSpeedRule::Piecewise] {
            let tri = ground_velocity_with(rule, a, b, &w, u_max).unwrap();
            let gap = tri.air_velocity + w.as_vec2() - tri.ground_velocity;
            prop_assert!(gap.norm() <= 1e-9);
            let along = (b - a).heading();
            prop_assert!((Vec2::from_polar(1.0, along).dot(tri.ground_velocity) - tri.ground_speed()).abs() <= 1e-9);
        }
        Ok(())
    });
    failures.extend(closure.err().map(|e| format!("closure: {e}")));

    let caps = runner.run(&(point(), point(), 0.0f64..15.0, 0.0f64..TAU), |(a, b, ws, dir)| {
        prop_assume!(a.distance(b) > 1.0);
        let w = WindVector::from_met(ws, dir).unwrap();
        let tri = ground_velocity_with(GroundSpeedRule::Capped, a, b, &w, u_max).unwrap();
        prop_assert!(tri.ground_speed() <= u_max + 1e-9);
        prop_assert!(tri.airspeed() <= u_max + 1e-9);
        prop_assert!(tri.ground_speed() > 0.0);
        Ok(())
    });
    failures.extend(caps.err().map(|e| format!("caps: {e}")));

    let symmetry = runner.run(&(point(), point()), |(a, b)| {
        prop_assume!(a.distance(b) > 1.0);
        for rule in [GroundSpeedRule::Capped, GroundSpeedRule::Piecewise] {
            let there = flight_time_with(rule, a, b, &WindVector::CALM, u_max).unwrap();
            let back = flight_time_with(rule, b, a, &WindVector::CALM, u_max).unwrap();
            prop_assert!((there - back).abs() <= 1e-9 * there);
            prop_assert!((there - a.distance(b) / u_max).abs() <= 1e-9 * there);
        }
        Ok(())
    });
    failures.extend(symmetry.err().map(|e| format!("symmetry: {e}")));

    let headwind = runner.run(&(point(), point(), 0.0f64..14.0, 0.01f64..1.0), |(a, b, lo, step)| {
        prop_assume!(a.distance(b) > 1.0);
        let heading = (b - a).heading();
        // Wind blowing straight against the direction of travel.
        let against = |s: f64| {
            let v = Vec2::from_polar(s, heading + std::f64::consts::PI);
            WindVector::new(v.x, v.y)
        };
        for rule in [GroundSpeedRule::Capped, GroundSpeedRule::Piecewise] {
            let slow = flight_time_with(rule, a, b, &against(lo), u_max).unwrap();
            let slower = flight_time_with(rule, a, b, &against(lo + step), u_max).unwrap();
            prop_assert!(slower > slow);
        }
        Ok(())
    });
    failures.extend(headwind.err().map(|e| format!("headwind: {e}")));

    check(
        failures.is_empty(),
        if failures.is_empty() { "4 properties x 1000 cases".into() } else { failures.join("; ") },
    )
}

fn gradient_check() -> Outcome {
    let shape = LstmShape { input_size: 1, hidden_size: 2, output_size: 1, input_len: 3 };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut points, mut tried, mut worst) = (0, 0, 0.0f64);
    let eps = 1e-6;
    while points < 20 && tried < 1000 {
        tried += 1;
        let model = LstmModel::random(shape, rng.random());
        let w = Window {
            input: (0..3).map(|_| rng.random_range(0.0..1.0)).collect(),
            target: vec![rng.random_range(-1.0..1.0)],
            start: 0,
        };
        let out = model.forecast(&w.input).map_err(|e| e.to_string())?;
        if (out[0] - w.target[0]).abs() < 1e-3 {
            continue;
        }
        let batch = [&w];
        let analytic = loss_and_gradient(&model, &batch).1.params().concat();
        let mut probe = model.clone();
        let mut idx = 0;
        for block in 0..probe.params().len() {
            for j in 0..probe.params()[block].len() {
                let orig = probe.params()[block][j];
                probe.params_mut()[block][j] = orig + eps;
                let up = mae_loss(&probe, &batch);
                probe.params_mut()[block][j] = orig - eps;
                let down = mae_loss(&probe, &batch);
                probe.params_mut()[block][j] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let diff = (analytic[idx] - numeric).abs();
                let scale = analytic[idx].abs().max(numeric.abs());
                if scale > 1e-6 {
                    worst = worst.max(diff / scale);
                } else if diff >= 1e-9 {
                    worst = f64::INFINITY;
                }
                idx += 1;
            }
        }
        points += 1;
    }
    check(points == 20 && worst <= 1e-4, format!("{points} points, worst relative error {worst:.2e}"))
}

fn main() {
    let run = forecast_run();
    let results: [(&str, Outcome); 8] = [
        ("1 ATSP exact solver matches brute force", atsp_oracle()),
        ("2 wind-aware routing on the fixture", routing_scenario()),
        ("3 yaw misalignment energy and daily ordering", yaw_energy(&run)),
        ("4 quantization fidelity", quantization_fidelity(&run)),
        ("5 5-minute input beats hourly input", resolution_benefit(&run)),
        ("6 4-bit weight storage", storage()),
        ("7 kinematics properties", kinematics_suite()),
        ("8 gradient check", gradient_check()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
