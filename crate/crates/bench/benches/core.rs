use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use windfarm_core::forecast::{quantize_model, Linear, LstmModel, LstmShape, QuantSpec, QuantizedMatrix};
use windfarm_core::routing::fixture::reference_scenario;
use windfarm_core::routing::{plan_inspection, solve_atsp_exact, solve_atsp_heuristic, PlannerConfig, TimeMatrix};

fn random_matrix(n: usize, seed: u64) -> TimeMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows =
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { rng.random_range(10.0..500.0) }).collect()).collect();
    TimeMatrix::from_unlabelled(rows).unwrap()
}

fn atsp(c: &mut Criterion) {
    let mut g = c.benchmark_group("atsp");
    for n in [8, 12, 15] {
        let m = random_matrix(n, n as u64);
        g.bench_with_input(BenchmarkId::new("exact", n), &m, |b, m| {
            b.iter(|| solve_atsp_exact(black_box(m), 16).unwrap())
        });
    }
    for n in [15, 40] {
        let m = random_matrix(n, n as u64);
        g.bench_with_input(BenchmarkId::new("heuristic", n), &m, |b, m| {
            b.iter(|| solve_atsp_heuristic(black_box(m)).unwrap())
        });
    }
    g.finish();
}

fn planning(c: &mut Criterion) {
    let s = reference_scenario();
    let wind = s.wind().unwrap();
    let cfg = PlannerConfig::default();
    c.bench_function("plan_inspection/reference", |b| {
        b.iter(|| plan_inspection(&s.uavs, &s.turbines, &s.assignment, black_box(&wind), &cfg).unwrap())
    });
}

fn forecast(c: &mut Criterion) {
    let shape = LstmShape { input_size: 1, hidden_size: 32, output_size: 8, input_len: 24 };
    let model = LstmModel::random(shape, 1);
    let window: Vec<f64> = (0..24).map(|k| 0.5 + 0.3 * (k as f64 / 4.0).sin()).collect();
    let mut g = c.benchmark_group("lstm_forecast");
    g.bench_function("float", |b| b.iter(|| model.forecast(black_box(&window)).unwrap()));
    for bits in [16, 8, 4, 2] {
        let q = quantize_model(&model, &QuantSpec::uniform(bits)).unwrap();
        g.bench_with_input(BenchmarkId::new("quantized", bits), &q, |b, q| {
            b.iter(|| q.forecast(black_box(&window)).unwrap())
        });
    }
    g.finish();
}

/// Codes drawn so that roughly `zero_share` of them sit on the zero level.
fn codes_with_zero_share(n: usize, bits: u8, zero_share: f64, rng: &mut ChaCha8Rng) -> Vec<u16> {
    let levels = (1u16 << bits) - 1;
    let zero = levels.div_ceil(2);
    (0..n).map(|_| if rng.random_bool(zero_share) { zero } else { rng.random_range(0..=levels) }).collect()
}

fn matvec(c: &mut Criterion) {
    let (rows, cols) = (128, 128);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut g = c.benchmark_group("matvec_4bit");
    for share in [0.0, 0.5, 0.9] {
        let codes = codes_with_zero_share(rows * cols, 4, share, &mut rng);
        let m = QuantizedMatrix::from_codes(rows, cols, 4, 0.2, codes).unwrap();
        let label = format!("{:.0}pct_zero", 100.0 * m.zero_fraction());
        // Thresholds outside [0, 1] pin the kernel choice.
        for (kernel, threshold) in [("sparse", -1.0), ("dense", 1.1)] {
            let mut m = m.clone();
            m.set_sparse_threshold(threshold);
            g.bench_with_input(BenchmarkId::new(kernel, &label), &m, |b, m| {
                b.iter(|| {
                    let mut out = vec![0.0; rows];
                    m.mul_add(black_box(&v), &mut out);
                    out
                })
            });
        }
    }
    g.finish();
}

criterion_group!(benches, atsp, planning, forecast, matvec);
criterion_main!(benches);
