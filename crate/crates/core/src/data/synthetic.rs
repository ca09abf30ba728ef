//! Seeded synthetic 5-minute wind, used when no measured data is supplied.
//!
//! Speed is a diurnal cycle plus a slow Ornstein-Uhlenbeck term and a fast
//! AR(1) term. Direction is a slow OU wander around a prevailing heading.

use chrono::{TimeZone, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::series::{SeriesSource, WindSample, WindSeries};

pub const STEP_S: i64 = 300;
const SAMPLES_PER_DAY: usize = 288;

const MEAN_SPEED: f64 = 8.0;
const DIURNAL_AMPLITUDE: f64 = 1.5;
const SLOW_TAU_S: f64 = 3.0 * 3600.0;
const SLOW_SIGMA: f64 = 2.5;
const FAST_PHI: f64 = 0.6;
const FAST_SIGMA: f64 = 0.3;
const MIN_SPEED: f64 = 0.2;
const PREVAILING_DEG: f64 = 240.0;
const DIR_SIGMA_DEG: f64 = 30.0;
const DIR_NOISE_DEG: f64 = 3.0;

/// Stationary AR(1) with lag coefficient `phi` and marginal std `sigma`.
struct Ar1 {
    phi: f64,
    innovation: f64,
    state: f64,
}

impl Ar1 {
    fn new(phi: f64, sigma: f64, rng: &mut ChaCha8Rng) -> Self {
        let z: f64 = StandardNormal.sample(rng);
        Self { phi, innovation: sigma * (1.0 - phi * phi).sqrt(), state: sigma * z }
    }

    fn ou(tau_s: f64, sigma: f64, rng: &mut ChaCha8Rng) -> Self {
        Self::new((-(STEP_S as f64) / tau_s).exp(), sigma, rng)
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        let out = self.state;
        let z: f64 = StandardNormal.sample(rng);
        self.state = self.phi * self.state + self.innovation * z;
        out
    }
}

/// `days` days of 5-minute samples starting 2024-01-01T00:00Z.
pub fn generate(days: usize, seed: u64) -> WindSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slow = Ar1::ou(SLOW_TAU_S, SLOW_SIGMA, &mut rng);
    let mut fast = Ar1::new(FAST_PHI, FAST_SIGMA, &mut rng);
    let mut heading = Ar1::ou(SLOW_TAU_S, DIR_SIGMA_DEG, &mut rng);
    let t0 = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    let n = days * SAMPLES_PER_DAY;
    let samples = (0..n)
        .map(|k| {
            let phase = std::f64::consts::TAU * (k % SAMPLES_PER_DAY) as f64 / SAMPLES_PER_DAY as f64;
            let speed = MEAN_SPEED + DIURNAL_AMPLITUDE * phase.sin() + slow.next(&mut rng) + fast.next(&mut rng);
            let jitter: f64 = StandardNormal.sample(&mut rng);
            let deg = PREVAILING_DEG + heading.next(&mut rng) + DIR_NOISE_DEG * jitter;
            WindSample {
                timestamp: t0 + chrono::Duration::seconds(k as i64 * STEP_S),
                speed: speed.max(MIN_SPEED),
                direction: crate::wind::normalize_angle(deg.to_radians()),
            }
        })
        .collect();
    WindSeries::new(samples, STEP_S, SeriesSource::Synthetic).expect("generated samples are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(generate(1, 9), generate(1, 9));
        assert_ne!(generate(1, 9), generate(1, 10));
    }

    #[test]
    fn plausible_statistics() {
        let s = generate(28, 7);
        assert_eq!(s.len(), 28 * 288);
        let v = s.speeds();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((6.0..10.0).contains(&mean), "mean {mean}");
        assert!(v.iter().all(|&x| x >= MIN_SPEED));
        // successive samples are strongly correlated
        let step = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (v.len() - 1) as f64;
        assert!(step < 1.0, "mean step {step}");
    }
}
