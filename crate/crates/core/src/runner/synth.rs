//! Deterministic merged tables for desk-scale runs and tests.
//!
//! Prices follow two superposed sines plus a small seeded jitter; sentiment is
//! independent noise, so lagged prices carry all the predictable signal.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fuse::{FeatureRow, N_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub rows: usize,
    pub seed: u64,
    pub start: DateTime<Utc>,
    pub base: f64,
    pub amplitude: f64,
    /// Main cycle length in hours.
    pub period: f64,
    /// Jitter as a fraction of the amplitude.
    pub noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            rows: 2000,
            seed: 42,
            start: Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap(),
            base: 10_000.0,
            amplitude: 1_500.0,
            period: 96.0,
            noise: 0.01,
        }
    }
}

pub fn synthetic_rows(spec: &SynthSpec) -> Vec<FeatureRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tau = std::f64::consts::TAU;
    let price = |t: f64| spec.base + spec.amplitude * ((tau * t / spec.period).sin() + 0.3 * (tau * t / (spec.period * 7.0)).sin());
    let mut day_news = [0.0; 7];
    let mut prev_close = price(-1.0);
    let mut out = Vec::with_capacity(spec.rows);
    for i in 0..spec.rows {
        let t = i as f64;
        if i % 24 == 0 {
            day_news = random_sentiment(&mut rng);
        }
        let jitter = spec.noise * spec.amplitude;
        let close = price(t) + rng.gen_range(-jitter..=jitter);
        let open = prev_close;
        let spread = rng.gen_range(0.0..=jitter.max(1.0));
        let mut v = [0.0; N_FEATURES];
        v[..9].copy_from_slice(&[
            open,
            open.max(close) + spread,
            open.min(close) - spread,
            close,
            rng.gen_range(100.0..1000.0),
            close / 200.0 + rng.gen_range(-1.0..1.0),
            rng.gen_range(1000.0..5000.0),
            close / 20.0 + rng.gen_range(-5.0..5.0),
            rng.gen_range(500.0..3000.0),
        ]);
        v[9..16].copy_from_slice(&day_news);
        v[16..23].copy_from_slice(&random_sentiment(&mut rng));
        out.push(FeatureRow {
            timestamp: spec.start + Duration::hours(i as i64),
            values: v,
        });
        prev_close = close;
    }
    out
}

/// Flat prices and all-zero sentiment.
pub fn constant_rows(n: usize, price: f64) -> Vec<FeatureRow> {
    let start = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
    (0..n)
        .map(|i| {
            let mut v = [0.0; N_FEATURES];
            v[..9].copy_from_slice(&[price, price, price, price, 100.0, price / 200.0, 100.0, price / 20.0, 100.0]);
            FeatureRow {
                timestamp: start + Duration::hours(i as i64),
                values: v,
            }
        })
        .collect()
}

fn random_sentiment(rng: &mut ChaCha8Rng) -> [f64; 7] {
    let pos: f64 = rng.gen_range(0.0..0.5);
    let neg: f64 = rng.gen_range(0.0..0.5);
    [
        rng.gen_range(-1.0..=1.0),
        rng.gen_range(-1.0..=1.0),
        rng.gen_range(0.0..=1.0),
        pos,
        neg,
        1.0 - pos - neg,
        rng.gen_range(-1.0..=1.0),
    ]
}
