//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines show up in plain `cargo test` output.

mod support;

use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sentiforge::dataset::{make_windows, select_features};
use sentiforge::fuse::{expand_daily_to_hourly, merge_all, write_merged};
use sentiforge::ingest::{load_bars, Pair};
use sentiforge::neural::{mae, rmse, train, InMemorySamples, LayerSpec, Model, ModelSpec, TrainConfig};
use sentiforge::runner::{builtin_matrix, run_many, synthetic_rows, Overrides, SynthSpec};
use sentiforge::sentiment::{bucketize_hourly, read_daily_csv, read_hourly_csv, SentimentVector};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gradient_checks() -> Outcome {
    use LayerSpec as L;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for round in 0..8 {
        let (b, t, f, h) = (rng.gen_range(1..=4), rng.gen_range(3..=8), rng.gen_range(1..=4), rng.gen_range(1..=8));
        let k = rng.gen_range(1..=3);
        // Dense is output-only, so it is checked as the head of every stack.
        let d = L::Dense { units: 1 };
        let stacks = [
            ("LSTM", vec![L::Lstm { units: h }, d.clone()]),
            ("GRU", vec![L::Gru { units: h }, d.clone()]),
            ("Conv1D", vec![L::Conv1d { filters: h, kernel: k }, L::Gru { units: h }, d]),
        ];
        let x: Vec<f64> = (0..b * t * f).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = sentiforge::neural::Tensor::new(&[b, t, f], x).map_err(|e| e.to_string())?;
        let y: Vec<f64> = (0..b).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for (name, layers) in stacks {
            let spec = ModelSpec::new(f, layers).map_err(|e| format!("{name}: {e}"))?;
            let mut m = Model::new(&spec, round).map_err(|e| e.to_string())?;
            let rel = support::gradient_check(&mut m, &x, &y, 1e-5);
            ensure(rel < 1e-4, || format!("{name} b{b} t{t} f{f} h{h}: relative error {rel:e}"))?;
            worst = worst.max(rel);
            checked += m.n_params();
        }
    }
    Ok(format!(
        "LSTM, GRU, Conv1D stacks with a Dense head, {checked} parameters, worst relative error {worst:.1e}"
    ))
}

fn sentiment_parity() -> Outcome {
    let (worst, bad) = support::sentiment_parity();
    ensure(bad.is_empty() && support::oracle_rows().len() == 50, || {
        format!("{} channel values off, max deviation {worst:e}", bad.len())
    })?;
    Ok(format!("50 lines x 6 channels, max deviation {worst:.1e}"))
}

fn fusion_golden() -> Outcome {
    let d = support::fixtures().join("fuse");
    let e = |e: sentiforge::Error| e.to_string();
    let fuse = || -> sentiforge::Result<_> {
        let gnews = expand_daily_to_hourly(&read_daily_csv(&d.join("gnews_daily.csv"))?)?;
        let reddit = read_hourly_csv(&d.join("reddit_hourly.csv"))?;
        merge_all(
            &gnews,
            &reddit,
            &load_bars(d.join("btc.csv"), Pair::BtcUsdt)?,
            &load_bars(d.join("ltc.csv"), Pair::LtcUsd)?,
            &load_bars(d.join("eth.csv"), Pair::EthUsd)?,
        )
    };
    let merged = fuse().map_err(e)?;
    let rows = &merged.rows;
    ensure(rows.len() == 5, || format!("{} rows, want 5", rows.len()))?;
    ensure(rows[0].timestamp == Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap(), || "first hour".into())?;
    ensure(rows[0].get("open_BTCUSDT") == Some(13820.26), || "open_BTCUSDT".into())?;
    ensure(rows[0].get("volume_ETHUSD") == Some(625.29), || "volume_ETHUSD".into())?;
    ensure(rows.iter().all(|r| r.get("gnews_flair") == Some(0.0426)), || "gnews_flair".into())?;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        write_merged(&out, &fuse().map_err(e)?).map_err(e)?;
        bytes.push(std::fs::read(out.join("merged.csv")).map_err(|e| e.to_string())?);
    }
    ensure(bytes[0] == bytes[1], || "CSV differs between runs".into())?;
    let golden = std::fs::read(d.join("merged.expected.csv")).map_err(|e| e.to_string())?;
    ensure(bytes[0] == golden, || "CSV differs from the hand-joined golden file".into())?;
    Ok(format!("5 rows, {} bytes, byte-identical across runs", bytes[0].len()))
}

fn windowing() -> Outcome {
    let rows = synthetic_rows(&SynthSpec {
        rows: 16_536,
        ..SynthSpec::default()
    });
    let cfg = &builtin_matrix()[0];
    let m = select_features(&rows, &cfg.mask().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let ds = make_windows(m, cfg.lookback_days).map_err(|e| e.to_string())?;
    ensure(ds.seq_len() == 1440 && ds.len() == 15_096, || {
        format!("seq_len {} and {} samples", ds.seq_len(), ds.len())
    })?;
    Ok(format!("{} rows -> seq_len {}, {} samples", ds.n_rows(), ds.seq_len(), ds.len()))
}

fn sine_overfit() -> Outcome {
    let (amplitude, period, seq, n) = (1.0, 24.0, 24, 480);
    let series: Vec<f64> = (0..n + seq)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * i as f64 / period).sin())
        .collect();
    let data = InMemorySamples {
        seq_len: seq,
        n_features: 1,
        inputs: (0..n).flat_map(|i| series[i..i + seq].to_vec()).collect(),
        targets: (0..n).map(|i| series[i + seq]).collect(),
    };
    let spec = ModelSpec::new(1, vec![LayerSpec::Lstm { units: 8 }, LayerSpec::Dense { units: 1 }])
        .map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        batch_size: 32,
        epochs: 200,
        seed: 42,
        ..TrainConfig::default()
    };
    let fit = || -> sentiforge::Result<(Vec<f64>, Vec<f64>)> {
        let mut m = Model::new(&spec, cfg.seed)?;
        let h = train(&mut m, &data, &cfg)?;
        Ok((h.epoch_rmse, m.params()))
    };
    let (hist, params) = fit().map_err(|e| e.to_string())?;
    let (hist2, params2) = fit().map_err(|e| e.to_string())?;
    ensure(hist == hist2 && params == params2, || "two seeded runs differ".into())?;
    let limit = 0.05 * amplitude;
    let first = hist.iter().position(|r| *r < limit);
    let last = *hist.last().unwrap();
    ensure(last < limit, || format!("final train RMSE {last:.4} >= {limit}"))?;
    Ok(format!(
        "train RMSE {last:.4} after {} epochs (below {limit} from epoch {}), reproducible",
        hist.len(),
        first.map_or(0, |e| e + 1)
    ))
}

fn matrix_integrity() -> Outcome {
    let m = builtin_matrix();
    let bad = support::tables::matrix_mismatches(&m);
    ensure(bad.is_empty(), || bad.join("; "))?;
    let rows = synthetic_rows(&SynthSpec {
        rows: 2000,
        ..SynthSpec::default()
    });
    let ov = Overrides {
        lookback_hours: Some(48),
        epochs: Some(2),
        ..Overrides::default()
    };
    let results = run_many(&m, &rows, &ov, 1).map_err(|e| e.to_string())?;
    for r in &results {
        let x = &r.metrics;
        let finite = [x.train_rmse, x.test_rmse, x.train_mae, x.test_mae].iter().all(|v| v.is_finite());
        ensure(finite, || format!("experiment {}: non-finite metric", r.id))?;
        ensure(x.test_mae <= x.test_rmse, || format!("experiment {}: test MAE > test RMSE", r.id))?;
    }
    let best = results
        .iter()
        .min_by(|a, b| a.metrics.test_rmse.total_cmp(&b.metrics.test_rmse))
        .unwrap();
    Ok(format!(
        "{} configs match the tables and ran; lowest test RMSE {:.2} (experiment {})",
        results.len(),
        best.metrics.test_rmse,
        best.id
    ))
}

fn metric_identities() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let cases: [(&[f64], &[f64], f64, f64); 4] = [
        (&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0], (4.0f64 / 3.0).sqrt(), 2.0 / 3.0),
        (&[0.0, 0.0], &[3.0, -4.0], 12.5f64.sqrt(), 3.5),
        (&[2.5], &[2.5], 0.0, 0.0),
        (&[1.0, -1.0, 1.0, -1.0], &[0.0; 4], 1.0, 1.0),
    ];
    for (p, a, r, m) in cases {
        let (gr, gm) = (rmse(p, a).map_err(|e| e.to_string())?, mae(p, a).map_err(|e| e.to_string())?);
        ensure(close(gr, r) && close(gm, m), || format!("{p:?} vs {a:?}: rmse {gr}, mae {gm}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..1000 {
        let n = rng.gen_range(1..=64);
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let (r, m) = (rmse(&p, &a).unwrap(), mae(&p, &a).unwrap());
        ensure(r >= m * (1.0 - 1e-12), || format!("pair {i}: rmse {r} < mae {m}"))?;
    }
    Ok("4 hand cases to 1e-12, rmse >= mae on 1000 random pairs".into())
}

fn bucketization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let t0 = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
    let mut buckets = 0;
    for set in 0..1000 {
        let n = rng.gen_range(1..=200);
        let span = rng.gen_range(1..=7 * 86_400);
        let mut offsets: Vec<i64> = (0..n).map(|_| rng.gen_range(0..span)).collect();
        offsets.sort_unstable();
        let posts: Vec<_> = offsets
            .into_iter()
            .map(|s| {
                let v: [f64; 7] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                (t0 + chrono::Duration::seconds(s), SentimentVector::from_array(v))
            })
            .collect();
        let got = bucketize_hourly(&posts);
        let want = support::groupby_hourly(&posts);
        let filled: Vec<_> = got.iter().filter(|b| !b.is_empty()).collect();
        ensure(filled.len() == want.len(), || format!("set {set}: {} buckets, want {}", filled.len(), want.len()))?;
        for b in filled {
            ensure(want.get(&b.hour) == Some(&b.vector.to_array()), || format!("set {set}: hour {}", b.hour))?;
        }
        ensure(got.iter().filter(|b| b.is_empty()).all(|b| b.vector.is_zero()), || format!("set {set}: empty hour"))?;
        buckets += want.len();
    }
    Ok(format!("1000 post sets, {buckets} hourly means equal exactly"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("gradient checks", Duration::from_secs(60), gradient_checks),
        ("sentiment oracle parity", Duration::from_secs(5), sentiment_parity),
        ("fusion golden", Duration::MAX, fusion_golden),
        ("windowing arithmetic", Duration::MAX, windowing),
        ("overfit smoke", Duration::from_secs(120), sine_overfit),
        ("matrix integrity", Duration::from_secs(600), matrix_integrity),
        ("metric identities", Duration::MAX, metric_identities),
        ("bucketization equivalence", Duration::MAX, bucketization),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let started = Instant::now();
        let outcome = check();
        let took = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({took:.1?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({took:.1?})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
