//! The command-line verbs end to end on a generated fixture directory.

mod support;

use std::path::{Path, PathBuf};

use chrono::{Duration, TimeZone, Utc};
use serde_json::json;

use sentiforge::cli::main_with_args;
use sentiforge::fuse::read_merged;

fn run(args: &[&str]) -> i32 {
    main_with_args(std::iter::once("sentiforge").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const DAYS: i64 = 3;

/// Three days of news, hourly Reddit posts and hourly candles for every pair.
fn write_fixtures(dir: &Path) {
    let t0 = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
    let words = ["great gains today", "terrible crash", "calm market", "bitcoin is amazing!", "worried about fees"];
    for sub in ["news", "reddit", "klines"] {
        std::fs::create_dir_all(dir.join(sub)).unwrap();
    }
    for d in 0..DAYS {
        let day = (t0 + Duration::days(d)).date_naive();
        let items: Vec<_> = (0..3)
            .map(|k| json!({"url": format!("https://n.example/{day}/{k}"), "text": words[(d as usize + k) % words.len()]}))
            .collect();
        std::fs::write(dir.join("news").join(format!("{day}.json")), json!(items).to_string()).unwrap();
    }
    let posts: Vec<_> = (0..DAYS * 24)
        .map(|h| {
            json!({
                "id": format!("r{h}"),
                "title": format!("bitcoin {}", words[h as usize % words.len()]),
                "selftext": "",
                "created_utc": (t0 + Duration::hours(h) + Duration::minutes(10)).timestamp(),
            })
        })
        .collect();
    std::fs::write(dir.join("reddit/Bitcoin.json"), json!({ "data": posts }).to_string()).unwrap();
    for (pair, base) in [("BTCUSDT", 13_000.0), ("LTCUSD", 230.0), ("ETHUSD", 750.0)] {
        let bars: Vec<_> = (0..DAYS * 24)
            .map(|h| {
                let c = base * (1.0 + 0.02 * (h as f64 * 0.4).sin());
                let o = base * (1.0 + 0.02 * ((h as f64 - 1.0) * 0.4).sin());
                json!([
                    (t0 + Duration::hours(h)).timestamp_millis(),
                    o.to_string(),
                    (o.max(c) + 1.0).to_string(),
                    (o.min(c) - 1.0).to_string(),
                    c.to_string(),
                    "12.5"
                ])
            })
            .collect();
        std::fs::write(dir.join("klines").join(format!("{pair}.json")), json!(bars).to_string()).unwrap();
    }
}

struct Pipeline {
    _tmp: tempfile::TempDir,
    root: PathBuf,
}

fn pipeline() -> Pipeline {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path().to_path_buf();
    let fx = root.join("fixtures");
    write_fixtures(&fx);
    let src = |out: &str| -> Vec<String> {
        ["--fixtures", p(&fx), "--from", "2018-01-01", "--to", "2018-01-03", "--out", p(&root.join(out))]
            .map(String::from)
            .to_vec()
    };
    let call = |head: &[&str], tail: Vec<String>| {
        let args: Vec<&str> = head.iter().copied().chain(tail.iter().map(String::as_str)).collect();
        assert_eq!(run(&args), 0, "{args:?}");
    };
    call(&["ingest", "news"], src("news.csv"));
    call(&["ingest", "reddit"], src("reddit.csv"));
    for pair in ["BTCUSDT", "LTCUSD", "ETHUSD"] {
        call(&["ingest", "klines", "--pair", pair], src(&format!("{pair}.csv")));
    }
    let r = |f: &str| root.join(f).to_str().unwrap().to_string();
    call(&["score", "news"], vec!["--input".into(), r("news.csv"), "--out".into(), r("gnews_daily.csv")]);
    call(
        &["score", "reddit"],
        vec!["--input".into(), r("reddit.csv"), "--out".into(), r("reddit_hourly.csv"), "--items".into(), r("items.csv")],
    );
    call(
        &["fuse"],
        [
            "--gnews", &r("gnews_daily.csv"),
            "--reddit", &r("reddit_hourly.csv"),
            "--btc", &r("BTCUSDT.csv"),
            "--ltc", &r("LTCUSD.csv"),
            "--eth", &r("ETHUSD.csv"),
            "--out-dir", &r("fused"),
        ]
        .map(String::from)
        .to_vec(),
    );
    Pipeline { _tmp: tmp, root }
}

#[test]
fn ingest_score_fuse_run_report() {
    let pl = pipeline();
    let root = &pl.root;
    let merged = root.join("fused/merged.csv");
    let rows = read_merged(&merged).unwrap();
    assert_eq!(rows.len(), (DAYS * 24) as usize);
    assert!(rows.iter().all(|r| r.get("gnews_sid_com").unwrap().abs() <= 1.0));

    let out = root.join("out");
    let args = [
        "experiment", "run", "--id", "5", "--id", "13", "--merged", p(&merged), "--out-dir", p(&out),
        "--lookback-hours", "6", "--epochs", "2",
    ];
    assert_eq!(run(&args), 0);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.starts_with("id,architecture,seed,"));
    assert!(!summary.lines().next().unwrap().contains("wall"));

    let again = root.join("again");
    assert_eq!(run(&["report", "--results", p(&out.join("results.json")), "--out-dir", p(&again)]), 0);
    assert_eq!(std::fs::read_to_string(again.join("summary.csv")).unwrap(), summary);
    assert_eq!(
        std::fs::read(out.join("expr_13/predictions.csv")).unwrap(),
        std::fs::read(again.join("expr_13/predictions.csv")).unwrap()
    );
}

#[test]
fn synthetic_run_with_wall_time() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let args = [
        "experiment", "run", "--id", "17", "--synthetic", "300", "--out-dir", p(&out), "--lookback-hours", "12",
        "--epochs", "1", "--parallel", "2", "--wall-time",
    ];
    assert_eq!(run(&args), 0);
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().next().unwrap().ends_with(",wall_time_s"));
    assert!(out.join("paper_reference.csv").is_file());
}

#[test]
fn list_and_custom_matrix() {
    assert_eq!(run(&["experiment", "list"]), 0);
    let tmp = tempfile::tempdir().unwrap();
    let text = sentiforge::runner::matrix_to_toml(&sentiforge::runner::builtin_matrix()[4..5]).unwrap();
    let cfg = tmp.path().join("m.toml");
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(run(&["experiment", "list", "--config", p(&cfg)]), 0);
    let out = tmp.path().join("o");
    let base = ["experiment", "run", "--config", p(&cfg), "--synthetic", "200", "--out-dir", p(&out), "--epochs", "1"];
    let with = |extra: &[&str]| run(&base.iter().chain(extra).copied().collect::<Vec<_>>());
    assert_eq!(with(&["--lookback-hours", "8", "--all"]), 0);
    // Only experiment 5 exists in this matrix.
    assert_eq!(with(&["--lookback-hours", "8", "--id", "4"]), 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = p(&out);
    // Usage errors.
    assert_eq!(run(&["experiment", "frobnicate"]), 2);
    assert_eq!(run(&["experiment", "run", "--out-dir", o, "--synthetic", "100"]), 2);
    assert_eq!(run(&["experiment", "run", "--id", "99", "--synthetic", "100", "--out-dir", o]), 2);
    assert_eq!(run(&["experiment", "run", "--id", "5", "--synthetic", "100", "--out-dir", o, "--train-fraction", "1.5"]), 2);
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[[experiment]]\nid = 1\nbogus = true\n").unwrap();
    assert_eq!(run(&["experiment", "list", "--config", p(&bad)]), 2);
    // Data errors: a missing input, and too few rows for the lookback window.
    let missing = tmp.path().join("nope.csv");
    assert_eq!(run(&["experiment", "run", "--id", "5", "--merged", p(&missing), "--out-dir", o]), 3);
    assert_eq!(run(&["experiment", "run", "--id", "5", "--synthetic", "100", "--out-dir", o]), 3);
    let fx = support::fixtures().join("fuse");
    let f = |n: &str| fx.join(n).to_str().unwrap().to_string();
    let code = run(&[
        "fuse", "--gnews", &f("gnews_daily.csv"), "--reddit", &f("reddit_hourly.csv"), "--btc", &f("btc.csv"),
        "--ltc", &f("ltc.csv"), "--eth", &f("missing.csv"), "--out-dir", o,
    ]);
    assert_eq!(code, 3);
    assert_eq!(
        run(&[
            "fuse", "--gnews", &f("gnews_daily.csv"), "--reddit", &f("reddit_hourly.csv"), "--btc", &f("btc.csv"),
            "--ltc", &f("ltc.csv"), "--eth", &f("eth.csv"), "--out-dir", o,
        ]),
        0
    );
    assert_eq!(
        std::fs::read(out.join("merged.csv")).unwrap(),
        std::fs::read(fx.join("merged.expected.csv")).unwrap()
    );
}
