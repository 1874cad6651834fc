//! Offline ingestion: writes a tiny fixture directory, then pulls news, Reddit
//! posts and candles from it exactly as the network fetchers would.

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use serde_json::json;

use sentiforge::ingest::{
    fetch_klines, fetch_news, fetch_reddit_posts, persist, KlineSource, NewsSource, RedditSource, TimeRange,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = tmp.path();
    let t0 = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
    for sub in ["news", "reddit", "klines"] {
        std::fs::create_dir_all(dir.join(sub))?;
    }
    std::fs::write(
        dir.join("news/2018-01-01.json"),
        json!([
            {"url": "https://n.example/1", "text": "Bitcoin starts the year strong."},
            {"url": "https://n.example/2", "text": ""},
            {"url": "https://n.example/3", "text": "Regulators warn about crypto risks."}
        ])
        .to_string(),
    )?;
    let posts: Vec<_> = (0..6)
        .map(|i| json!({"id": format!("p{i}"), "title": "HODL", "selftext": "", "created_utc": t0.timestamp() + i * 1200}))
        .collect();
    std::fs::write(dir.join("reddit/Bitcoin.json"), json!({ "data": posts }).to_string())?;
    let bars: Vec<_> = [0, 1, 3]
        .iter()
        .map(|h| json!([(t0 + Duration::hours(*h)).timestamp_millis(), "13800", "13900", "13700", "13850", "100.5"]))
        .collect();
    std::fs::write(dir.join("klines/BTCUSDT.json"), json!(bars).to_string())?;

    let day = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    let news = fetch_news(&NewsSource::Fixtures(dir.to_path_buf()), "bitcoin", day)?;
    for a in &news {
        println!("news  rank {} {:?}", a.rank, a.full_text);
    }

    let range = TimeRange::new(t0, t0 + Duration::hours(4))?;
    let reddit = RedditSource::Fixtures {
        dir: dir.to_path_buf(),
        page_size: 4,
    };
    let got = fetch_reddit_posts(&reddit, "Bitcoin", "", range)?;
    println!("reddit {} posts in {} pages", got.posts.len(), got.pages);

    let k = fetch_klines(&KlineSource::Fixtures(dir.to_path_buf()), "BTCUSDT", range)?;
    println!("klines {} bars, missing hours: {:?}", k.bars.len(), k.gaps);

    let out = dir.join("btc.csv");
    persist(&k.bars, &out)?;
    print!("{}", std::fs::read_to_string(out)?);
    Ok(())
}
