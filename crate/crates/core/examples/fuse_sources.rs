//! Joins the bundled five-hour source fixtures into the hourly feature table.

use std::path::Path;

use sentiforge::fuse::{expand_daily_to_hourly, merge_all, merged_header};
use sentiforge::ingest::{load_bars, Pair};
use sentiforge::sentiment::{read_daily_csv, read_hourly_csv};

fn main() -> sentiforge::Result<()> {
    let d = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fuse");
    let gnews = expand_daily_to_hourly(&read_daily_csv(&d.join("gnews_daily.csv"))?)?;
    let reddit = read_hourly_csv(&d.join("reddit_hourly.csv"))?;
    let mut btc = load_bars(d.join("btc.csv"), Pair::BtcUsdt)?;
    let ltc = load_bars(d.join("ltc.csv"), Pair::LtcUsd)?;
    let eth = load_bars(d.join("eth.csv"), Pair::EthUsd)?;
    // Drop one BTC hour to show gap filling.
    btc.remove(2);
    let merged = merge_all(&gnews, &reddit, &btc, &ltc, &eth)?;
    println!("{}", merged_header());
    for r in &merged.rows {
        let cells: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
        println!("{},{}", r.timestamp.format("%Y-%m-%d %H:%M"), cells.join(","));
    }
    for f in &merged.fills {
        println!("filled {} at {} ({})", f.column, f.timestamp, f.method.as_str());
    }
    Ok(())
}
