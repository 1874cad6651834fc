//! Hourly candles from a Binance-compatible `/api/v3/klines` endpoint.

use std::path::PathBuf;

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::http::{HttpClient, Verdict};
use super::{OhlcvBar, Pair, TimeRange};
use crate::error::{Error, Result};

const HOUR_MS: i64 = 3_600_000;
pub const MAX_BARS_PER_REQUEST: usize = 1000;

pub enum KlineSource<'a> {
    Http {
        client: &'a HttpClient,
        base_url: String,
    },
    /// `<dir>/klines/<PAIR>.json`, a Binance-shaped array of kline arrays.
    Fixtures(PathBuf),
}

#[derive(Debug, Clone, Default)]
pub struct KlineFetch {
    pub bars: Vec<OhlcvBar>,
    /// Hours inside the requested range with no candle.
    pub gaps: Vec<DateTime<Utc>>,
    pub requests: usize,
}

pub fn klines_url(base_url: &str, pair: Pair, start_ms: i64, end_ms: i64, limit: usize) -> String {
    format!(
        "{}/api/v3/klines?symbol={pair}&interval=1h&startTime={start_ms}&endTime={end_ms}&limit={limit}",
        base_url.trim_end_matches('/')
    )
}

pub fn fetch_klines(source: &KlineSource<'_>, pair: &str, range: TimeRange) -> Result<KlineFetch> {
    let pair: Pair = pair.parse()?;
    let mut out = KlineFetch::default();
    if range.is_empty() {
        return Ok(out);
    }
    let end_ms = range.end.timestamp_millis();
    let mut start_ms = range.start.timestamp_millis();
    let fixture_rows = match source {
        KlineSource::Fixtures(dir) => Some(load_fixture(dir, pair)?),
        KlineSource::Http { .. } => None,
    };

    while start_ms < end_ms {
        let rows = match (source, &fixture_rows) {
            (KlineSource::Http { client, base_url }, _) => {
                let url = klines_url(base_url, pair, start_ms, end_ms - 1, MAX_BARS_PER_REQUEST);
                client.get_with(&url, judge_klines)?
            }
            (KlineSource::Fixtures(_), Some(all)) => all
                .iter()
                .filter(|r| open_time(r).is_some_and(|t| t >= start_ms && t < end_ms))
                .take(MAX_BARS_PER_REQUEST)
                .cloned()
                .collect(),
            (KlineSource::Fixtures(_), None) => unreachable!("fixture rows loaded above"),
        };
        out.requests += 1;
        let n = rows.len();
        let mut last_open = None;
        for row in &rows {
            let bar = parse_bar(row, pair)?;
            let t = bar.timestamp.timestamp_millis();
            if t < start_ms || t >= end_ms {
                continue;
            }
            last_open = Some(t);
            out.bars.push(bar);
        }
        match last_open {
            Some(t) if n == MAX_BARS_PER_REQUEST => start_ms = t + HOUR_MS,
            _ => break,
        }
    }

    out.bars.sort_by_key(|b| b.timestamp);
    out.bars.dedup_by_key(|b| b.timestamp);
    let mut have = out.bars.iter().map(|b| b.timestamp).peekable();
    for hour in range.hours() {
        while have.peek().is_some_and(|t| *t < hour) {
            have.next();
        }
        if have.peek() != Some(&hour) {
            out.gaps.push(hour);
        }
    }
    if !out.gaps.is_empty() {
        log::warn!("{pair}: {} missing hour(s) in {}..{}", out.gaps.len(), range.start, range.end);
    }
    Ok(out)
}

fn judge_klines(resp: super::Response) -> Verdict<Vec<Vec<Value>>> {
    match serde_json::from_str::<Value>(&resp.body) {
        Ok(Value::Array(rows)) if (200..300).contains(&resp.status) => {
            let mut out = Vec::with_capacity(rows.len());
            for r in rows {
                match r {
                    Value::Array(a) => out.push(a),
                    other => return Verdict::Retry(format!("unexpected kline entry {other}")),
                }
            }
            Verdict::Accept(out)
        }
        Ok(Value::Object(obj)) => Verdict::Retry(format!(
            "exchange error {}: {}",
            obj.get("code").unwrap_or(&Value::Null),
            obj.get("msg").and_then(Value::as_str).unwrap_or("")
        )),
        _ => Verdict::Retry(format!("HTTP {} with unusable body", resp.status)),
    }
}

fn load_fixture(dir: &std::path::Path, pair: Pair) -> Result<Vec<Vec<Value>>> {
    let path = dir.join("klines").join(format!("{pair}.json"));
    if !path.exists() {
        return Ok(Vec::new());
    }
    let raw = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let rows: Vec<Vec<Value>> = serde_json::from_str(&raw)?;
    Ok(rows)
}

fn open_time(row: &[Value]) -> Option<i64> {
    row.first()?.as_i64()
}

fn parse_bar(row: &[Value], pair: Pair) -> Result<OhlcvBar> {
    let num = |i: usize| -> Result<f64> {
        let v = row
            .get(i)
            .ok_or_else(|| Error::Data(format!("kline row too short: {row:?}")))?;
        match v {
            Value::String(s) => s.parse().map_err(|_| Error::Data(format!("bad number {s:?}"))),
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Data(format!("bad number {n}"))),
            other => Err(Error::Data(format!("bad kline field {other}"))),
        }
    };
    let t = open_time(row).ok_or_else(|| Error::Data(format!("kline without open time: {row:?}")))?;
    let timestamp = DateTime::from_timestamp_millis(t)
        .ok_or_else(|| Error::Data(format!("kline open time {t} out of range")))?;
    let bar = OhlcvBar {
        timestamp,
        pair,
        open: num(1)?,
        high: num(2)?,
        low: num(3)?,
        close: num(4)?,
        volume: num(5)?,
    };
    bar.validate()?;
    Ok(bar)
}
