//! Hourly fusion of news sentiment, Reddit sentiment and three price series
//! into one table.
//!
//! Rows cover the intersection of every source's hourly span. Short price gaps
//! (at most [`MAX_PRICE_GAP_HOURS`] consecutive hours) are linearly
//! interpolated for open/high/low/close with zero volume; sentiment gaps get the
//! zero vector. Every fill is listed in the fill report.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};

use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, OhlcvBar};
use crate::sentiment::{DailySentiment, HourlySentiment, SentimentVector, CHANNELS};

pub const MAX_PRICE_GAP_HOURS: i64 = 2;
pub const N_FEATURES: usize = 23;

/// Feature columns of the merged table, in file order (after `timestamp`).
pub const FEATURE_COLUMNS: [&str; N_FEATURES] = [
    "open_BTCUSDT",
    "high_BTCUSDT",
    "low_BTCUSDT",
    "close_BTCUSDT",
    "volume_BTCUSDT",
    "close_LTCUSD",
    "volume_LTCUSD",
    "close_ETHUSD",
    "volume_ETHUSD",
    "gnews_flair",
    "gnews_tb_polarity",
    "gnews_tb_subjectivity",
    "gnews_sid_pos",
    "gnews_sid_neg",
    "gnews_sid_neu",
    "gnews_sid_com",
    "reddit_flair",
    "reddit_tb_polarity",
    "reddit_tb_subjectivity",
    "reddit_sid_pos",
    "reddit_sid_neg",
    "reddit_sid_neu",
    "reddit_sid_com",
];

const GNEWS_OFFSET: usize = 9;
const REDDIT_OFFSET: usize = 16;

pub fn column_index(name: &str) -> Option<usize> {
    FEATURE_COLUMNS.iter().position(|c| *c == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub timestamp: DateTime<Utc>,
    pub values: [f64; N_FEATURES],
}

impl FeatureRow {
    pub fn get(&self, column: &str) -> Option<f64> {
        column_index(column).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FillMethod {
    Linear,
    Zero,
}

impl FillMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FillMethod::Linear => "linear",
            FillMethod::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FillRecord {
    pub timestamp: DateTime<Utc>,
    pub column: &'static str,
    pub method: FillMethod,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Merged {
    pub rows: Vec<FeatureRow>,
    pub fills: Vec<FillRecord>,
}

/// Repeats each day's vector for its 24 hours.
///
/// Days may arrive in any order but must be unique and contiguous.
pub fn expand_daily_to_hourly(daily: &[DailySentiment]) -> Result<Vec<(DateTime<Utc>, SentimentVector)>> {
    let mut days: Vec<&DailySentiment> = daily.iter().collect();
    days.sort_by_key(|d| d.date);
    for w in days.windows(2) {
        if w[0].date == w[1].date {
            return Err(Error::Data(format!("duplicate news day {}", w[0].date)));
        }
        if w[0].date.succ_opt() != Some(w[1].date) {
            return Err(Error::Data(format!(
                "news days not contiguous: {} is followed by {}",
                w[0].date, w[1].date
            )));
        }
    }
    Ok(days
        .iter()
        .flat_map(|d| {
            let midnight = day_start(d.date);
            (0..24).map(move |h| (midnight + Duration::hours(h), d.vector))
        })
        .collect())
}

fn day_start(d: NaiveDate) -> DateTime<Utc> {
    d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

struct PriceSeries<'a> {
    label: &'static str,
    bars: BTreeMap<DateTime<Utc>, &'a OhlcvBar>,
}

impl<'a> PriceSeries<'a> {
    fn new(label: &'static str, bars: &'a [OhlcvBar]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for b in bars {
            if map.insert(b.timestamp, b).is_some() {
                return Err(Error::Data(format!("{label}: duplicate bar at {}", b.timestamp)));
            }
        }
        if map.is_empty() {
            return Err(Error::Data(format!("{label}: no price bars")));
        }
        Ok(PriceSeries { label, bars: map })
    }

    fn span(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        (*self.bars.keys().next().unwrap(), *self.bars.keys().next_back().unwrap())
    }

    /// `[open, high, low, close, volume]` at `t`, interpolating short gaps.
    fn at(&self, t: DateTime<Utc>) -> Result<([f64; 5], bool)> {
        if let Some(b) = self.bars.get(&t) {
            return Ok(([b.open, b.high, b.low, b.close, b.volume], false));
        }
        let prev = self.bars.range(..t).next_back();
        let next = self.bars.range(t..).next();
        let (Some((&tp, p)), Some((&tn, n))) = (prev, next) else {
            return Err(Error::Data(format!("{}: no bar at {t} and no neighbours to fill from", self.label)));
        };
        let missing = (tn - tp).num_hours() - 1;
        if missing > MAX_PRICE_GAP_HOURS {
            return Err(Error::Data(format!(
                "{}: {missing} consecutive missing hours after {tp} (at most {MAX_PRICE_GAP_HOURS} are filled)",
                self.label
            )));
        }
        let f = (t - tp).num_hours() as f64 / (tn - tp).num_hours() as f64;
        let lerp = |a: f64, b: f64| a + (b - a) * f;
        Ok((
            [
                lerp(p.open, n.open),
                lerp(p.high, n.high),
                lerp(p.low, n.low),
                lerp(p.close, n.close),
                0.0,
            ],
            true,
        ))
    }
}

fn sentiment_map(
    label: &str,
    rows: impl Iterator<Item = (DateTime<Utc>, SentimentVector)>,
) -> Result<BTreeMap<DateTime<Utc>, SentimentVector>> {
    let mut map = BTreeMap::new();
    for (t, v) in rows {
        if map.insert(t, v).is_some() {
            return Err(Error::Data(format!("{label}: duplicate hour {t}")));
        }
    }
    if map.is_empty() {
        return Err(Error::Data(format!("{label}: no sentiment rows")));
    }
    Ok(map)
}

/// Inner join of all five sources on the hour.
pub fn merge_all(
    gnews_hourly: &[(DateTime<Utc>, SentimentVector)],
    reddit_hourly: &[HourlySentiment],
    btc: &[OhlcvBar],
    ltc: &[OhlcvBar],
    eth: &[OhlcvBar],
) -> Result<Merged> {
    let gnews = sentiment_map("gnews", gnews_hourly.iter().copied())?;
    let reddit = sentiment_map("reddit", reddit_hourly.iter().map(|h| (h.hour, h.vector)))?;
    let prices = [
        PriceSeries::new("BTCUSDT", btc)?,
        PriceSeries::new("LTCUSD", ltc)?,
        PriceSeries::new("ETHUSD", eth)?,
    ];

    let mut spans = vec![
        (*gnews.keys().next().unwrap(), *gnews.keys().next_back().unwrap()),
        (*reddit.keys().next().unwrap(), *reddit.keys().next_back().unwrap()),
    ];
    spans.extend(prices.iter().map(PriceSeries::span));
    let lo = spans.iter().map(|s| s.0).max().unwrap();
    let hi = spans.iter().map(|s| s.1).min().unwrap();
    if lo > hi {
        return Err(Error::Data(format!(
            "sources do not overlap (latest start {lo}, earliest end {hi})"
        )));
    }

    let btc_cols: [(usize, usize); 5] = [(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)];
    let alt_cols: [[(usize, usize); 2]; 2] = [[(3, 5), (4, 6)], [(3, 7), (4, 8)]];

    let mut out = Merged::default();
    let mut t = lo;
    while t <= hi {
        let mut values = [f64::NAN; N_FEATURES];
        for (k, series) in prices.iter().enumerate() {
            let (ohlcv, filled) = series.at(t)?;
            let cols: &[(usize, usize)] = if k == 0 { &btc_cols } else { &alt_cols[k - 1] };
            for &(src, dst) in cols {
                values[dst] = ohlcv[src];
                if filled {
                    out.fills.push(FillRecord {
                        timestamp: t,
                        column: FEATURE_COLUMNS[dst],
                        method: if src == 4 { FillMethod::Zero } else { FillMethod::Linear },
                    });
                }
            }
        }
        for (map, offset) in [(&gnews, GNEWS_OFFSET), (&reddit, REDDIT_OFFSET)] {
            let v = match map.get(&t) {
                Some(v) => *v,
                None => {
                    for c in 0..CHANNELS.len() {
                        out.fills.push(FillRecord {
                            timestamp: t,
                            column: FEATURE_COLUMNS[offset + c],
                            method: FillMethod::Zero,
                        });
                    }
                    SentimentVector::ZERO
                }
            };
            values[offset..offset + CHANNELS.len()].copy_from_slice(&v.to_array());
        }
        if let Some(c) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value in row {} ({t}), column {}",
                out.rows.len(),
                FEATURE_COLUMNS[c]
            )));
        }
        out.rows.push(FeatureRow { timestamp: t, values });
        t += Duration::hours(1);
    }
    out.fills.sort();
    Ok(out)
}

pub fn merged_header() -> String {
    std::iter::once("timestamp")
        .chain(FEATURE_COLUMNS)
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes `merged.csv` and `merged.fills.csv` into `dir`.
pub fn write_merged(dir: &Path, merged: &Merged) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("merged.csv");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    let io = |e| Error::io(&path, e);
    writeln!(w, "{}", merged_header()).map_err(io)?;
    for r in &merged.rows {
        write!(w, "{}", format_timestamp(r.timestamp)).map_err(io)?;
        for v in r.values {
            write!(w, ",{v}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)?;

    let path = dir.join("merged.fills.csv");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
    let io = |e| Error::io(&path, e);
    writeln!(w, "timestamp,column,method").map_err(io)?;
    for f in &merged.fills {
        writeln!(w, "{},{},{}", format_timestamp(f.timestamp), f.column, f.method.as_str()).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

/// Reads a merged table, checking the header and hourly contiguity.
pub fn read_merged(path: &Path) -> Result<Vec<FeatureRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = rdr.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("timestamp").chain(FEATURE_COLUMNS).collect();
    for (i, want) in expected.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *want => {}
            Some(got) => {
                return Err(Error::Schema {
                    path: path.to_path_buf(),
                    column: want.to_string(),
                    problem: format!("expected at position {i}, found `{got}`"),
                })
            }
            None => {
                return Err(Error::Schema {
                    path: path.to_path_buf(),
                    column: want.to_string(),
                    problem: "missing".into(),
                })
            }
        }
    }
    if header.len() > expected.len() {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            column: header[expected.len()].to_string(),
            problem: "unexpected column".into(),
        });
    }
    let mut rows: Vec<FeatureRow> = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let ts = DateTime::parse_from_rfc3339(&rec[0])
            .map_err(|_| Error::Data(format!("{} row {}: bad timestamp {:?}", path.display(), n + 2, &rec[0])))?
            .with_timezone(&Utc);
        let mut values = [0.0; N_FEATURES];
        for (i, v) in values.iter_mut().enumerate() {
            let raw = &rec[i + 1];
            *v = raw
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| {
                    Error::Data(format!(
                        "{} row {}: bad {} value {raw:?}",
                        path.display(),
                        n + 2,
                        FEATURE_COLUMNS[i]
                    ))
                })?;
        }
        if let Some(prev) = rows.last() {
            if ts - prev.timestamp != Duration::hours(1) {
                return Err(Error::Data(format!(
                    "{}: rows not hourly-contiguous at {ts} (previous {})",
                    path.display(),
                    prev.timestamp
                )));
            }
        }
        rows.push(FeatureRow { timestamp: ts, values });
    }
    Ok(rows)
}
