//! Raw data collection: news articles, Reddit submissions and hourly exchange
//! candles, each fetchable from a live HTTP endpoint or from a local fixture
//! directory, and persisted as canonical CSV.

mod csvio;
mod http;
mod klines;
mod news;
mod reddit;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csvio::{load, load_bars, persist, CsvRecord};
pub use http::{HttpClient, HttpPolicy, Response};
pub use klines::{fetch_klines, KlineFetch, KlineSource};
pub use news::{extract_readable_text, extract_result_links, fetch_news, news_search_url, NewsSource};
pub use reddit::{fetch_reddit_posts, submission_search_url, RedditFetch, RedditSource, DEFAULT_PAGE_SIZE as REDDIT_PAGE_SIZE};

pub const EXCHANGE_URL_ENV: &str = "SENTIFORGE_EXCHANGE_URL";
pub const PUSHSHIFT_URL_ENV: &str = "SENTIFORGE_PUSHSHIFT_URL";
pub const FIXTURES_DIR_ENV: &str = "SENTIFORGE_FIXTURES_DIR";

pub const MAX_ARTICLES_PER_DAY: usize = 10;

/// Half-open UTC interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeRange {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl TimeRange {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!(
                "time range start {start} is after end {end}"
            )));
        }
        Ok(TimeRange { start, end })
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// Every hour boundary inside the range.
    pub fn hours(&self) -> impl Iterator<Item = DateTime<Utc>> {
        let first = ceil_hour(self.start);
        let end = self.end;
        std::iter::successors(Some(first), |t| Some(*t + chrono::Duration::hours(1)))
            .take_while(move |t| *t < end)
    }
}

pub(crate) fn ceil_hour(t: DateTime<Utc>) -> DateTime<Utc> {
    let floor = floor_hour(t);
    if floor == t {
        t
    } else {
        floor + chrono::Duration::hours(1)
    }
}

pub fn floor_hour(t: DateTime<Utc>) -> DateTime<Utc> {
    let secs = t.timestamp().div_euclid(3600) * 3600;
    DateTime::from_timestamp(secs, 0).expect("hour floor is representable")
}

/// `YYYY-MM-DDTHH:MM:SSZ`, the same form serde writes for timestamps.
pub fn format_timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn is_hour_aligned(t: DateTime<Utc>) -> bool {
    t.minute() == 0 && t.second() == 0 && t.nanosecond() == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsArticle {
    pub date: NaiveDate,
    /// 1-based position in the day's search results.
    pub rank: u8,
    pub url: String,
    #[serde(rename = "text")]
    pub full_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedditPost {
    pub post_id: String,
    pub title: String,
    pub selftext: String,
    pub url: String,
    pub author: String,
    pub score: i64,
    pub publish_date: DateTime<Utc>,
    pub num_of_comments: u64,
    pub permalink: String,
    #[serde(rename = "flair")]
    pub flair_tag: String,
}

impl RedditPost {
    /// Text fed to the scorers: title and selftext joined by one newline.
    pub fn scoring_text(&self) -> String {
        format!("{}\n{}", self.title, self.selftext)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Pair {
    #[default]
    #[serde(rename = "BTCUSDT")]
    BtcUsdt,
    #[serde(rename = "LTCUSD")]
    LtcUsd,
    #[serde(rename = "ETHUSD")]
    EthUsd,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::BtcUsdt, Pair::LtcUsd, Pair::EthUsd];

    pub fn symbol(self) -> &'static str {
        match self {
            Pair::BtcUsdt => "BTCUSDT",
            Pair::LtcUsd => "LTCUSD",
            Pair::EthUsd => "ETHUSD",
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pair::ALL
            .into_iter()
            .find(|p| p.symbol().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unsupported trading pair `{s}` (expected BTCUSDT, LTCUSD or ETHUSD)"
                ))
            })
    }
}

/// One hourly candle. `timestamp` is the bar-open time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OhlcvBar {
    pub timestamp: DateTime<Utc>,
    #[serde(skip)]
    pub pair: Pair,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl OhlcvBar {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::Data(format!(
                "{} bar at {} violates {what}",
                self.pair, self.timestamp
            )))
        };
        if ![self.open, self.high, self.low, self.close, self.volume]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("finiteness");
        }
        if self.low > self.open.min(self.close) {
            return bad("low <= min(open, close)");
        }
        if self.high < self.open.max(self.close) {
            return bad("high >= max(open, close)");
        }
        if self.volume < 0.0 {
            return bad("volume >= 0");
        }
        if !is_hour_aligned(self.timestamp) {
            return bad("hour alignment");
        }
        Ok(())
    }
}

/// Tally of skipped or defaulted records, reported alongside fetch results.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Warnings {
    pub count: usize,
    pub messages: Vec<String>,
}

impl Warnings {
    pub fn push(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        log::warn!("{msg}");
        self.count += 1;
        self.messages.push(msg);
    }
}
