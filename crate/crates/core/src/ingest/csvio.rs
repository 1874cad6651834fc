use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{NewsArticle, OhlcvBar, Pair, RedditPost};
use crate::error::{Error, Result};

/// A record with a fixed CSV column layout.
pub trait CsvRecord: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

impl CsvRecord for NewsArticle {
    const HEADER: &'static [&'static str] = &["date", "rank", "url", "text"];
}

impl CsvRecord for RedditPost {
    const HEADER: &'static [&'static str] = &[
        "post_id",
        "title",
        "selftext",
        "url",
        "author",
        "score",
        "publish_date",
        "num_of_comments",
        "permalink",
        "flair",
    ];
}

impl CsvRecord for OhlcvBar {
    const HEADER: &'static [&'static str] =
        &["timestamp", "open", "high", "low", "close", "volume"];
}

pub fn persist<T: CsvRecord>(records: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    {
        // Header is written explicitly so an empty record list still has one.
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut out);
        w.write_record(T::HEADER)?;
        for r in records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn load<T: CsvRecord>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(file));
    check_header(path, rdr.headers()?, T::HEADER)?;
    rdr.deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Loads candles for `pair` and checks every bar's invariants.
pub fn load_bars(path: impl AsRef<Path>, pair: Pair) -> Result<Vec<OhlcvBar>> {
    let mut bars: Vec<OhlcvBar> = load(path)?;
    for bar in &mut bars {
        bar.pair = pair;
        bar.validate()?;
    }
    Ok(bars)
}

pub(crate) fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let schema = |column: &str, problem: &str| Error::Schema {
        path: path.to_path_buf(),
        column: column.to_string(),
        problem: problem.to_string(),
    };
    for col in expected {
        if !found.iter().any(|f| f == *col) {
            return Err(schema(col, "is missing"));
        }
    }
    for col in found.iter() {
        if !expected.contains(&col) {
            return Err(schema(col, "is not part of the schema"));
        }
    }
    for (i, col) in expected.iter().enumerate() {
        if found.get(i) != Some(*col) {
            return Err(schema(col, &format!("must be column {}", i + 1)));
        }
    }
    Ok(())
}
