//! Precomputed scores from a model that is not run in-process (the `flair`
//! channel). Stored as CSV `key,value`, keyed by Reddit post id or
//! `news:<date>:<rank>`.

use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::NaiveDate;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalScore {
    pub value: f64,
    /// Store name for hits, `"default"` for misses.
    pub source_tag: String,
}

#[derive(Debug, Default)]
pub struct ExternalStore {
    tag: String,
    values: HashMap<String, f64>,
    default: f64,
    misses: AtomicUsize,
}

pub fn news_key(date: NaiveDate, rank: u8) -> String {
    format!("news:{date}:{rank}")
}

impl ExternalStore {
    /// A store with no entries; every lookup falls back to the default.
    pub fn empty() -> Self {
        ExternalStore {
            tag: "default".into(),
            ..Default::default()
        }
    }

    pub fn from_entries(tag: &str, entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut values = HashMap::new();
        for (k, v) in entries {
            check_value(&k, v)?;
            if values.insert(k.clone(), v).is_some() {
                return Err(Error::Data(format!("external scores: duplicate key {k:?}")));
            }
        }
        Ok(ExternalStore {
            tag: tag.to_string(),
            values,
            ..Default::default()
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(file);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "key" || &headers[1] != "value" {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                column: headers.iter().collect::<Vec<_>>().join(","),
                problem: "expected header `key,value`".into(),
            });
        }
        let mut entries = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let key = rec.get(0).unwrap_or_default().to_string();
            let raw = rec.get(1).unwrap_or_default();
            let value: f64 = raw.trim().parse().map_err(|_| {
                Error::Data(format!("{} row {}: value {raw:?} is not a number", path.display(), n + 2))
            })?;
            if key.is_empty() {
                return Err(Error::Data(format!("{} row {}: empty key", path.display(), n + 2)));
            }
            entries.push((key, value));
        }
        let tag = path.file_stem().and_then(|s| s.to_str()).unwrap_or("external");
        Self::from_entries(tag, entries)
    }

    pub fn with_default(mut self, default: f64) -> Result<Self> {
        check_value("<default>", default)?;
        self.default = default;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, key: &str) -> ExternalScore {
        match self.values.get(key) {
            Some(&value) => ExternalScore {
                value,
                source_tag: self.tag.clone(),
            },
            None => {
                self.misses.fetch_add(1, Ordering::Relaxed);
                log::debug!("external score missing for {key:?}; using {}", self.default);
                ExternalScore {
                    value: self.default,
                    source_tag: "default".into(),
                }
            }
        }
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    /// Lookups that fell back to the default so far.
    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}

fn check_value(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Data(format!("external score for {key:?} out of [-1, 1]: {v}")))
    }
}

pub fn score_external(key: &str, store: &ExternalStore) -> ExternalScore {
    store.get(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn hit_miss_and_counter() {
        let s = ExternalStore::from_entries("flair", [("7ne3y9".to_string(), -0.9971)]).unwrap();
        assert_eq!(s.get("7ne3y9").value, -0.9971);
        assert_eq!(s.get("7ne3y9").source_tag, "flair");
        assert_eq!(s.misses(), 0);
        let miss = s.get("nope");
        assert_eq!(miss.value, 0.0);
        assert_eq!(miss.source_tag, "default");
        assert_eq!(s.misses(), 1);
    }

    #[test]
    fn malformed_files_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, body: &str| {
            let p = dir.path().join(name);
            std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
            p
        };
        assert!(ExternalStore::load(&write("a.csv", "key,value\nx,abc\n")).is_err());
        assert!(ExternalStore::load(&write("b.csv", "id,score\nx,0.1\n")).is_err());
        assert!(ExternalStore::load(&write("c.csv", "key,value\nx,1.5\n")).is_err());
        assert!(ExternalStore::load(&write("d.csv", "key,value\nx,0.1\nx,0.2\n")).is_err());
        assert!(ExternalStore::load(&write("e.csv", "key,value\nx,0.1,9\n")).is_err());
        let ok = ExternalStore::load(&write("flair.csv", "key,value\nnews:2018-01-01:1,0.25\n")).unwrap();
        assert_eq!(ok.get(&news_key(NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(), 1)).value, 0.25);
    }
}
