//! Text sentiment on seven channels and its daily/hourly aggregation.
//!
//! Channels: `flair` (external precomputed score), `tb_polarity` and
//! `tb_subjectivity` (pattern lexicon), `sid_pos`, `sid_neg`, `sid_neu` and
//! `sid_com` (rule-based valence scorer).

mod external;
mod pattern;
mod text;
mod vader;

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};

pub use external::{news_key, score_external, ExternalScore, ExternalStore};
pub use pattern::{find_tokens, PatternAnalyzer, PatternScore};
pub use vader::{VaderAnalyzer, VaderScore};

use crate::error::{Error, Result};
use crate::ingest::{floor_hour, NewsArticle, RedditPost, Warnings};

pub const CHANNELS: [&str; 7] = [
    "flair",
    "tb_polarity",
    "tb_subjectivity",
    "sid_pos",
    "sid_neg",
    "sid_neu",
    "sid_com",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SentimentVector {
    pub flair: f64,
    pub tb_polarity: f64,
    pub tb_subjectivity: f64,
    pub sid_pos: f64,
    pub sid_neg: f64,
    pub sid_neu: f64,
    pub sid_com: f64,
}

impl SentimentVector {
    pub const ZERO: SentimentVector = SentimentVector {
        flair: 0.0,
        tb_polarity: 0.0,
        tb_subjectivity: 0.0,
        sid_pos: 0.0,
        sid_neg: 0.0,
        sid_neu: 0.0,
        sid_com: 0.0,
    };

    pub fn from_scores(flair: f64, pattern: PatternScore, vader: VaderScore) -> Self {
        SentimentVector {
            flair,
            tb_polarity: pattern.polarity,
            tb_subjectivity: pattern.subjectivity,
            sid_pos: vader.pos,
            sid_neg: vader.neg,
            sid_neu: vader.neu,
            sid_com: vader.compound,
        }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.flair,
            self.tb_polarity,
            self.tb_subjectivity,
            self.sid_pos,
            self.sid_neg,
            self.sid_neu,
            self.sid_com,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        SentimentVector {
            flair: a[0],
            tb_polarity: a[1],
            tb_subjectivity: a[2],
            sid_pos: a[3],
            sid_neg: a[4],
            sid_neu: a[5],
            sid_com: a[6],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|v| *v == 0.0)
    }

    /// Finite and each channel within its scorer's range.
    pub fn validate(&self) -> Result<()> {
        let a = self.to_array();
        let ranges = [
            (-1.0, 1.0),
            (-1.0, 1.0),
            (0.0, 1.0),
            (0.0, 1.0),
            (0.0, 1.0),
            (0.0, 1.0),
            (-1.0, 1.0),
        ];
        for ((v, (lo, hi)), name) in a.iter().zip(ranges).zip(CHANNELS) {
            if !v.is_finite() || *v < lo || *v > hi {
                return Err(Error::Data(format!("sentiment channel {name} = {v} outside [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Rule-based valence scores for `text` using the bundled lexicon.
pub fn score_vader(text: &str) -> VaderScore {
    bundled().vader.score(text)
}

/// Pattern-lexicon polarity and subjectivity for `text`.
pub fn score_pattern(text: &str) -> PatternScore {
    bundled().pattern.score(text)
}

struct Bundled {
    vader: VaderAnalyzer,
    pattern: PatternAnalyzer,
}

fn bundled() -> &'static Bundled {
    static B: std::sync::OnceLock<Bundled> = std::sync::OnceLock::new();
    B.get_or_init(|| Bundled {
        vader: VaderAnalyzer::bundled(),
        pattern: PatternAnalyzer::bundled(),
    })
}

/// All three scorers, loaded once and shared across threads.
pub struct Scorer {
    pub vader: VaderAnalyzer,
    pub pattern: PatternAnalyzer,
    pub external: ExternalStore,
}

impl Scorer {
    pub fn bundled(external: ExternalStore) -> Self {
        Scorer {
            vader: VaderAnalyzer::bundled(),
            pattern: PatternAnalyzer::bundled(),
            external,
        }
    }

    pub fn score_text(&self, text: &str, key: &str) -> SentimentVector {
        SentimentVector::from_scores(self.external.get(key).value, self.pattern.score(text), self.vader.score(text))
    }

    pub fn score_article(&self, a: &NewsArticle) -> SentimentVector {
        self.score_text(&a.full_text, &news_key(a.date, a.rank))
    }

    pub fn score_post(&self, p: &RedditPost) -> SentimentVector {
        self.score_text(&p.scoring_text(), &p.post_id)
    }

    /// One vector per calendar day from `first` to `last` inclusive.
    pub fn score_news(
        &self,
        articles: &[NewsArticle],
        first: NaiveDate,
        last: NaiveDate,
        warnings: &mut Warnings,
    ) -> Vec<DailySentiment> {
        let mut out = Vec::new();
        let mut day = first;
        while day <= last {
            let scores: Vec<SentimentVector> = articles
                .iter()
                .filter(|a| a.date == day)
                .map(|a| self.score_article(a))
                .collect();
            if scores.is_empty() {
                warnings.push(format!("{day}: no news articles, using zero sentiment"));
            }
            out.push(DailySentiment {
                date: day,
                n_articles: scores.len(),
                vector: aggregate_daily_news(&scores),
            });
            day = day.succ_opt().expect("date in range");
        }
        out
    }

    pub fn score_reddit(&self, posts: &[RedditPost]) -> Vec<HourlySentiment> {
        let scored: Vec<(DateTime<Utc>, SentimentVector)> =
            posts.iter().map(|p| (p.publish_date, self.score_post(p))).collect();
        bucketize_hourly(&scored)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailySentiment {
    pub date: NaiveDate,
    pub vector: SentimentVector,
    pub n_articles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HourlySentiment {
    pub hour: DateTime<Utc>,
    pub vector: SentimentVector,
    pub n_posts: usize,
}

impl HourlySentiment {
    pub fn is_empty(&self) -> bool {
        self.n_posts == 0
    }
}

/// Per-channel arithmetic mean. Values are summed in sorted order per channel,
/// so the result is independent of input order. An empty list gives the zero
/// vector.
pub fn aggregate_daily_news(scores: &[SentimentVector]) -> SentimentVector {
    if scores.is_empty() {
        log::warn!("aggregating an empty news day; returning zero sentiment");
        return SentimentVector::ZERO;
    }
    let n = scores.len() as f64;
    let mut out = [0.0; 7];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut col: Vec<f64> = scores.iter().map(|s| s.to_array()[c]).collect();
        col.sort_by(f64::total_cmp);
        *slot = col.iter().sum::<f64>() / n;
    }
    SentimentVector::from_array(out)
}

/// Groups posts by UTC hour and averages each channel, in input order.
///
/// Covers every hour from the first to the last post's hour; hours without a
/// post get the zero vector and `n_posts == 0`. Input is expected in ascending
/// time order; other orders are stably sorted first.
pub fn bucketize_hourly(posts: &[(DateTime<Utc>, SentimentVector)]) -> Vec<HourlySentiment> {
    if posts.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<&(DateTime<Utc>, SentimentVector)> = posts.iter().collect();
    if !posts.windows(2).all(|w| w[0].0 <= w[1].0) {
        sorted.sort_by_key(|(t, _)| *t);
    }
    let first = floor_hour(sorted[0].0);
    let last = floor_hour(sorted[sorted.len() - 1].0);
    let n_hours = ((last - first).num_hours() + 1) as usize;
    let mut sums = vec![[0.0f64; 7]; n_hours];
    let mut counts = vec![0usize; n_hours];
    for (t, v) in sorted {
        let idx = (floor_hour(*t) - first).num_hours() as usize;
        for (s, x) in sums[idx].iter_mut().zip(v.to_array()) {
            *s += x;
        }
        counts[idx] += 1;
    }
    (0..n_hours)
        .map(|i| {
            let hour = first + Duration::hours(i as i64);
            let vector = if counts[i] == 0 {
                SentimentVector::ZERO
            } else {
                SentimentVector::from_array(sums[i].map(|s| s / counts[i] as f64))
            };
            HourlySentiment {
                hour,
                vector,
                n_posts: counts[i],
            }
        })
        .collect()
}

fn header(first: &str, prefix: &str) -> Vec<String> {
    std::iter::once(first.to_string())
        .chain(CHANNELS.iter().map(|c| format!("{prefix}_{c}")))
        .collect()
}

fn write_rows(path: &Path, head: Vec<String>, rows: impl Iterator<Item = (String, SentimentVector)>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    w.write_record(&head)?;
    for (key, v) in rows {
        let mut rec = vec![key];
        rec.extend(v.to_array().iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_rows(path: &Path, head: Vec<String>) -> Result<Vec<(String, SentimentVector)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let got = rdr.headers()?.clone();
    for (i, want) in head.iter().enumerate() {
        match got.get(i) {
            Some(g) if g == want => {}
            Some(g) => {
                return Err(Error::Schema {
                    path: path.to_path_buf(),
                    column: want.clone(),
                    problem: format!("expected at position {i}, found `{g}`"),
                })
            }
            None => {
                return Err(Error::Schema {
                    path: path.to_path_buf(),
                    column: want.clone(),
                    problem: "missing".into(),
                })
            }
        }
    }
    if got.len() > head.len() {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            column: got[head.len()].to_string(),
            problem: "unexpected column".into(),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut a = [0.0; 7];
        for (c, slot) in a.iter_mut().enumerate() {
            let raw = &rec[c + 1];
            *slot = raw
                .parse()
                .map_err(|_| Error::Data(format!("{}: bad {} value {raw:?}", path.display(), head[c + 1])))?;
        }
        let v = SentimentVector::from_array(a);
        v.validate()?;
        out.push((rec[0].to_string(), v));
    }
    Ok(out)
}

/// Writes `date,gnews_flair,...,gnews_sid_com`.
pub fn write_daily_csv(path: &Path, rows: &[DailySentiment]) -> Result<()> {
    write_rows(
        path,
        header("date", "gnews"),
        rows.iter().map(|r| (r.date.to_string(), r.vector)),
    )
}

/// Reads a daily file; the article count is not stored, so zero vectors come
/// back with `n_articles == 0` and others with 1.
pub fn read_daily_csv(path: &Path) -> Result<Vec<DailySentiment>> {
    read_rows(path, header("date", "gnews"))?
        .into_iter()
        .map(|(k, vector)| {
            let date = k
                .parse()
                .map_err(|_| Error::Data(format!("{}: bad date {k:?}", path.display())))?;
            Ok(DailySentiment {
                date,
                n_articles: usize::from(!vector.is_zero()),
                vector,
            })
        })
        .collect()
}

/// Writes `timestamp,reddit_flair,...,reddit_sid_com`. Empty hours are the
/// all-zero rows (a scored post always has `sid_neu + sid_pos + sid_neg = 1`).
pub fn write_hourly_csv(path: &Path, rows: &[HourlySentiment]) -> Result<()> {
    write_rows(
        path,
        header("timestamp", "reddit"),
        rows.iter().map(|r| (crate::ingest::format_timestamp(r.hour), r.vector)),
    )
}

pub fn read_hourly_csv(path: &Path) -> Result<Vec<HourlySentiment>> {
    read_rows(path, header("timestamp", "reddit"))?
        .into_iter()
        .map(|(k, vector)| {
            let hour = DateTime::parse_from_rfc3339(&k)
                .map_err(|_| Error::Data(format!("{}: bad timestamp {k:?}", path.display())))?
                .with_timezone(&Utc);
            Ok(HourlySentiment {
                hour,
                n_posts: usize::from(!vector.is_zero()),
                vector,
            })
        })
        .collect()
}

/// Writes a per-item score table (one row per article or post) for auditing.
pub fn write_item_scores(path: &Path, rows: &[(String, SentimentVector)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "key,{}", CHANNELS.join(",")).map_err(|e| Error::io(path, e))?;
    for (k, v) in rows {
        let vals: Vec<String> = v.to_array().iter().map(|x| x.to_string()).collect();
        writeln!(w, "{k},{}", vals.join(",")).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn flair(v: f64) -> SentimentVector {
        SentimentVector {
            flair: v,
            ..SentimentVector::ZERO
        }
    }

    #[test]
    fn daily_mean() {
        assert_eq!(aggregate_daily_news(&[flair(0.2), flair(0.6)]).flair, 0.4);
        let one = SentimentVector {
            flair: 0.1,
            sid_neu: 1.0,
            ..SentimentVector::ZERO
        };
        assert_eq!(aggregate_daily_news(&[one]), one);
        assert_eq!(aggregate_daily_news(&[]), SentimentVector::ZERO);
    }

    #[test]
    fn hourly_mean_and_gap() {
        let t = |h, m| Utc.with_ymd_and_hms(2018, 1, 1, h, m, 0).unwrap();
        let vals = [-0.9971, -0.9999, -0.9991, -0.9909, 0.9731];
        let mut posts: Vec<_> = vals.iter().enumerate().map(|(i, v)| (t(0, i as u32 * 10), flair(*v))).collect();
        let b = bucketize_hourly(&posts);
        assert_eq!(b.len(), 1);
        assert!((b[0].vector.flair - -0.60278).abs() < 1e-12);

        posts.push((t(2, 5), flair(0.5)));
        let b = bucketize_hourly(&posts);
        assert_eq!(b.len(), 3);
        assert!(b[1].is_empty());
        assert_eq!(b[1].vector, SentimentVector::ZERO);
        assert_eq!(b[2].vector.flair, 0.5);
        assert!(bucketize_hourly(&[]).is_empty());
    }

    #[test]
    fn csv_round_trip_uses_table_headers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("gnews.csv");
        let day = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        let v = SentimentVector {
            flair: 0.0426,
            sid_neu: 1.0,
            ..SentimentVector::ZERO
        };
        write_daily_csv(&p, &[DailySentiment { date: day, vector: v, n_articles: 9 }]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with(
            "date,gnews_flair,gnews_tb_polarity,gnews_tb_subjectivity,gnews_sid_pos,gnews_sid_neg,gnews_sid_neu,gnews_sid_com\n"
        ));
        let back = read_daily_csv(&p).unwrap();
        assert_eq!(back[0].vector, v);

        let p = dir.path().join("reddit.csv");
        let hour = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
        write_hourly_csv(&p, &[HourlySentiment { hour, vector: v, n_posts: 2 }]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("timestamp,reddit_flair,"));
        assert_eq!(read_hourly_csv(&p).unwrap()[0].hour, hour);
    }
}
