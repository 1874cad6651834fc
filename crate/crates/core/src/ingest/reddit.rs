//! Reddit submissions from a Pushshift-compatible archive.
//!
//! Pagination walks a time cursor: every page is requested with
//! `after=<last publish time seen>` until a short page comes back or the
//! cursor reaches the end of the range.

use std::collections::HashSet;
use std::path::PathBuf;

use chrono::DateTime;
use serde_json::Value;

use super::http::{HttpClient, Verdict};
use super::{RedditPost, TimeRange, Warnings};
use crate::error::{Error, Result};

pub const DEFAULT_PAGE_SIZE: usize = 100;

pub enum RedditSource<'a> {
    Http {
        client: &'a HttpClient,
        base_url: String,
        page_size: usize,
    },
    /// `<dir>/reddit/<subreddit>.json` holding a Pushshift-shaped `{"data": [...]}`
    /// dump; queried with the same filter semantics as the live endpoint.
    Fixtures { dir: PathBuf, page_size: usize },
}

impl RedditSource<'_> {
    fn page_size(&self) -> usize {
        match self {
            RedditSource::Http { page_size, .. } | RedditSource::Fixtures { page_size, .. } => {
                (*page_size).max(1)
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RedditFetch {
    pub posts: Vec<RedditPost>,
    pub warnings: Warnings,
    /// Pages requested, including the final short or empty one.
    pub pages: usize,
}

struct PageQuery<'q> {
    subreddit: &'q str,
    keyword: &'q str,
    /// Exclusive lower bound, epoch seconds.
    after: i64,
    /// Exclusive upper bound, epoch seconds.
    before: i64,
    size: usize,
}

pub fn submission_search_url(
    base_url: &str,
    subreddit: &str,
    keyword: &str,
    after: i64,
    before: i64,
    size: usize,
) -> String {
    let enc = |s: &str| url::form_urlencoded::byte_serialize(s.as_bytes()).collect::<String>();
    format!(
        "{}/reddit/search/submission?subreddit={}&q={}&after={after}&before={before}&size={size}&sort=asc",
        base_url.trim_end_matches('/'),
        enc(subreddit),
        enc(keyword),
    )
}

pub fn fetch_reddit_posts(
    source: &RedditSource<'_>,
    subreddit: &str,
    keyword: &str,
    range: TimeRange,
) -> Result<RedditFetch> {
    if range.start >= range.end {
        return Err(Error::Config(format!(
            "reddit range must satisfy start < end (got {} .. {})",
            range.start, range.end
        )));
    }
    let size = source.page_size();
    let before = range.end.timestamp();
    let mut cursor = range.start.timestamp() - 1;
    let mut out = RedditFetch::default();
    let mut seen = HashSet::new();

    loop {
        let query = PageQuery {
            subreddit,
            keyword,
            after: cursor,
            before,
            size,
        };
        let records = match source {
            RedditSource::Http {
                client, base_url, ..
            } => fetch_page_http(client, base_url, &query)?,
            RedditSource::Fixtures { dir, .. } => fetch_page_fixture(dir, &query)?,
        };
        out.pages += 1;
        let returned = records.len();
        let mut last_ts = None;
        for rec in records {
            match parse_post(&rec) {
                Ok(post) => {
                    let ts = post.publish_date.timestamp();
                    last_ts = Some(last_ts.map_or(ts, |l: i64| l.max(ts)));
                    if range.contains(post.publish_date) && seen.insert(post.post_id.clone()) {
                        out.posts.push(post);
                    }
                }
                Err(why) => out.warnings.push(format!("skipped malformed submission: {why}")),
            }
        }
        let Some(last) = last_ts else { break };
        if returned < size || last <= cursor || last >= before - 1 {
            break;
        }
        cursor = last;
    }
    out.posts.sort_by_key(|p| p.publish_date);
    Ok(out)
}

fn fetch_page_http(client: &HttpClient, base_url: &str, q: &PageQuery<'_>) -> Result<Vec<Value>> {
    let url = submission_search_url(base_url, q.subreddit, q.keyword, q.after, q.before, q.size);
    client.get_with(&url, |resp| {
        if resp.status == 429 || resp.status >= 500 {
            return Verdict::Retry(format!("HTTP {}", resp.status));
        }
        if !(200..300).contains(&resp.status) {
            return Verdict::Retry(format!("archive returned HTTP {}", resp.status));
        }
        match serde_json::from_str::<Value>(&resp.body) {
            Ok(Value::Object(mut obj)) => match obj.remove("data") {
                Some(Value::Array(items)) => Verdict::Accept(items),
                _ => Verdict::Retry("response has no `data` array".into()),
            },
            Ok(_) => Verdict::Retry("response is not a JSON object".into()),
            Err(e) => Verdict::Retry(format!("invalid JSON: {e}")),
        }
    })
}

fn fetch_page_fixture(dir: &std::path::Path, q: &PageQuery<'_>) -> Result<Vec<Value>> {
    let path = dir.join("reddit").join(format!("{}.json", q.subreddit));
    if !path.exists() {
        return Ok(Vec::new());
    }
    let raw = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut doc: Value = serde_json::from_str(&raw)?;
    let Some(Value::Array(items)) = doc.get_mut("data").map(Value::take) else {
        return Err(Error::Data(format!("{} has no `data` array", path.display())));
    };
    let kw = q.keyword.to_lowercase();
    let mut hits: Vec<(i64, Value)> = items
        .into_iter()
        .filter_map(|v| {
            let ts = created_utc(&v)?;
            if ts <= q.after || ts >= q.before {
                return None;
            }
            let text = |k: &str| v.get(k).and_then(Value::as_str).unwrap_or("").to_lowercase();
            (kw.is_empty() || text("title").contains(&kw) || text("selftext").contains(&kw))
                .then_some((ts, v))
        })
        .collect();
    hits.sort_by_key(|(ts, _)| *ts);
    Ok(hits.into_iter().take(q.size).map(|(_, v)| v).collect())
}

fn created_utc(v: &Value) -> Option<i64> {
    match v.get("created_utc")? {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn parse_post(v: &Value) -> std::result::Result<RedditPost, String> {
    let s = |k: &str| -> String {
        match v.get(k) {
            Some(Value::String(s)) => s.clone(),
            _ => String::new(),
        }
    };
    let post_id = s("id");
    if post_id.is_empty() {
        return Err("missing `id`".into());
    }
    let ts = created_utc(v).ok_or_else(|| format!("{post_id}: missing or invalid `created_utc`"))?;
    let publish_date =
        DateTime::from_timestamp(ts, 0).ok_or_else(|| format!("{post_id}: timestamp out of range"))?;
    let title = s("title");
    if title.is_empty() {
        return Err(format!("{post_id}: missing `title`"));
    }
    let int = |k: &str| v.get(k).and_then(Value::as_i64).unwrap_or(0);
    Ok(RedditPost {
        post_id,
        title,
        selftext: s("selftext"),
        url: s("url"),
        author: s("author"),
        score: int("score"),
        publish_date,
        num_of_comments: int("num_comments").max(0) as u64,
        permalink: s("permalink"),
        flair_tag: s("link_flair_text"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn url_layout() {
        assert_eq!(
            submission_search_url("http://h:1/", "Bitcoin", "Bitcoin", 10, 20, 100),
            "http://h:1/reddit/search/submission?subreddit=Bitcoin&q=Bitcoin&after=10&before=20&size=100&sort=asc"
        );
    }

    #[test]
    fn parse_table_row() {
        let v = json!({
            "id": "7ne3y9", "title": "If Governments t...", "selftext": "Many state govts...",
            "author": "bit...", "score": 18, "created_utc": 1514765448, "num_comments": 14,
            "permalink": "/r/Bitcoin/comments/7ne3y9/", "url": "https://www.reddit.com/r/Bitcoin/comments/7ne3y9/"
        });
        let p = parse_post(&v).unwrap();
        assert_eq!(p.publish_date.to_rfc3339(), "2018-01-01T00:10:48+00:00");
        assert_eq!(p.num_of_comments, 14);
        assert_eq!(p.flair_tag, "");
        assert!(parse_post(&json!({"title": "x", "created_utc": 1})).is_err());
        assert!(parse_post(&json!({"id": "a", "title": "x", "created_utc": "soon"})).is_err());
    }
}
