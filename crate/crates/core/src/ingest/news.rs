//! Daily news collection.
//!
//! The live path issues one date-restricted search per day, follows up to ten
//! result links and keeps the readable body of each article. Body extraction is
//! a plain heuristic: paragraph text inside `<article>` when present, otherwise
//! every `<p>` on the page, with scripts and styles never reached.

use std::path::PathBuf;

use chrono::NaiveDate;
use scraper::{Html, Selector};
use serde::Deserialize;

use super::http::{HttpClient, Verdict};
use super::{NewsArticle, MAX_ARTICLES_PER_DAY};
use crate::error::{Error, Result};

pub enum NewsSource<'a> {
    Http {
        client: &'a HttpClient,
        /// Scheme and host of the search service, e.g. `https://www.google.com`.
        search_base: String,
    },
    /// `<dir>/news/<YYYY-MM-DD>.json`: a JSON array of `{"url", "text"}` objects in
    /// result order. Entries with empty or null text count as failed downloads.
    Fixtures(PathBuf),
}

#[derive(Deserialize)]
struct FixtureEntry {
    url: String,
    #[serde(default)]
    text: Option<String>,
}

/// Search URL for one calendar day.
pub fn news_search_url(search_base: &str, query: &str, day: NaiveDate) -> String {
    let kw = query.split_whitespace().collect::<Vec<_>>().join("+");
    let d = day.format("%m/%d/%Y");
    format!(
        "{}/search?q={kw}&hl=en&gl=us&as_drrb=b&tbas=0&tbs=cdr:1,cd_min:{d},cd_max:{d}",
        search_base.trim_end_matches('/')
    )
}

pub fn fetch_news(source: &NewsSource<'_>, query: &str, day: NaiveDate) -> Result<Vec<NewsArticle>> {
    if query.trim().is_empty() {
        return Err(Error::Config("news query must not be empty".into()));
    }
    match source {
        NewsSource::Fixtures(dir) => fetch_fixture_day(dir, day),
        NewsSource::Http {
            client,
            search_base,
        } => {
            let url = news_search_url(search_base, query, day);
            let page = client.get_with(&url, |resp| match resp.status {
                200..=299 => Verdict::Accept(resp.body),
                429 | 500.. => Verdict::Retry(format!("HTTP {}", resp.status)),
                s => Verdict::Fail(Error::Data(format!("news search returned HTTP {s}"))),
            })?;
            let links = extract_result_links(&page, search_base);
            let mut articles = Vec::new();
            for (i, link) in links.into_iter().enumerate() {
                let rank = (i + 1) as u8;
                match client.get(&link) {
                    Ok(resp) if (200..300).contains(&resp.status) => {
                        let text = extract_readable_text(&resp.body);
                        if text.is_empty() {
                            log::warn!("{day} rank {rank}: no readable body at {link}");
                        } else {
                            articles.push(NewsArticle {
                                date: day,
                                rank,
                                url: link,
                                full_text: text,
                            });
                        }
                    }
                    Ok(resp) => log::warn!("{day} rank {rank}: HTTP {} for {link}", resp.status),
                    Err(e) => log::warn!("{day} rank {rank}: skipped {link}: {e}"),
                }
            }
            Ok(articles)
        }
    }
}

fn fetch_fixture_day(dir: &std::path::Path, day: NaiveDate) -> Result<Vec<NewsArticle>> {
    let path = dir.join("news").join(format!("{day}.json"));
    if !path.exists() {
        return Ok(Vec::new());
    }
    let raw = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let entries: Vec<FixtureEntry> = serde_json::from_str(&raw)?;
    Ok(entries
        .into_iter()
        .take(MAX_ARTICLES_PER_DAY)
        .enumerate()
        .filter_map(|(i, e)| {
            let text = e.text.unwrap_or_default();
            (!text.trim().is_empty()).then(|| NewsArticle {
                date: day,
                rank: (i + 1) as u8,
                url: e.url,
                full_text: text,
            })
        })
        .collect())
}

/// Outbound result links from a search page, in page order, deduplicated,
/// at most ten. Redirect wrappers of the form `/url?q=<target>` are unwrapped.
pub fn extract_result_links(html: &str, search_base: &str) -> Vec<String> {
    let doc = Html::parse_document(html);
    let anchors = Selector::parse("a[href]").expect("static selector");
    let own_host = host(search_base);
    let mut out: Vec<String> = Vec::new();
    for a in doc.select(&anchors) {
        let href = a.value().attr("href").unwrap_or_default();
        let target = if let Some(rest) = href.strip_prefix("/url?") {
            url::form_urlencoded::parse(rest.as_bytes())
                .find(|(k, _)| k == "q" || k == "url")
                .map(|(_, v)| v.into_owned())
        } else if href.starts_with("http://") || href.starts_with("https://") {
            Some(href.to_string())
        } else {
            None
        };
        let Some(target) = target else { continue };
        if !(target.starts_with("http://") || target.starts_with("https://")) {
            continue;
        }
        let h = host(&target);
        if h.is_empty() || (!own_host.is_empty() && h == own_host) || h.ends_with("google.com") {
            continue;
        }
        if !out.contains(&target) {
            out.push(target);
        }
        if out.len() == MAX_ARTICLES_PER_DAY {
            break;
        }
    }
    out
}

fn host(u: &str) -> String {
    url::Url::parse(u)
        .ok()
        .and_then(|u| u.host_str().map(|h| h.to_string()))
        .unwrap_or_default()
}

/// Readable body text of an article page, paragraphs separated by newlines.
pub fn extract_readable_text(html: &str) -> String {
    let doc = Html::parse_document(html);
    let in_article = Selector::parse("article p").expect("static selector");
    let any_p = Selector::parse("p").expect("static selector");
    let mut paragraphs: Vec<String> = doc
        .select(&in_article)
        .map(|p| collapse(&p.text().collect::<String>()))
        .filter(|t| !t.is_empty())
        .collect();
    if paragraphs.is_empty() {
        paragraphs = doc
            .select(&any_p)
            .map(|p| collapse(&p.text().collect::<String>()))
            .filter(|t| !t.is_empty())
            .collect();
    }
    paragraphs.join("\n")
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}
