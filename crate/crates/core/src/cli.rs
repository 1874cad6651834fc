//! Command-line front end. Every verb reads and writes the same CSV layouts the
//! library uses, so stages can be run one at a time.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, Utc};
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fuse;
use crate::ingest::{self, HttpClient, HttpPolicy, KlineSource, NewsSource, Pair, RedditSource, TimeRange, Warnings};
use crate::neural::DEFAULT_SEED;
use crate::runner::{self, ExperimentConfig, ExperimentResult, Overrides, ReportOptions, SynthSpec};
use crate::sentiment::{self, ExternalStore, Scorer};

#[derive(Debug, Parser)]
#[command(name = "sentiforge", version, about = "Sentiment-fused Bitcoin price forecasting pipeline")]
pub struct Cli {
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collect raw records into canonical CSV.
    #[command(subcommand)]
    Ingest(IngestCmd),
    /// Score raw records into sentiment tables.
    #[command(subcommand)]
    Score(ScoreCmd),
    /// Join prices and sentiment into the hourly merged table.
    Fuse(FuseArgs),
    /// List or run experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Re-render a report from a saved results file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Read from a fixture directory instead of the network.
    #[arg(long, env = "SENTIFORGE_FIXTURES_DIR")]
    pub fixtures: Option<PathBuf>,
    /// First day (YYYY-MM-DD) or instant (RFC 3339), inclusive.
    #[arg(long)]
    pub from: String,
    /// Last day (inclusive) or instant (exclusive).
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum IngestCmd {
    News {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, default_value = "bitcoin")]
        query: String,
        #[arg(long, default_value = "https://www.google.com")]
        search_base: String,
    },
    Reddit {
        #[command(flatten)]
        src: SourceArgs,
        #[arg(long, default_value = "Bitcoin")]
        subreddit: String,
        #[arg(long, default_value = "bitcoin")]
        keyword: String,
        #[arg(long, default_value_t = ingest::REDDIT_PAGE_SIZE)]
        page_size: usize,
        #[arg(long, env = "SENTIFORGE_PUSHSHIFT_URL", default_value = "https://api.pushshift.io")]
        base_url: String,
    },
    Klines {
        #[command(flatten)]
        src: SourceArgs,
        /// BTCUSDT, LTCUSD or ETHUSD.
        #[arg(long)]
        pair: String,
        #[arg(long, env = "SENTIFORGE_EXCHANGE_URL", default_value = "https://api.binance.com")]
        base_url: String,
    },
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `key,value` CSV of precomputed neural scores for the flair channel.
    #[arg(long)]
    pub external: Option<PathBuf>,
    /// Also write one scored row per article or post.
    #[arg(long)]
    pub items: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ScoreCmd {
    News(ScoreArgs),
    Reddit(ScoreArgs),
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Daily news sentiment (from `score news`).
    #[arg(long)]
    pub gnews: PathBuf,
    /// Hourly Reddit sentiment (from `score reddit`).
    #[arg(long)]
    pub reddit: PathBuf,
    #[arg(long)]
    pub btc: PathBuf,
    #[arg(long)]
    pub ltc: PathBuf,
    #[arg(long)]
    pub eth: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    List {
        /// Matrix file to use instead of the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the matrix as an editable TOML file.
        #[arg(long)]
        toml: bool,
    },
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment id to run; repeat for several.
    #[arg(long, conflicts_with = "all", required_unless_present = "all")]
    pub id: Vec<u32>,
    /// Run every experiment in the matrix.
    #[arg(long)]
    pub all: bool,
    /// Matrix file to use instead of the built-in one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Merged table from `fuse`.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    pub merged: Option<PathBuf>,
    /// Generate a synthetic merged table of this many rows instead.
    #[arg(long)]
    pub synthetic: Option<usize>,
    /// Where results.json, summary.csv and per-experiment outputs go.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Window length in hours, replacing each experiment's lookback days.
    #[arg(long)]
    pub lookback_hours: Option<usize>,
    /// Training epochs, replacing each experiment's own.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Keep every Nth window, counted back from the most recent.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Use only the most recent N rows of the merged table.
    #[arg(long)]
    pub max_rows: Option<usize>,
    /// Seed for weight init, shuffling and synthetic data.
    #[arg(long, env = "SENTIFORGE_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Share of windows, oldest first, used for training.
    #[arg(long, default_value_t = runner::DEFAULT_TRAIN_FRACTION)]
    pub train_fraction: f64,
    /// Experiments to run concurrently.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Record wall time in summary.csv.
    #[arg(long)]
    pub wall_time: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `results.json` written by `experiment run`.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub wall_time: bool,
}

/// Parses arguments, runs the verb and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest(c) => ingest_cmd(c),
        Command::Score(c) => score_cmd(c),
        Command::Fuse(a) => fuse_cmd(a),
        Command::Experiment(ExperimentCmd::List { config, toml }) => {
            let m = matrix(config.as_deref())?;
            let mut out = String::new();
            if toml {
                out = runner::matrix_to_toml(&m)?;
            } else {
                out.push_str("id  lookback  units  notes  architecture    features\n");
                for c in &m {
                    let notes: Vec<String> = c.notes.iter().map(u8::to_string).collect();
                    let _ = writeln!(
                        out,
                        "{:<3} {:<9} {:<6} {:<6} {:<15} {}",
                        c.id,
                        c.lookback_days,
                        c.units,
                        notes.join(","),
                        c.architecture()?.label(),
                        c.features.len()
                    );
                }
            }
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = std::io::stdout().write_all(out.as_bytes());
            Ok(())
        }
        Command::Experiment(ExperimentCmd::Run(a)) => run_cmd(a),
        Command::Report(a) => {
            let text = std::fs::read_to_string(&a.results).map_err(|e| Error::io(&a.results, e))?;
            let results: Vec<ExperimentResult> = serde_json::from_str(&text)?;
            runner::emit_report(&results, &a.out_dir, ReportOptions { wall_time: a.wall_time })
        }
    }
}

fn matrix(config: Option<&Path>) -> Result<Vec<ExperimentConfig>> {
    match config {
        Some(p) => runner::load_matrix(p),
        None => Ok(runner::builtin_matrix()),
    }
}

/// A bare date means midnight; as an upper bound it means the end of that day.
fn parse_bound(s: &str, upper: bool) -> Result<DateTime<Utc>> {
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        let t = d.and_time(NaiveTime::MIN).and_utc();
        return Ok(if upper { t + Duration::days(1) } else { t });
    }
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| Error::Config(format!("`{s}` is neither YYYY-MM-DD nor an RFC 3339 timestamp")))
}

fn range(src: &SourceArgs) -> Result<TimeRange> {
    TimeRange::new(parse_bound(&src.from, false)?, parse_bound(&src.to, true)?)
}

fn report_warnings(w: &Warnings) {
    if w.count > 0 {
        eprintln!("{} warning(s); rerun with -v for details", w.count);
    }
}

fn ingest_cmd(cmd: IngestCmd) -> Result<()> {
    let client = HttpClient::new(HttpPolicy::default());
    match cmd {
        IngestCmd::News { src, query, search_base } => {
            let r = range(&src)?;
            let source = match &src.fixtures {
                Some(d) => NewsSource::Fixtures(d.clone()),
                None => NewsSource::Http {
                    client: &client,
                    search_base,
                },
            };
            let mut all = Vec::new();
            let mut day = r.start.date_naive();
            while day.and_time(NaiveTime::MIN).and_utc() < r.end {
                all.extend(ingest::fetch_news(&source, &query, day)?);
                day = day.succ_opt().expect("date in range");
            }
            ingest::persist(&all, &src.out)?;
            println!("{} articles -> {}", all.len(), src.out.display());
        }
        IngestCmd::Reddit {
            src,
            subreddit,
            keyword,
            page_size,
            base_url,
        } => {
            let source = match &src.fixtures {
                Some(d) => RedditSource::Fixtures {
                    dir: d.clone(),
                    page_size,
                },
                None => RedditSource::Http {
                    client: &client,
                    base_url,
                    page_size,
                },
            };
            let got = ingest::fetch_reddit_posts(&source, &subreddit, &keyword, range(&src)?)?;
            report_warnings(&got.warnings);
            ingest::persist(&got.posts, &src.out)?;
            println!("{} posts in {} pages -> {}", got.posts.len(), got.pages, src.out.display());
        }
        IngestCmd::Klines { src, pair, base_url } => {
            let source = match &src.fixtures {
                Some(d) => KlineSource::Fixtures(d.clone()),
                None => KlineSource::Http {
                    client: &client,
                    base_url,
                },
            };
            let got = ingest::fetch_klines(&source, &pair, range(&src)?)?;
            for g in &got.gaps {
                log::warn!("{pair}: no candle for {}", ingest::format_timestamp(*g));
            }
            ingest::persist(&got.bars, &src.out)?;
            println!("{} bars, {} gaps -> {}", got.bars.len(), got.gaps.len(), src.out.display());
        }
    }
    Ok(())
}

fn scorer(external: Option<&Path>) -> Result<Scorer> {
    let store = match external {
        Some(p) => ExternalStore::load(p)?,
        None => ExternalStore::empty(),
    };
    Ok(Scorer::bundled(store))
}

/// Call right after the first scoring pass, before any item rows are scored again.
fn report_misses(s: &Scorer, items: usize) {
    let n = s.external.misses();
    if n > 0 {
        eprintln!("{n} of {items} item(s) had no external score; their flair channel is {}", s.external.default_value());
    }
}

fn score_cmd(cmd: ScoreCmd) -> Result<()> {
    match cmd {
        ScoreCmd::News(a) => {
            let s = scorer(a.external.as_deref())?;
            let articles: Vec<ingest::NewsArticle> = ingest::load(&a.input)?;
            let (Some(first), Some(last)) = (
                articles.iter().map(|x| x.date).min(),
                articles.iter().map(|x| x.date).max(),
            ) else {
                return Err(Error::Data(format!("{}: no articles to score", a.input.display())));
            };
            let mut w = Warnings::default();
            let days = s.score_news(&articles, first, last, &mut w);
            report_warnings(&w);
            report_misses(&s, articles.len());
            if let Some(items) = &a.items {
                let rows: Vec<_> = articles
                    .iter()
                    .map(|x| (sentiment::news_key(x.date, x.rank), s.score_article(x)))
                    .collect();
                sentiment::write_item_scores(items, &rows)?;
            }
            sentiment::write_daily_csv(&a.out, &days)?;
            println!("{} days -> {}", days.len(), a.out.display());
        }
        ScoreCmd::Reddit(a) => {
            let s = scorer(a.external.as_deref())?;
            let posts: Vec<ingest::RedditPost> = ingest::load(&a.input)?;
            let hours = s.score_reddit(&posts);
            report_misses(&s, posts.len());
            if let Some(items) = &a.items {
                let rows: Vec<_> = posts.iter().map(|p| (p.post_id.clone(), s.score_post(p))).collect();
                sentiment::write_item_scores(items, &rows)?;
            }
            sentiment::write_hourly_csv(&a.out, &hours)?;
            println!("{} hours -> {}", hours.len(), a.out.display());
        }
    }
    Ok(())
}

fn fuse_cmd(a: FuseArgs) -> Result<()> {
    let gnews = fuse::expand_daily_to_hourly(&sentiment::read_daily_csv(&a.gnews)?)?;
    let reddit = sentiment::read_hourly_csv(&a.reddit)?;
    let btc = ingest::load_bars(&a.btc, Pair::BtcUsdt)?;
    let ltc = ingest::load_bars(&a.ltc, Pair::LtcUsd)?;
    let eth = ingest::load_bars(&a.eth, Pair::EthUsd)?;
    let merged = fuse::merge_all(&gnews, &reddit, &btc, &ltc, &eth)?;
    fuse::write_merged(&a.out_dir, &merged)?;
    println!(
        "{} rows, {} filled cells -> {}",
        merged.rows.len(),
        merged.fills.len(),
        a.out_dir.join("merged.csv").display()
    );
    Ok(())
}

fn run_cmd(a: RunArgs) -> Result<()> {
    let m = matrix(a.config.as_deref())?;
    let configs: Vec<ExperimentConfig> = if a.all {
        m
    } else {
        a.id.iter()
            .map(|id| {
                m.iter()
                    .find(|c| c.id == *id)
                    .cloned()
                    .ok_or_else(|| Error::Config(format!("no experiment with id {id}")))
            })
            .collect::<Result<_>>()?
    };
    let rows = match (&a.merged, a.synthetic) {
        (Some(p), _) => fuse::read_merged(p)?,
        (None, Some(n)) => runner::synthetic_rows(&SynthSpec {
            rows: n,
            seed: a.seed,
            ..SynthSpec::default()
        }),
        (None, None) => return Err(Error::Config("give --merged or --synthetic".into())),
    };
    let ov = Overrides {
        lookback_hours: a.lookback_hours,
        epochs: a.epochs,
        stride: a.stride,
        max_rows: a.max_rows,
        seed: a.seed,
        train_fraction: a.train_fraction,
    };
    let results = runner::run_many(&configs, &rows, &ov, a.parallel)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let path = a.out_dir.join("results.json");
    std::fs::write(&path, serde_json::to_string(&results)?).map_err(|e| Error::io(&path, e))?;
    runner::emit_report(&results, &a.out_dir, ReportOptions { wall_time: a.wall_time })?;
    for r in &results {
        println!(
            "experiment {:>2}: test RMSE {:.4}  test MAE {:.4}",
            r.id, r.metrics.test_rmse, r.metrics.test_mae
        );
    }
    Ok(())
}
