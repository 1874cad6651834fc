//! Feature selection, min-max scaling and sliding windows over the merged table.
//!
//! Windows are not materialised: the dataset keeps the scaled series once and
//! hands out borrowed `seq_len × n_features` slices by start index, so a
//! 1440-step lookback over two years of hours fits in memory.

use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuse::{column_index, FeatureRow};
use crate::neural::Samples;

pub const TARGET_COLUMN: &str = "close_BTCUSDT";
pub const N_SELECTABLE: usize = 19;

/// Columns an experiment can switch on, in canonical order.
pub const SELECTABLE: [&str; N_SELECTABLE] = [
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
    "reddit_flair",
    "reddit_tb_polarity",
    "reddit_tb_subjectivity",
    "reddit_sid_pos",
    "reddit_sid_neg",
];

const N_PRICE: usize = 9;
const N_SENT: usize = 5;
const SENT_CHANNELS: [&str; N_SENT] = ["flair", "tb_polarity", "tb_subjectivity", "sid_pos", "sid_neg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    flags: [bool; N_SELECTABLE],
    sum_sentiment: bool,
}

impl FeatureMask {
    pub fn new(flags: [bool; N_SELECTABLE], sum_sentiment: bool) -> Result<Self> {
        let m = FeatureMask { flags, sum_sentiment };
        m.validate()?;
        Ok(m)
    }

    pub fn from_names<S: AsRef<str>>(names: &[S], sum_sentiment: bool) -> Result<Self> {
        let mut flags = [false; N_SELECTABLE];
        for n in names {
            let n = n.as_ref();
            let i = SELECTABLE
                .iter()
                .position(|c| *c == n)
                .ok_or_else(|| Error::Config(format!("feature `{n}` is not selectable")))?;
            flags[i] = true;
        }
        Self::new(flags, sum_sentiment)
    }

    pub fn all(sum_sentiment: bool) -> Self {
        FeatureMask {
            flags: [true; N_SELECTABLE],
            sum_sentiment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.flags.iter().any(|f| *f) {
            return Err(Error::Config("feature mask selects no columns".into()));
        }
        if self.sum_sentiment {
            for (c, name) in SENT_CHANNELS.iter().enumerate() {
                let g = self.flags[N_PRICE + c];
                let r = self.flags[N_PRICE + N_SENT + c];
                if g != r {
                    return Err(Error::Config(format!(
                        "summed sentiment needs both gnews_{name} and reddit_{name} selected"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn flags(&self) -> &[bool; N_SELECTABLE] {
        &self.flags
    }

    pub fn sum_sentiment(&self) -> bool {
        self.sum_sentiment
    }

    pub fn selected(&self) -> Vec<&'static str> {
        SELECTABLE.iter().zip(self.flags).filter(|(_, f)| *f).map(|(c, _)| *c).collect()
    }

    /// Names of the matrix columns this mask produces, summed channels as `sum_<channel>`.
    pub fn output_columns(&self) -> Vec<String> {
        let mut out: Vec<String> = SELECTABLE[..N_PRICE]
            .iter()
            .zip(&self.flags[..N_PRICE])
            .filter(|(_, f)| **f)
            .map(|(c, _)| c.to_string())
            .collect();
        if self.sum_sentiment {
            for (c, name) in SENT_CHANNELS.iter().enumerate() {
                if self.flags[N_PRICE + c] {
                    out.push(format!("sum_{name}"));
                }
            }
        } else {
            out.extend(
                SELECTABLE[N_PRICE..]
                    .iter()
                    .zip(&self.flags[N_PRICE..])
                    .filter(|(_, f)| **f)
                    .map(|(c, _)| c.to_string()),
            );
        }
        out
    }

    pub fn n_outputs(&self) -> usize {
        self.output_columns().len()
    }
}

/// Row-major feature matrix plus the raw target column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub timestamps: Vec<DateTime<Utc>>,
    /// `n_rows × columns.len()`, row-major.
    pub data: Vec<f64>,
    pub target: Vec<f64>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let f = self.n_features();
        &self.data[i * f..(i + 1) * f]
    }
}

pub fn select_features(rows: &[FeatureRow], mask: &FeatureMask) -> Result<FeatureMatrix> {
    mask.validate()?;
    let idx = |name: &str| column_index(name).ok_or_else(|| Error::Data(format!("merged table has no column `{name}`")));
    let target_idx = idx(TARGET_COLUMN)?;

    // Each output column is the sum of one or two source columns.
    let mut sources: Vec<Vec<usize>> = Vec::new();
    for (c, f) in SELECTABLE[..N_PRICE].iter().zip(&mask.flags[..N_PRICE]) {
        if *f {
            sources.push(vec![idx(c)?]);
        }
    }
    for (c, name) in SENT_CHANNELS.iter().enumerate() {
        let g = mask.flags[N_PRICE + c];
        let r = mask.flags[N_PRICE + N_SENT + c];
        if mask.sum_sentiment {
            if g && r {
                sources.push(vec![idx(&format!("gnews_{name}"))?, idx(&format!("reddit_{name}"))?]);
            }
        } else if g {
            sources.push(vec![idx(&format!("gnews_{name}"))?]);
        }
    }
    if !mask.sum_sentiment {
        for (c, name) in SENT_CHANNELS.iter().enumerate() {
            if mask.flags[N_PRICE + N_SENT + c] {
                sources.push(vec![idx(&format!("reddit_{name}"))?]);
            }
        }
    }

    let mut data = Vec::with_capacity(rows.len() * sources.len());
    for r in rows {
        for s in &sources {
            data.push(s.iter().map(|&i| r.values[i]).sum());
        }
    }
    Ok(FeatureMatrix {
        columns: mask.output_columns(),
        timestamps: rows.iter().map(|r| r.timestamp).collect(),
        data,
        target: rows.iter().map(|r| r.values[target_idx]).collect(),
    })
}

/// Per-column min-max parameters, fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

fn scale(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn unscale(y: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        y * (hi - lo) + lo
    } else {
        lo
    }
}

impl ScalerState {
    /// Fits on rows `rows` of `m` (features) and on `target_rows` of the target.
    pub fn fit(
        m: &FeatureMatrix,
        rows: std::ops::Range<usize>,
        target_rows: std::ops::Range<usize>,
    ) -> Result<Self> {
        if rows.is_empty() || target_rows.is_empty() {
            return Err(Error::Data("cannot fit a scaler on zero rows".into()));
        }
        let f = m.n_features();
        let mut lo = vec![f64::INFINITY; f];
        let mut hi = vec![f64::NEG_INFINITY; f];
        for i in rows {
            for (j, &v) in m.row(i).iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        let t = &m.target[target_rows];
        Ok(ScalerState {
            feature_min: lo,
            feature_max: hi,
            target_min: t.iter().copied().fold(f64::INFINITY, f64::min),
            target_max: t.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn apply_feature(&self, j: usize, x: f64) -> f64 {
        scale(x, self.feature_min[j], self.feature_max[j])
    }

    pub fn invert_feature(&self, j: usize, y: f64) -> f64 {
        unscale(y, self.feature_min[j], self.feature_max[j])
    }

    pub fn apply_target(&self, x: f64) -> f64 {
        scale(x, self.target_min, self.target_max)
    }

    pub fn invert_target(&self, y: f64) -> f64 {
        unscale(y, self.target_min, self.target_max)
    }

    /// Scales a row-major matrix with `feature_min.len()` columns.
    pub fn apply(&self, data: &[f64]) -> Vec<f64> {
        let f = self.feature_min.len();
        data.iter().enumerate().map(|(k, &x)| self.apply_feature(k % f, x)).collect()
    }

    pub fn invert(&self, data: &[f64]) -> Vec<f64> {
        let f = self.feature_min.len();
        data.iter().enumerate().map(|(k, &y)| self.invert_feature(k % f, y)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub seq_len: usize,
    pub stride: usize,
}

impl WindowSpec {
    pub fn days(lookback_days: usize) -> Self {
        WindowSpec {
            seq_len: lookback_days * 24,
            stride: 1,
        }
    }
}

#[derive(Debug)]
struct Series {
    columns: Vec<String>,
    timestamps: Vec<DateTime<Utc>>,
    n_features: usize,
    /// Model-space inputs (scaled once a scaler is fitted).
    inputs: Vec<f64>,
    /// Model-space targets, per row.
    targets: Vec<f64>,
    raw_targets: Vec<f64>,
}

/// Sliding windows over one series. Sample `i` covers rows
/// `[start_i, start_i + seq_len)` and targets row `start_i + seq_len`.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    series: Arc<Series>,
    spec: WindowSpec,
    starts: Vec<usize>,
    scaler: Option<ScalerState>,
}

pub fn make_windows(matrix: FeatureMatrix, lookback_days: usize) -> Result<WindowedDataset> {
    make_windows_with(matrix, WindowSpec::days(lookback_days))
}

/// Windows with an explicit sequence length and stride. With stride > 1 the
/// most recent window is always kept and earlier ones are taken every
/// `stride` rows back from it.
pub fn make_windows_with(matrix: FeatureMatrix, spec: WindowSpec) -> Result<WindowedDataset> {
    if spec.seq_len == 0 || spec.stride == 0 {
        return Err(Error::Config("sequence length and stride must be at least 1".into()));
    }
    let n = matrix.n_rows();
    if n <= spec.seq_len {
        return Err(Error::Data(format!(
            "{n} rows is not enough for a {}-step window; need at least {}",
            spec.seq_len,
            spec.seq_len + 1
        )));
    }
    let last = n - spec.seq_len - 1;
    let starts: Vec<usize> = (0..=last).filter(|s| (last - s) % spec.stride == 0).collect();
    let series = Series {
        n_features: matrix.n_features(),
        inputs: matrix.data,
        targets: matrix.target.clone(),
        raw_targets: matrix.target,
        columns: matrix.columns,
        timestamps: matrix.timestamps,
    };
    Ok(WindowedDataset {
        series: Arc::new(series),
        spec,
        starts,
        scaler: None,
    })
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn seq_len(&self) -> usize {
        self.spec.seq_len
    }

    pub fn stride(&self) -> usize {
        self.spec.stride
    }

    pub fn n_features(&self) -> usize {
        self.series.n_features
    }

    pub fn n_rows(&self) -> usize {
        self.series.timestamps.len()
    }

    pub fn columns(&self) -> &[String] {
        &self.series.columns
    }

    pub fn scaler(&self) -> Option<&ScalerState> {
        self.scaler.as_ref()
    }

    pub fn start(&self, i: usize) -> usize {
        self.starts[i]
    }

    /// `seq_len × n_features`, row-major, in model space.
    pub fn input(&self, i: usize) -> &[f64] {
        let f = self.series.n_features;
        let s = self.starts[i];
        &self.series.inputs[s * f..(s + self.spec.seq_len) * f]
    }

    /// Model-space target of sample `i`.
    pub fn target(&self, i: usize) -> f64 {
        self.series.targets[self.starts[i] + self.spec.seq_len]
    }

    /// Target of sample `i` in original units.
    pub fn raw_target(&self, i: usize) -> f64 {
        self.series.raw_targets[self.starts[i] + self.spec.seq_len]
    }

    pub fn target_time(&self, i: usize) -> DateTime<Utc> {
        self.series.timestamps[self.starts[i] + self.spec.seq_len]
    }

    /// Model-space prediction back to original units.
    pub fn invert_prediction(&self, y: f64) -> f64 {
        self.scaler.as_ref().map_or(y, |s| s.invert_target(y))
    }
}

impl Samples for WindowedDataset {
    fn len(&self) -> usize {
        WindowedDataset::len(self)
    }
    fn seq_len(&self) -> usize {
        WindowedDataset::seq_len(self)
    }
    fn n_features(&self) -> usize {
        WindowedDataset::n_features(self)
    }
    fn input(&self, i: usize) -> &[f64] {
        WindowedDataset::input(self, i)
    }
    fn target(&self, i: usize) -> f64 {
        WindowedDataset::target(self, i)
    }
}

/// Chronological split. The scaler is fitted on the rows that training windows
/// and targets touch and then applied to the whole series; train and test share
/// that scaled series.
pub fn split_train_test(ds: &WindowedDataset, fraction: f64) -> Result<(WindowedDataset, WindowedDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("train fraction must be in (0, 1), got {fraction}")));
    }
    let n = ds.len();
    let n_train = (n as f64 * fraction).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Data(format!(
            "split of {n} samples at {fraction} leaves an empty side ({n_train} train)"
        )));
    }
    let first_row = ds.starts[0];
    let last_target_row = ds.starts[n_train - 1] + ds.spec.seq_len;
    let raw = &ds.series;
    let matrix = FeatureMatrix {
        columns: raw.columns.clone(),
        timestamps: raw.timestamps.clone(),
        data: raw.inputs.clone(),
        target: raw.raw_targets.clone(),
    };
    let base = match &ds.scaler {
        Some(_) => return Err(Error::Config("dataset is already split and scaled".into())),
        None => matrix,
    };
    let scaler = ScalerState::fit(&base, first_row..last_target_row, first_row..last_target_row + 1)?;
    let series = Arc::new(Series {
        columns: base.columns.clone(),
        timestamps: base.timestamps.clone(),
        n_features: base.n_features(),
        inputs: scaler.apply(&base.data),
        targets: base.target.iter().map(|&t| scaler.apply_target(t)).collect(),
        raw_targets: base.target,
    });
    let side = |starts: &[usize]| WindowedDataset {
        series: Arc::clone(&series),
        spec: ds.spec,
        starts: starts.to_vec(),
        scaler: Some(scaler.clone()),
    };
    Ok((side(&ds.starts[..n_train]), side(&ds.starts[n_train..])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seq_len: usize,
    pub stride: usize,
    pub n_rows: usize,
    pub n_samples: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Index of the first test sample.
    pub split_index: usize,
    pub columns: Vec<String>,
    pub first_test_target: DateTime<Utc>,
    pub scaler: ScalerState,
}

impl DatasetMeta {
    pub fn describe(train: &WindowedDataset, test: &WindowedDataset) -> Result<Self> {
        let scaler = train
            .scaler
            .clone()
            .ok_or_else(|| Error::Config("dataset metadata needs a split dataset".into()))?;
        Ok(DatasetMeta {
            seq_len: train.seq_len(),
            stride: train.stride(),
            n_rows: train.n_rows(),
            n_samples: train.len() + test.len(),
            n_train: train.len(),
            n_test: test.len(),
            split_index: train.len(),
            columns: train.columns().to_vec(),
            first_test_target: test.target_time(0),
            scaler,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuse::N_FEATURES;
    use chrono::{Duration, TimeZone};

    fn rows(n: usize) -> Vec<FeatureRow> {
        let t0 = Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap();
        (0..n)
            .map(|i| {
                let mut values = [0.0; N_FEATURES];
                for (j, v) in values.iter_mut().enumerate() {
                    *v = (i * 100 + j) as f64;
                }
                FeatureRow {
                    timestamp: t0 + Duration::hours(i as i64),
                    values,
                }
            })
            .collect()
    }

    #[test]
    fn mask_validation() {
        assert!(FeatureMask::new([false; N_SELECTABLE], false).is_err());
        assert!(FeatureMask::from_names(&["gnews_flair"], true).is_err());
        assert!(FeatureMask::from_names(&["gnews_sid_neu"], false).is_err());
        let m = FeatureMask::from_names(&["gnews_flair", "reddit_flair", "close_BTCUSDT"], true).unwrap();
        assert_eq!(m.output_columns(), ["close_BTCUSDT", "sum_flair"]);
    }

    #[test]
    fn summed_selection() {
        let r = rows(3);
        let m = FeatureMask::all(true);
        let x = select_features(&r, &m).unwrap();
        assert_eq!(x.n_features(), 14);
        let g = column_index("gnews_flair").unwrap();
        let rd = column_index("reddit_flair").unwrap();
        assert_eq!(x.row(1)[9], r[1].values[g] + r[1].values[rd]);
        assert_eq!(x.target[2], r[2].values[3]);
    }

    #[test]
    fn window_counts() {
        let x = select_features(&rows(30), &FeatureMask::all(false)).unwrap();
        let ds = make_windows_with(x.clone(), WindowSpec { seq_len: 24, stride: 1 }).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.input(0).len(), 24 * 19);
        assert_eq!(ds.raw_target(0), x.target[24]);
        let ds = make_windows_with(x.clone(), WindowSpec { seq_len: 29, stride: 1 }).unwrap();
        assert_eq!(ds.len(), 1);
        assert!(make_windows_with(x.clone(), WindowSpec { seq_len: 30, stride: 1 }).is_err());
        let ds = make_windows_with(x, WindowSpec { seq_len: 4, stride: 5 }).unwrap();
        assert_eq!(ds.start(ds.len() - 1), 25);
        assert_eq!(ds.start(0), 0);
    }

    #[test]
    fn split_is_chronological_and_scaled_on_train() {
        let x = select_features(&rows(124), &FeatureMask::all(false)).unwrap();
        let ds = make_windows_with(x, WindowSpec { seq_len: 24, stride: 1 }).unwrap();
        let (tr, te) = split_train_test(&ds, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        assert!(tr.target_time(tr.len() - 1) < te.target_time(0));
        let s = tr.scaler().unwrap();
        // Last train target is row 79 + 24 = 103.
        assert_eq!(s.target_max, (103 * 100 + 3) as f64);
        assert!(te.target(te.len() - 1) > 1.0);
        assert!((te.invert_prediction(te.target(3)) - te.raw_target(3)).abs() < 1e-9);
        assert!(split_train_test(&ds, 1.0).is_err());
        assert!(split_train_test(&ds, 0.001).is_err());
    }

    #[test]
    fn scaler_conventions() {
        let m = FeatureMatrix {
            columns: vec!["a".into(), "b".into()],
            timestamps: vec![Utc::now(); 2],
            data: vec![10.0, 5.0, 20.0, 5.0],
            target: vec![1.0, 2.0],
        };
        let s = ScalerState::fit(&m, 0..2, 0..2).unwrap();
        assert_eq!(s.apply_feature(0, 15.0), 0.5);
        assert_eq!(s.apply(&m.data), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.invert(&s.apply(&m.data)), m.data);
    }
}
