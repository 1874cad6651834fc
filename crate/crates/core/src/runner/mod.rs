//! The seventeen-experiment matrix and its end-to-end execution.

mod matrix;
mod report;
mod synth;

use std::path::Path;
use std::time::Instant;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use matrix::{builtin_matrix, paper_metrics, PaperMetrics, PAPER_METRICS_LABEL};
pub use report::{emit_report, plot_svg, write_predictions, ReportOptions};
pub use synth::{constant_rows, synthetic_rows, SynthSpec};

use crate::dataset::{make_windows_with, select_features, split_train_test, DatasetMeta, FeatureMask, WindowSpec};
use crate::error::{Error, Result};
use crate::fuse::FeatureRow;
use crate::neural::{self, Architecture, Metrics, Model, ModelSpec, TrainConfig, TrainHistory, DEFAULT_SEED};

pub const SEED_ENV: &str = "SENTIFORGE_SEED";
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: u32,
    /// Selected input columns, by merged-table name.
    pub features: Vec<String>,
    /// Add matching news and Reddit channels into one feature.
    pub sum_sentiment: bool,
    pub lookback_days: usize,
    /// Hidden units per recurrent layer (and Conv1D filters).
    pub units: usize,
    pub batch_size: usize,
    pub epochs: usize,
    /// Architecture notes as printed in the results tables.
    pub notes: Vec<u8>,
}

impl ExperimentConfig {
    pub fn mask(&self) -> Result<FeatureMask> {
        FeatureMask::from_names(&self.features, self.sum_sentiment)
    }

    /// The architecture named by the single note in 2..=8.
    pub fn architecture(&self) -> Result<Architecture> {
        let arch: Vec<Architecture> = self.notes.iter().filter_map(|&n| note_architecture(n)).collect();
        match arch[..] {
            [a] => Ok(a),
            _ => Err(Error::Config(format!(
                "experiment {}: notes {:?} must name exactly one architecture (2..=8)",
                self.id, self.notes
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id == 0 {
            return Err(Error::Config("experiment ids start at 1".into()));
        }
        for &n in &self.notes {
            if !(1..=8).contains(&n) {
                return Err(Error::Config(format!("experiment {}: unknown note {n}", self.id)));
            }
        }
        if self.sum_sentiment != self.notes.contains(&1) {
            return Err(Error::Config(format!(
                "experiment {}: sum_sentiment must match the presence of note 1",
                self.id
            )));
        }
        if self.lookback_days == 0 || self.units == 0 {
            return Err(Error::Config(format!("experiment {}: lookback and units must be positive", self.id)));
        }
        self.architecture()?;
        self.mask()?;
        self.train_config(DEFAULT_SEED).validate()
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            ..TrainConfig::default()
        }
    }
}

pub fn note_architecture(note: u8) -> Option<Architecture> {
    Some(match note {
        2 => Architecture::Lstm,
        3 => Architecture::LstmLstm,
        4 | 7 => Architecture::LstmGru,
        5 => Architecture::Gru,
        6 => Architecture::GruGru,
        8 => Architecture::Conv1dLstm,
        _ => return None,
    })
}

/// On-disk matrix: a TOML file of `[[experiment]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub experiment: Vec<ExperimentConfig>,
}

pub fn matrix_to_toml(configs: &[ExperimentConfig]) -> Result<String> {
    toml::to_string(&MatrixFile {
        experiment: configs.to_vec(),
    })
    .map_err(|e| Error::Config(format!("cannot serialise matrix: {e}")))
}

pub fn matrix_from_toml(text: &str) -> Result<Vec<ExperimentConfig>> {
    let file: MatrixFile = toml::from_str(text).map_err(|e| Error::Config(format!("bad matrix file: {e}")))?;
    let mut ids = std::collections::HashSet::new();
    for c in &file.experiment {
        c.validate()?;
        if !ids.insert(c.id) {
            return Err(Error::Config(format!("duplicate experiment id {}", c.id)));
        }
    }
    Ok(file.experiment)
}

pub fn load_matrix(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    matrix_from_toml(&text)
}

/// Desk-scale knobs applied at run time; the canonical config is untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub lookback_hours: Option<usize>,
    pub epochs: Option<usize>,
    pub stride: Option<usize>,
    /// Keep only the most recent `max_rows` rows of the merged table.
    pub max_rows: Option<usize>,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for Overrides {
    fn default() -> Self {
        Overrides {
            lookback_hours: None,
            epochs: None,
            stride: None,
            max_rows: None,
            seed: DEFAULT_SEED,
            train_fraction: DEFAULT_TRAIN_FRACTION,
        }
    }
}

impl Overrides {
    /// Defaults with the seed taken from `SENTIFORGE_SEED` when set.
    pub fn from_env() -> Result<Self> {
        let mut o = Overrides::default();
        if let Ok(v) = std::env::var(SEED_ENV) {
            o.seed = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))?;
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub timestamp: DateTime<Utc>,
    pub actual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: u32,
    pub seed: u64,
    pub architecture: Architecture,
    pub metrics: Metrics,
    pub history: TrainHistory,
    pub train: Vec<Prediction>,
    pub test: Vec<Prediction>,
    pub meta: DatasetMeta,
    pub wall_time_secs: f64,
}

/// Select, scale, window, split, train and evaluate one experiment.
pub fn run_experiment(cfg: &ExperimentConfig, rows: &[FeatureRow], ov: &Overrides) -> Result<ExperimentResult> {
    let started = Instant::now();
    cfg.validate()?;
    if !(ov.train_fraction > 0.0 && ov.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0, 1), got {}",
            ov.train_fraction
        )));
    }
    let rows = match ov.max_rows {
        Some(m) if m < rows.len() => &rows[rows.len() - m..],
        _ => rows,
    };
    let window = WindowSpec {
        seq_len: ov.lookback_hours.unwrap_or(cfg.lookback_days * 24),
        stride: ov.stride.unwrap_or(1),
    };
    let mut train_cfg = cfg.train_config(ov.seed);
    if let Some(e) = ov.epochs {
        train_cfg.epochs = e;
    }
    train_cfg.validate()?;

    let matrix = select_features(rows, &cfg.mask()?)?;
    let windows = make_windows_with(matrix, window)?;
    let (train, test) = split_train_test(&windows, ov.train_fraction)?;
    let arch = cfg.architecture()?;
    let spec = ModelSpec::for_architecture(train.n_features(), arch, cfg.units)?;
    let mut model = Model::new(&spec, ov.seed)?;
    log::info!(
        "experiment {}: {} {} params, {} train / {} test windows of {} steps",
        cfg.id,
        arch.label(),
        model.n_params(),
        train.len(),
        test.len(),
        train.seq_len()
    );
    let history = neural::train(&mut model, &train, &train_cfg)?;

    let evaluate = |ds: &crate::dataset::WindowedDataset, model: &mut Model| -> Result<Vec<Prediction>> {
        let raw = neural::predict(model, ds, train_cfg.batch_size)?;
        Ok(raw
            .into_iter()
            .enumerate()
            .map(|(i, p)| Prediction {
                timestamp: ds.target_time(i),
                actual: ds.raw_target(i),
                predicted: ds.invert_prediction(p),
            })
            .collect())
    };
    let train_pred = evaluate(&train, &mut model)?;
    let test_pred = evaluate(&test, &mut model)?;
    let metrics = metrics_of(&train_pred, &test_pred)?;
    for (name, v) in [
        ("train_rmse", metrics.train_rmse),
        ("test_rmse", metrics.test_rmse),
        ("train_mae", metrics.train_mae),
        ("test_mae", metrics.test_mae),
    ] {
        if !v.is_finite() {
            return Err(Error::Divergence {
                epoch: train_cfg.epochs,
                batch: 0,
                detail: format!("experiment {}: {name} is {v}", cfg.id),
            });
        }
    }
    Ok(ExperimentResult {
        id: cfg.id,
        seed: ov.seed,
        architecture: arch,
        metrics,
        history,
        meta: DatasetMeta::describe(&train, &test)?,
        train: train_pred,
        test: test_pred,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

fn metrics_of(train: &[Prediction], test: &[Prediction]) -> Result<Metrics> {
    let split = |p: &[Prediction]| -> (Vec<f64>, Vec<f64>) { p.iter().map(|x| (x.predicted, x.actual)).unzip() };
    let (tp, ta) = split(train);
    let (sp, sa) = split(test);
    Ok(Metrics {
        train_rmse: neural::rmse(&tp, &ta)?,
        test_rmse: neural::rmse(&sp, &sa)?,
        train_mae: neural::mae(&tp, &ta)?,
        test_mae: neural::mae(&sp, &sa)?,
    })
}

/// Runs experiments in id order; with `parallel > 1` up to that many run at once.
/// Results come back in input order either way.
pub fn run_many(
    configs: &[ExperimentConfig],
    rows: &[FeatureRow],
    ov: &Overrides,
    parallel: usize,
) -> Result<Vec<ExperimentResult>> {
    if parallel <= 1 {
        return configs.iter().map(|c| run_experiment(c, rows, ov)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {parallel} workers: {e}")))?;
    pool.install(|| configs.par_iter().map(|c| run_experiment(c, rows, ov)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn notes_map_to_architectures() {
        assert_eq!(note_architecture(1), None);
        assert_eq!(note_architecture(4), note_architecture(7));
        assert_eq!(note_architecture(8), Some(Architecture::Conv1dLstm));
    }

    #[test]
    fn toml_round_trip() {
        let m = builtin_matrix();
        let text = matrix_to_toml(&m).unwrap();
        assert_eq!(matrix_from_toml(&text).unwrap(), m);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut c = builtin_matrix()[0].clone();
        c.notes = vec![1];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = builtin_matrix()[4].clone();
        c.sum_sentiment = true;
        assert!(c.validate().is_err());
        let mut c = builtin_matrix()[4].clone();
        c.epochs = 0;
        assert!(c.validate().is_err());
        let text = matrix_to_toml(&builtin_matrix()[..2]).unwrap().replace("id = 2", "id = 1");
        assert!(matrix_from_toml(&text).is_err());
    }

    #[test]
    fn constant_series_is_predicted_exactly() {
        let rows = constant_rows(400, 10_000.0);
        let ov = Overrides {
            lookback_hours: Some(12),
            epochs: Some(1),
            ..Overrides::default()
        };
        let r = run_experiment(&builtin_matrix()[4], &rows, &ov).unwrap();
        assert!(r.metrics.test_rmse < 0.01 * 10_000.0);
        assert_eq!(r.test.len(), r.meta.n_test);
    }

    #[test]
    fn too_few_rows_names_the_minimum() {
        let rows = constant_rows(30, 1.0);
        let err = run_experiment(&builtin_matrix()[4], &rows, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("1441"), "{err}");
    }
}
