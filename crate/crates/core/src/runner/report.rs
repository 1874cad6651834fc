use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{paper_metrics, ExperimentResult, Prediction, PAPER_METRICS_LABEL};
use crate::error::{Error, Result};
use crate::ingest::format_timestamp;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Adds a `wall_time_s` column; summaries are then no longer byte-stable.
    pub wall_time: bool,
}

/// Writes `summary.csv`, `paper_reference.csv` and an `expr_<id>/` directory
/// per result holding predictions, loss history, dataset metadata and a plot.
pub fn emit_report(results: &[ExperimentResult], out_dir: &Path, opts: ReportOptions) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Config("nothing to report: no experiment results".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut summary = String::from("id,architecture,seed,train_rmse,test_rmse,train_mae,test_mae");
    if opts.wall_time {
        summary.push_str(",wall_time_s");
    }
    summary.push('\n');
    let mut reference = String::from(
        "id,paper_train_rmse,paper_test_rmse,paper_train_mae,paper_test_mae,delta_test_rmse,status\n",
    );
    for r in results {
        let m = &r.metrics;
        let _ = write!(
            summary,
            "{},{},{},{},{},{},{}",
            r.id,
            r.architecture.label(),
            r.seed,
            m.train_rmse,
            m.test_rmse,
            m.train_mae,
            m.test_mae
        );
        if opts.wall_time {
            let _ = write!(summary, ",{:.3}", r.wall_time_secs);
        }
        summary.push('\n');
        if let Some(p) = paper_metrics(r.id) {
            let _ = writeln!(
                reference,
                "{},{},{},{},{},{},{PAPER_METRICS_LABEL}",
                r.id,
                p.train_rmse,
                p.test_rmse,
                p.train_mae,
                p.test_mae,
                m.test_rmse - p.test_rmse
            );
        }

        let dir = out_dir.join(format!("expr_{}", r.id));
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_predictions(&dir.join("predictions.csv"), r)?;
        let mut hist = format!("# seed {}\nepoch,train_rmse_scaled\n", r.seed);
        for (i, v) in r.history.epoch_rmse.iter().enumerate() {
            let _ = writeln!(hist, "{},{v}", i + 1);
        }
        write(&dir.join("history.csv"), &hist)?;
        r.meta.write(&dir.join("dataset.meta.json"))?;
        write(&dir.join("plot.svg"), &plot_svg(r))?;
    }
    write(&out_dir.join("summary.csv"), &summary)?;
    write(&out_dir.join("paper_reference.csv"), &reference)
}

pub fn write_predictions(path: &Path, r: &ExperimentResult) -> Result<()> {
    let mut s = String::from("split,timestamp,actual,predicted\n");
    for (split, rows) in [("train", &r.train), ("test", &r.test)] {
        for p in rows.iter() {
            let _ = writeln!(s, "{split},{},{},{}", format_timestamp(p.timestamp), p.actual, p.predicted);
        }
    }
    write(path, &s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

const W: f64 = 960.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;

/// Actual vs predicted close; train and test predictions drawn in separate colours.
/// The x axis spans exactly the first to the last prediction timestamp.
pub fn plot_svg(r: &ExperimentResult) -> String {
    let all: Vec<&Prediction> = r.train.iter().chain(&r.test).collect();
    let (t0, t1) = match (all.first(), all.last()) {
        (Some(a), Some(b)) => (a.timestamp.timestamp() as f64, b.timestamp.timestamp() as f64),
        _ => (0.0, 1.0),
    };
    let (lo, hi) = all
        .iter()
        .flat_map(|p| [p.actual, p.predicted])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 1.0, lo + 1.0) };
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let x = |p: &Prediction| PAD + (p.timestamp.timestamp() as f64 - t0) / tspan * (W - 2.0 * PAD);
    let y = |v: f64| H - PAD - (v - lo) / (hi - lo) * (H - 2.0 * PAD);
    let line = |pts: &mut dyn Iterator<Item = (f64, f64)>, color: &str| {
        let d: Vec<String> = pts.map(|(a, b)| format!("{a:.2},{b:.2}")).collect();
        format!("  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n", d.join(" "))
    };

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    let _ = writeln!(s, "  <title>Experiment {}: actual vs predicted close_BTCUSDT</title>", r.id);
    let _ = writeln!(s, "  <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "  <path d=\"M{PAD},{PAD} V{} H{}\" fill=\"none\" stroke=\"#444\"/>",
        H - PAD,
        W - PAD
    );
    s += &line(&mut all.iter().map(|p| (x(p), y(p.actual))), "#222222");
    s += &line(&mut r.train.iter().map(|p| (x(p), y(p.predicted))), "#1f77b4");
    s += &line(&mut r.test.iter().map(|p| (x(p), y(p.predicted))), "#2ca02c");
    if let (Some(a), Some(b)) = (all.first(), all.last()) {
        let _ = writeln!(
            s,
            "  <text x=\"{PAD}\" y=\"{}\" font-size=\"11\">{}</text>",
            H - PAD + 16.0,
            format_timestamp(a.timestamp)
        );
        let _ = writeln!(
            s,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            W - PAD,
            H - PAD + 16.0,
            format_timestamp(b.timestamp)
        );
    }
    let _ = writeln!(s, "  <text x=\"4\" y=\"{}\" font-size=\"11\">{lo:.2}</text>", H - PAD);
    let _ = writeln!(s, "  <text x=\"4\" y=\"{}\" font-size=\"11\">{hi:.2}</text>", PAD + 4.0);
    let _ = writeln!(
        s,
        "  <text x=\"{}\" y=\"20\" font-size=\"12\">actual (black), train prediction (blue), test prediction (green)</text>",
        PAD
    );
    s.push_str("</svg>\n");
    s
}
