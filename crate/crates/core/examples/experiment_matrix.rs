//! Lists the built-in experiment matrix, runs a few experiments on a synthetic
//! merged table and writes the report next to the published numbers.
//!
//!     cargo run --release --example experiment_matrix -- out/

use sentiforge::runner::{
    builtin_matrix, emit_report, paper_metrics, run_many, synthetic_rows, Overrides, ReportOptions, SynthSpec,
};

fn main() -> sentiforge::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "experiment_matrix_out".into());
    let matrix = builtin_matrix();
    for c in &matrix {
        println!(
            "{:>2}  {:>3}d  {:>2} units  {:<16} {} features",
            c.id,
            c.lookback_days,
            c.units,
            c.architecture()?.label(),
            c.features.len()
        );
    }
    let picked: Vec<_> = matrix.into_iter().filter(|c| [4, 5, 17].contains(&c.id)).collect();
    let rows = synthetic_rows(&SynthSpec::default());
    let ov = Overrides {
        lookback_hours: Some(48),
        epochs: Some(3),
        ..Overrides::default()
    };
    let results = run_many(&picked, &rows, &ov, 3)?;
    for r in &results {
        let paper = paper_metrics(r.id).expect("built-in id");
        println!(
            "experiment {:>2}: test RMSE {:>8.2} (published {:>7.2} on the original data)",
            r.id, r.metrics.test_rmse, paper.test_rmse
        );
    }
    emit_report(&results, std::path::Path::new(&out), ReportOptions::default())?;
    println!("report written to {out}/");
    Ok(())
}
