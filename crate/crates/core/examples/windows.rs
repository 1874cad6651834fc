//! Feature selection, sliding windows and the chronological split with
//! train-only scaling, on a synthetic merged table.

use sentiforge::dataset::{make_windows_with, select_features, split_train_test, DatasetMeta, WindowSpec};
use sentiforge::runner::{builtin_matrix, synthetic_rows, SynthSpec};

fn main() -> sentiforge::Result<()> {
    let rows = synthetic_rows(&SynthSpec {
        rows: 500,
        ..SynthSpec::default()
    });
    let cfg = &builtin_matrix()[3];
    let matrix = select_features(&rows, &cfg.mask()?)?;
    println!("experiment {} uses {} columns: {:?}", cfg.id, matrix.n_features(), matrix.columns);

    let ds = make_windows_with(matrix, WindowSpec { seq_len: 48, stride: 5 })?;
    println!("{} rows -> {} windows of {} steps", ds.n_rows(), ds.len(), ds.seq_len());
    let (train, test) = split_train_test(&ds, 0.8)?;
    let meta = DatasetMeta::describe(&train, &test)?;
    println!(
        "train {} / test {} windows, first test target {}",
        meta.n_train, meta.n_test, meta.first_test_target
    );
    println!(
        "close scaled on [{:.2}, {:.2}]; last train target {:.4} -> {:.2}",
        meta.scaler.target_min,
        meta.scaler.target_max,
        train.target(train.len() - 1),
        train.raw_target(train.len() - 1)
    );
    Ok(())
}
