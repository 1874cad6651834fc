//! Fits an LSTM(8) to a sine wave from 24-step windows, then saves and reloads
//! the model.

use sentiforge::neural::{
    load_model, predict, rmse, save_model, train, InMemorySamples, LayerSpec, Model, ModelSpec, TrainConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (seq, n) = (24, 480);
    let series: Vec<f64> = (0..n + seq).map(|i| (i as f64 * std::f64::consts::TAU / 24.0).sin()).collect();
    let data = InMemorySamples {
        seq_len: seq,
        n_features: 1,
        inputs: (0..n).flat_map(|i| series[i..i + seq].to_vec()).collect(),
        targets: (0..n).map(|i| series[i + seq]).collect(),
    };
    let spec = ModelSpec::new(1, vec![LayerSpec::Lstm { units: 8 }, LayerSpec::Dense { units: 1 }])?;
    let mut model = Model::new(&spec, 42)?;
    let cfg = TrainConfig {
        batch_size: 32,
        epochs: 40,
        ..TrainConfig::default()
    };
    let history = train(&mut model, &data, &cfg)?;
    for (e, r) in history.epoch_rmse.iter().enumerate().step_by(5) {
        println!("epoch {:>3}  train RMSE {r:.5}", e + 1);
    }

    let tmp = tempfile::tempdir()?;
    let path = tmp.path().join("sine.sfnn");
    save_model(&path, &mut model)?;
    let mut back = load_model(&path)?;
    let pred = predict(&mut back, &data, 128)?;
    println!("reloaded model RMSE {:.5}", rmse(&pred, &data.targets)?);
    Ok(())
}
