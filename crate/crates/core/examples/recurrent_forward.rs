//! LSTM and GRU layers run over a small batch, plus a stacked model forward.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sentiforge::neural::{gru_forward, lstm_forward, Architecture, Gru, Lstm, Model, ModelSpec, Tensor};

fn main() -> sentiforge::Result<()> {
    let (b, t, f, h) = (2, 5, 3, 4);
    let x = Tensor::new(&[b, t, f], (0..b * t * f).map(|i| (i as f64 * 0.37).sin()).collect())?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let lstm = Lstm::new(f, h, true, &mut rng);
    let out = lstm_forward(&x, &lstm)?;
    println!("LSTM {:?} -> {:?}", x.shape(), out.shape());
    println!("  last step, sample 0: {:.4?}", &out.data()[(t - 1) * h..t * h]);

    let gru = Gru::new(f, h, true, &mut rng);
    let out = gru_forward(&x, &gru)?;
    println!("GRU  {:?} -> {:?}", x.shape(), out.shape());
    println!("  last step, sample 0: {:.4?}", &out.data()[(t - 1) * h..t * h]);

    for arch in Architecture::ALL {
        let spec = ModelSpec::for_architecture(f, arch, 8)?;
        let mut m = Model::new(&spec, 42)?;
        let y = m.forward(&x)?;
        println!("{:<16} {:>5} params  predictions {:.4?}", arch.label(), m.n_params(), y);
    }
    Ok(())
}
