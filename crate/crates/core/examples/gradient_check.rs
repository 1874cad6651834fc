//! Compares backpropagated gradients with central finite differences for every
//! built-in architecture.

use sentiforge::neural::{Architecture, Model, ModelSpec, Tensor};

fn main() -> sentiforge::Result<()> {
    let (b, t, f) = (3, 6, 2);
    let x = Tensor::new(&[b, t, f], (0..b * t * f).map(|i| (i as f64 * 0.7).cos()).collect())?;
    let y = [0.3, -0.1, 0.8];
    let eps = 1e-5;
    for arch in Architecture::ALL {
        let spec = ModelSpec::for_architecture(f, arch, 4)?;
        let mut m = Model::new(&spec, 7)?;
        m.zero_grad();
        m.loss_and_backward(&x, &y)?;
        let analytic = m.grads();
        let base = m.params();
        let mut p = base.clone();
        let mut worst: f64 = 0.0;
        for i in 0..p.len() {
            p[i] = base[i] + eps;
            m.set_params(&p)?;
            let up = m.loss(&x, &y)?;
            p[i] = base[i] - eps;
            m.set_params(&p)?;
            let down = m.loss(&x, &y)?;
            p[i] = base[i];
            let numeric = (up - down) / (2.0 * eps);
            let rel = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        m.set_params(&base)?;
        println!("{:<16} {:>4} params  worst relative error {worst:.2e}", arch.label(), base.len());
    }
    Ok(())
}
