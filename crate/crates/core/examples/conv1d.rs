//! Valid-padding 1-D convolution over time: a difference filter on a ramp and a
//! moving average on a spike.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sentiforge::neural::{conv1d_forward, Conv1d, Tensor};

fn main() -> sentiforge::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ramp = Tensor::new(&[1, 6, 1], vec![1.0, 2.0, 4.0, 7.0, 11.0, 16.0])?;

    let mut diff = Conv1d::new(1, 1, 2, &mut rng);
    diff.w = vec![-1.0, 1.0];
    diff.b = vec![0.0];
    println!("input      {:?}", ramp.data());
    println!("difference {:?}", conv1d_forward(&ramp, &diff)?.data());

    let mut avg = Conv1d::new(1, 1, 3, &mut rng);
    avg.w = vec![1.0 / 3.0; 3];
    avg.b = vec![0.0];
    let spike = Tensor::new(&[1, 7, 1], vec![0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0])?;
    println!("spike      {:?}", spike.data());
    println!("average    {:?}", conv1d_forward(&spike, &avg)?.data());
    Ok(())
}
