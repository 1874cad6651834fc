//! Layers over time-major `[steps, batch, features]` tensors.
//!
//! Each layer caches what its backward pass needs during `forward` and
//! accumulates parameter gradients during `backward`.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use super::tensor::{gemm, gemm_nt, gemm_tn, sigmoid, Tensor};
use crate::error::{Error, Result};

fn glorot<R: Rng>(rng: &mut R, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let d = Uniform::new_inclusive(-limit, limit);
    (0..n).map(|_| d.sample(rng)).collect()
}

fn check_input(op: &'static str, x: &Tensor, features: usize) -> Result<(usize, usize)> {
    let s = x.shape();
    if s.len() != 3 || s[2] != features {
        return Err(Error::Shape {
            op,
            expected: vec![s.first().copied().unwrap_or(0), s.get(1).copied().unwrap_or(0), features],
            actual: s.to_vec(),
        });
    }
    Ok((s[0], s[1]))
}

/// LSTM with gate blocks ordered input, forget, cell, output.
#[derive(Debug, Clone)]
pub struct Lstm {
    pub input: usize,
    pub units: usize,
    pub return_sequences: bool,
    /// `input × 4·units`.
    pub w: Vec<f64>,
    /// `units × 4·units`.
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub(crate) gw: Vec<f64>,
    pub(crate) gu: Vec<f64>,
    pub(crate) gb: Vec<f64>,
    cache: Option<RecurrentCache>,
}

#[derive(Debug, Clone)]
struct RecurrentCache {
    steps: usize,
    batch: usize,
    x: Vec<f64>,
    /// Post-activation gates per step, `batch × (4 or 3)·units`.
    gates: Vec<f64>,
    /// Hidden states `h_0..h_T`.
    h: Vec<f64>,
    /// LSTM cell states `c_0..c_T`, and `tanh(c_t)` for `t = 1..T`.
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl Lstm {
    pub fn new<R: Rng>(input: usize, units: usize, return_sequences: bool, rng: &mut R) -> Self {
        let g = 4 * units;
        let mut b = vec![0.0; g];
        b[units..2 * units].iter_mut().for_each(|v| *v = 1.0);
        Lstm {
            input,
            units,
            return_sequences,
            w: glorot(rng, input, g, input * g),
            u: glorot(rng, units, g, units * g),
            b,
            gw: vec![0.0; input * g],
            gu: vec![0.0; units * g],
            gb: vec![0.0; g],
            cache: None,
        }
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.u.len() + self.b.len()
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let (steps, batch) = check_input("lstm_forward", x, self.input)?;
        let (h_n, f, g) = (self.units, self.input, 4 * self.units);
        let mut gates = vec![0.0; steps * batch * g];
        let mut h = vec![0.0; (steps + 1) * batch * h_n];
        let mut c = vec![0.0; (steps + 1) * batch * h_n];
        let mut tanh_c = vec![0.0; steps * batch * h_n];
        let xd = x.data();
        for t in 0..steps {
            let z = &mut gates[t * batch * g..(t + 1) * batch * g];
            for row in z.chunks_mut(g) {
                row.copy_from_slice(&self.b);
            }
            gemm(batch, f, g, &xd[t * batch * f..(t + 1) * batch * f], &self.w, z);
            gemm(batch, h_n, g, &h[t * batch * h_n..(t + 1) * batch * h_n], &self.u, z);
            for bi in 0..batch {
                let zr = &mut z[bi * g..(bi + 1) * g];
                let base = bi * h_n;
                for j in 0..h_n {
                    let i_g = sigmoid(zr[j]);
                    let f_g = sigmoid(zr[h_n + j]);
                    let c_g = zr[2 * h_n + j].tanh();
                    let o_g = sigmoid(zr[3 * h_n + j]);
                    zr[j] = i_g;
                    zr[h_n + j] = f_g;
                    zr[2 * h_n + j] = c_g;
                    zr[3 * h_n + j] = o_g;
                    let c_prev = c[t * batch * h_n + base + j];
                    let c_t = f_g * c_prev + i_g * c_g;
                    let tc = c_t.tanh();
                    c[(t + 1) * batch * h_n + base + j] = c_t;
                    tanh_c[t * batch * h_n + base + j] = tc;
                    h[(t + 1) * batch * h_n + base + j] = o_g * tc;
                }
            }
        }
        let out = emit(&h, steps, batch, h_n, self.return_sequences);
        self.cache = Some(RecurrentCache {
            steps,
            batch,
            x: xd.to_vec(),
            gates,
            h,
            c,
            tanh_c,
        });
        Ok(out)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or_else(|| Error::Config("lstm backward before forward".into()))?;
        let (steps, batch, h_n, f, g) = (cache.steps, cache.batch, self.units, self.input, 4 * self.units);
        let dh_out = expand_grad(dy, steps, batch, h_n, self.return_sequences)?;
        let mut dx = vec![0.0; steps * batch * f];
        let mut dh_next = vec![0.0; batch * h_n];
        let mut dc_next = vec![0.0; batch * h_n];
        let mut dz = vec![0.0; batch * g];
        for t in (0..steps).rev() {
            let gt = &cache.gates[t * batch * g..(t + 1) * batch * g];
            for bi in 0..batch {
                for j in 0..h_n {
                    let k = bi * h_n + j;
                    let dh = dh_out[t * batch * h_n + k] + dh_next[k];
                    let (i_g, f_g, c_g, o_g) =
                        (gt[bi * g + j], gt[bi * g + h_n + j], gt[bi * g + 2 * h_n + j], gt[bi * g + 3 * h_n + j]);
                    let tc = cache.tanh_c[t * batch * h_n + k];
                    let c_prev = cache.c[t * batch * h_n + k];
                    let d_o = dh * tc;
                    let dc = dh * o_g * (1.0 - tc * tc) + dc_next[k];
                    dc_next[k] = dc * f_g;
                    dz[bi * g + j] = dc * c_g * i_g * (1.0 - i_g);
                    dz[bi * g + h_n + j] = dc * c_prev * f_g * (1.0 - f_g);
                    dz[bi * g + 2 * h_n + j] = dc * i_g * (1.0 - c_g * c_g);
                    dz[bi * g + 3 * h_n + j] = d_o * o_g * (1.0 - o_g);
                }
            }
            let xt = &cache.x[t * batch * f..(t + 1) * batch * f];
            let hp = &cache.h[t * batch * h_n..(t + 1) * batch * h_n];
            gemm_tn(batch, f, g, xt, &dz, &mut self.gw);
            gemm_tn(batch, h_n, g, hp, &dz, &mut self.gu);
            for row in dz.chunks(g) {
                for (gb, d) in self.gb.iter_mut().zip(row) {
                    *gb += d;
                }
            }
            gemm_nt(batch, f, g, &dz, &self.w, &mut dx[t * batch * f..(t + 1) * batch * f]);
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            gemm_nt(batch, h_n, g, &dz, &self.u, &mut dh_next);
        }
        Tensor::new(&[steps, batch, f], dx)
    }
}

/// GRU with update (z) and reset (r) gates; the reset gate is applied to the
/// previous state before the candidate's recurrent product, and a single bias
/// vector serves all three blocks.
#[derive(Debug, Clone)]
pub struct Gru {
    pub input: usize,
    pub units: usize,
    pub return_sequences: bool,
    /// `input × 3·units`, blocks z, r, n.
    pub w: Vec<f64>,
    /// `units × 2·units`, blocks z, r.
    pub u_zr: Vec<f64>,
    /// `units × units`, candidate block.
    pub u_n: Vec<f64>,
    pub b: Vec<f64>,
    pub(crate) gw: Vec<f64>,
    pub(crate) gu_zr: Vec<f64>,
    pub(crate) gu_n: Vec<f64>,
    pub(crate) gb: Vec<f64>,
    cache: Option<RecurrentCache>,
}

impl Gru {
    pub fn new<R: Rng>(input: usize, units: usize, return_sequences: bool, rng: &mut R) -> Self {
        let g = 3 * units;
        // One draw over the full recurrent kernel, then split by block.
        let u = glorot(rng, units, g, units * g);
        let mut u_zr = Vec::with_capacity(units * 2 * units);
        let mut u_n = Vec::with_capacity(units * units);
        for row in u.chunks(g) {
            u_zr.extend_from_slice(&row[..2 * units]);
            u_n.extend_from_slice(&row[2 * units..]);
        }
        Gru {
            input,
            units,
            return_sequences,
            w: glorot(rng, input, g, input * g),
            u_zr,
            u_n,
            b: vec![0.0; g],
            gw: vec![0.0; input * g],
            gu_zr: vec![0.0; units * 2 * units],
            gu_n: vec![0.0; units * units],
            gb: vec![0.0; g],
            cache: None,
        }
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.u_zr.len() + self.u_n.len() + self.b.len()
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let (steps, batch) = check_input("gru_forward", x, self.input)?;
        let (h_n, f, g) = (self.units, self.input, 3 * self.units);
        let mut gates = vec![0.0; steps * batch * g];
        let mut h = vec![0.0; (steps + 1) * batch * h_n];
        let mut rh = vec![0.0; batch * h_n];
        let mut zr = vec![0.0; batch * 2 * h_n];
        let mut cand = vec![0.0; batch * h_n];
        let xd = x.data();
        for t in 0..steps {
            let a = &mut gates[t * batch * g..(t + 1) * batch * g];
            for row in a.chunks_mut(g) {
                row.copy_from_slice(&self.b);
            }
            gemm(batch, f, g, &xd[t * batch * f..(t + 1) * batch * f], &self.w, a);
            let hp = &h[t * batch * h_n..(t + 1) * batch * h_n];
            zr.iter_mut().for_each(|v| *v = 0.0);
            gemm(batch, h_n, 2 * h_n, hp, &self.u_zr, &mut zr);
            for bi in 0..batch {
                for j in 0..h_n {
                    let z = sigmoid(a[bi * g + j] + zr[bi * 2 * h_n + j]);
                    let r = sigmoid(a[bi * g + h_n + j] + zr[bi * 2 * h_n + h_n + j]);
                    a[bi * g + j] = z;
                    a[bi * g + h_n + j] = r;
                    rh[bi * h_n + j] = r * hp[bi * h_n + j];
                }
            }
            cand.iter_mut().for_each(|v| *v = 0.0);
            gemm(batch, h_n, h_n, &rh, &self.u_n, &mut cand);
            let (hp_all, hn_all) = h.split_at_mut((t + 1) * batch * h_n);
            let hp = &hp_all[t * batch * h_n..];
            let hn = &mut hn_all[..batch * h_n];
            for bi in 0..batch {
                for j in 0..h_n {
                    let n = (a[bi * g + 2 * h_n + j] + cand[bi * h_n + j]).tanh();
                    a[bi * g + 2 * h_n + j] = n;
                    let z = a[bi * g + j];
                    hn[bi * h_n + j] = z * hp[bi * h_n + j] + (1.0 - z) * n;
                }
            }
        }
        let out = emit(&h, steps, batch, h_n, self.return_sequences);
        self.cache = Some(RecurrentCache {
            steps,
            batch,
            x: xd.to_vec(),
            gates,
            h,
            c: Vec::new(),
            tanh_c: Vec::new(),
        });
        Ok(out)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let cache = self.cache.as_ref().ok_or_else(|| Error::Config("gru backward before forward".into()))?;
        let (steps, batch, h_n, f, g) = (cache.steps, cache.batch, self.units, self.input, 3 * self.units);
        let dh_out = expand_grad(dy, steps, batch, h_n, self.return_sequences)?;
        let mut dx = vec![0.0; steps * batch * f];
        let mut dh_next = vec![0.0; batch * h_n];
        let mut da = vec![0.0; batch * g];
        let mut da_zr = vec![0.0; batch * 2 * h_n];
        let mut rh = vec![0.0; batch * h_n];
        let mut drh = vec![0.0; batch * h_n];
        let mut dh_prev = vec![0.0; batch * h_n];
        for t in (0..steps).rev() {
            let gt = &cache.gates[t * batch * g..(t + 1) * batch * g];
            let hp = &cache.h[t * batch * h_n..(t + 1) * batch * h_n];
            for bi in 0..batch {
                for j in 0..h_n {
                    let k = bi * h_n + j;
                    let dh = dh_out[t * batch * h_n + k] + dh_next[k];
                    let (z, r, n) = (gt[bi * g + j], gt[bi * g + h_n + j], gt[bi * g + 2 * h_n + j]);
                    let da_n = dh * (1.0 - z) * (1.0 - n * n);
                    da[bi * g + 2 * h_n + j] = da_n;
                    da[bi * g + j] = dh * (hp[k] - n) * z * (1.0 - z);
                    dh_prev[k] = dh * z;
                    rh[k] = r * hp[k];
                }
            }
            // Candidate path through the reset-gated state.
            let mut da_n = vec![0.0; batch * h_n];
            for bi in 0..batch {
                da_n[bi * h_n..(bi + 1) * h_n].copy_from_slice(&da[bi * g + 2 * h_n..(bi + 1) * g]);
            }
            gemm_tn(batch, h_n, h_n, &rh, &da_n, &mut self.gu_n);
            drh.iter_mut().for_each(|v| *v = 0.0);
            gemm_nt(batch, h_n, h_n, &da_n, &self.u_n, &mut drh);
            for bi in 0..batch {
                for j in 0..h_n {
                    let k = bi * h_n + j;
                    let r = gt[bi * g + h_n + j];
                    dh_prev[k] += drh[k] * r;
                    da[bi * g + h_n + j] = drh[k] * hp[k] * r * (1.0 - r);
                    da_zr[bi * 2 * h_n + j] = da[bi * g + j];
                    da_zr[bi * 2 * h_n + h_n + j] = da[bi * g + h_n + j];
                }
            }
            gemm_tn(batch, h_n, 2 * h_n, hp, &da_zr, &mut self.gu_zr);
            gemm_nt(batch, h_n, 2 * h_n, &da_zr, &self.u_zr, &mut dh_prev);
            let xt = &cache.x[t * batch * f..(t + 1) * batch * f];
            gemm_tn(batch, f, g, xt, &da, &mut self.gw);
            for row in da.chunks(g) {
                for (gb, d) in self.gb.iter_mut().zip(row) {
                    *gb += d;
                }
            }
            gemm_nt(batch, f, g, &da, &self.w, &mut dx[t * batch * f..(t + 1) * batch * f]);
            std::mem::swap(&mut dh_next, &mut dh_prev);
        }
        Tensor::new(&[steps, batch, f], dx)
    }
}

/// Valid 1-D cross-correlation over time with linear activation.
#[derive(Debug, Clone)]
pub struct Conv1d {
    pub input: usize,
    pub filters: usize,
    pub kernel: usize,
    /// `kernel × input × filters`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub(crate) gw: Vec<f64>,
    pub(crate) gb: Vec<f64>,
    cache: Option<(usize, usize, Vec<f64>)>,
}

impl Conv1d {
    pub fn new<R: Rng>(input: usize, filters: usize, kernel: usize, rng: &mut R) -> Self {
        let n = kernel * input * filters;
        Conv1d {
            input,
            filters,
            kernel,
            w: glorot(rng, kernel * input, kernel * filters, n),
            b: vec![0.0; filters],
            gw: vec![0.0; n],
            gb: vec![0.0; filters],
            cache: None,
        }
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }

    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let (steps, batch) = check_input("conv1d_forward", x, self.input)?;
        if self.kernel > steps {
            return Err(Error::Shape {
                op: "conv1d_forward",
                expected: vec![self.kernel],
                actual: vec![steps],
            });
        }
        let (f, o, k) = (self.input, self.filters, self.kernel);
        let out_steps = steps - k + 1;
        let mut y = vec![0.0; out_steps * batch * o];
        let xd = x.data();
        for t in 0..out_steps {
            let yt = &mut y[t * batch * o..(t + 1) * batch * o];
            for row in yt.chunks_mut(o) {
                row.copy_from_slice(&self.b);
            }
            for j in 0..k {
                let xs = &xd[(t + j) * batch * f..(t + j + 1) * batch * f];
                gemm(batch, f, o, xs, &self.w[j * f * o..(j + 1) * f * o], yt);
            }
        }
        self.cache = Some((steps, batch, xd.to_vec()));
        Tensor::new(&[out_steps, batch, o], y)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let (steps, batch, x) = self.cache.as_ref().ok_or_else(|| Error::Config("conv1d backward before forward".into()))?;
        let (steps, batch) = (*steps, *batch);
        let (f, o, k) = (self.input, self.filters, self.kernel);
        let out_steps = steps - k + 1;
        if dy.shape() != [out_steps, batch, o] {
            return Err(Error::Shape {
                op: "conv1d_backward",
                expected: vec![out_steps, batch, o],
                actual: dy.shape().to_vec(),
            });
        }
        let dyd = dy.data();
        let mut dx = vec![0.0; steps * batch * f];
        for t in 0..out_steps {
            let dyt = &dyd[t * batch * o..(t + 1) * batch * o];
            for row in dyt.chunks(o) {
                for (gb, d) in self.gb.iter_mut().zip(row) {
                    *gb += d;
                }
            }
            for j in 0..k {
                let xs = &x[(t + j) * batch * f..(t + j + 1) * batch * f];
                gemm_tn(batch, f, o, xs, dyt, &mut self.gw[j * f * o..(j + 1) * f * o]);
                gemm_nt(batch, f, o, dyt, &self.w[j * f * o..(j + 1) * f * o], &mut dx[(t + j) * batch * f..(t + j + 1) * batch * f]);
            }
        }
        Tensor::new(&[steps, batch, f], dx)
    }
}

/// Fully connected output head on the last hidden state.
#[derive(Debug, Clone)]
pub struct Dense {
    pub input: usize,
    pub units: usize,
    /// `input × units`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub(crate) gw: Vec<f64>,
    pub(crate) gb: Vec<f64>,
    cache: Option<(usize, Vec<f64>)>,
}

impl Dense {
    pub fn new<R: Rng>(input: usize, units: usize, rng: &mut R) -> Self {
        Dense {
            input,
            units,
            w: glorot(rng, input, units, input * units),
            b: vec![0.0; units],
            gw: vec![0.0; input * units],
            gb: vec![0.0; units],
            cache: None,
        }
    }

    pub fn n_params(&self) -> usize {
        self.w.len() + self.b.len()
    }

    /// Accepts `[1, batch, input]` (a last-state tensor) or `[batch, input]`.
    pub fn forward(&mut self, x: &Tensor) -> Result<Tensor> {
        let (s, batch, f) = x.dims3();
        if s != 1 || f != self.input {
            return Err(Error::Shape {
                op: "dense_forward",
                expected: vec![1, batch, self.input],
                actual: x.shape().to_vec(),
            });
        }
        let mut y = vec![0.0; batch * self.units];
        for row in y.chunks_mut(self.units) {
            row.copy_from_slice(&self.b);
        }
        gemm(batch, f, self.units, x.data(), &self.w, &mut y);
        self.cache = Some((batch, x.data().to_vec()));
        Tensor::new(&[1, batch, self.units], y)
    }

    pub fn backward(&mut self, dy: &Tensor) -> Result<Tensor> {
        let (batch, x) = self.cache.as_ref().ok_or_else(|| Error::Config("dense backward before forward".into()))?;
        let batch = *batch;
        let dyd = dy.data();
        if dyd.len() != batch * self.units {
            return Err(Error::Shape {
                op: "dense_backward",
                expected: vec![1, batch, self.units],
                actual: dy.shape().to_vec(),
            });
        }
        gemm_tn(batch, self.input, self.units, x, dyd, &mut self.gw);
        for row in dyd.chunks(self.units) {
            for (gb, d) in self.gb.iter_mut().zip(row) {
                *gb += d;
            }
        }
        let mut dx = vec![0.0; batch * self.input];
        gemm_nt(batch, self.input, self.units, dyd, &self.w, &mut dx);
        Tensor::new(&[1, batch, self.input], dx)
    }
}

fn emit(h: &[f64], steps: usize, batch: usize, units: usize, sequences: bool) -> Tensor {
    let n = batch * units;
    if sequences {
        Tensor::new(&[steps, batch, units], h[n..].to_vec()).expect("sized above")
    } else {
        Tensor::new(&[1, batch, units], h[steps * n..].to_vec()).expect("sized above")
    }
}

/// Output gradient laid out per step (zeros except the last step when only the
/// final state was emitted).
fn expand_grad(dy: &Tensor, steps: usize, batch: usize, units: usize, sequences: bool) -> Result<Vec<f64>> {
    let n = batch * units;
    let want = if sequences { vec![steps, batch, units] } else { vec![1, batch, units] };
    if dy.shape() != want.as_slice() {
        return Err(Error::Shape {
            op: "recurrent_backward",
            expected: want,
            actual: dy.shape().to_vec(),
        });
    }
    if sequences {
        Ok(dy.data().to_vec())
    } else {
        let mut full = vec![0.0; steps * n];
        full[(steps - 1) * n..].copy_from_slice(dy.data());
        Ok(full)
    }
}
