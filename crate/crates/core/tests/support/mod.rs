//! Independent oracles shared by the integration tests. Every reference here is
//! written per element from the textbook definition, with no shared code from
//! the library's batched kernels.

#![allow(dead_code)]

pub mod tables;

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use sentiforge::neural::{Conv1d, Gru, Lstm, Model, Tensor};
use sentiforge::sentiment::{score_pattern, score_vader, SentimentVector};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `x` is batch-major `[b][t][f]`; returns `[b][t][h]`.
pub fn lstm_scalar(l: &Lstm, x: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let (h_n, f_n) = (l.units, l.input);
    let g = 4 * h_n;
    x.iter()
        .map(|seq| {
            let mut h = vec![0.0; h_n];
            let mut c = vec![0.0; h_n];
            let mut out = Vec::new();
            for xt in seq {
                let pre = |gate: usize, j: usize, h: &[f64]| {
                    let col = gate * h_n + j;
                    let mut s = l.b[col];
                    for f in 0..f_n {
                        s += xt[f] * l.w[f * g + col];
                    }
                    for k in 0..h_n {
                        s += h[k] * l.u[k * g + col];
                    }
                    s
                };
                let mut nh = vec![0.0; h_n];
                for j in 0..h_n {
                    let i = sigmoid(pre(0, j, &h));
                    let fg = sigmoid(pre(1, j, &h));
                    let cand = pre(2, j, &h).tanh();
                    let o = sigmoid(pre(3, j, &h));
                    c[j] = fg * c[j] + i * cand;
                    nh[j] = o * c[j].tanh();
                }
                h = nh;
                out.push(h.clone());
            }
            out
        })
        .collect()
}

pub fn gru_scalar(l: &Gru, x: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let (h_n, f_n) = (l.units, l.input);
    x.iter()
        .map(|seq| {
            let mut h = vec![0.0; h_n];
            let mut out = Vec::new();
            for xt in seq {
                let xin = |col: usize| -> f64 { (0..f_n).map(|f| xt[f] * l.w[f * 3 * h_n + col]).sum::<f64>() + l.b[col] };
                let mut z = vec![0.0; h_n];
                let mut r = vec![0.0; h_n];
                for j in 0..h_n {
                    let uz: f64 = (0..h_n).map(|k| h[k] * l.u_zr[k * 2 * h_n + j]).sum();
                    let ur: f64 = (0..h_n).map(|k| h[k] * l.u_zr[k * 2 * h_n + h_n + j]).sum();
                    z[j] = sigmoid(xin(j) + uz);
                    r[j] = sigmoid(xin(h_n + j) + ur);
                }
                let mut nh = vec![0.0; h_n];
                for j in 0..h_n {
                    let un: f64 = (0..h_n).map(|k| r[k] * h[k] * l.u_n[k * h_n + j]).sum();
                    let n = (xin(2 * h_n + j) + un).tanh();
                    nh[j] = z[j] * h[j] + (1.0 - z[j]) * n;
                }
                h = nh;
                out.push(h.clone());
            }
            out
        })
        .collect()
}

pub fn conv_scalar(l: &Conv1d, x: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let (k, f_n, o_n) = (l.kernel, l.input, l.filters);
    x.iter()
        .map(|seq| {
            (0..=seq.len() - k)
                .map(|t| {
                    (0..o_n)
                        .map(|o| {
                            let mut s = l.b[o];
                            for d in 0..k {
                                for f in 0..f_n {
                                    s += seq[t + d][f] * l.w[(d * f_n + f) * o_n + o];
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn to_tensor(x: &[Vec<Vec<f64>>]) -> Tensor {
    let (b, t, f) = (x.len(), x[0].len(), x[0][0].len());
    Tensor::new(&[b, t, f], x.iter().flatten().flatten().copied().collect()).unwrap()
}

pub fn flatten(x: &[Vec<Vec<f64>>]) -> Vec<f64> {
    x.iter().flatten().flatten().copied().collect()
}

/// Worst relative error between analytic and central-difference gradients over
/// every parameter of `model` for an MSE loss on `(x, y)`.
pub fn gradient_check(model: &mut Model, x: &Tensor, y: &[f64], eps: f64) -> f64 {
    model.zero_grad();
    model.loss_and_backward(x, y).unwrap();
    let analytic = model.grads();
    let base = model.params();
    let mut worst: f64 = 0.0;
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + eps;
        model.set_params(&p).unwrap();
        let up = model.loss(x, y).unwrap();
        p[i] = base[i] - eps;
        model.set_params(&p).unwrap();
        let down = model.loss(x, y).unwrap();
        p[i] = base[i];
        let numeric = (up - down) / (2.0 * eps);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    model.set_params(&base).unwrap();
    worst
}

/// Hourly means by explicit grouping: a map from hour to member list, then a
/// left-to-right sum per channel.
pub fn groupby_hourly(posts: &[(DateTime<Utc>, SentimentVector)]) -> BTreeMap<DateTime<Utc>, [f64; 7]> {
    let mut groups: BTreeMap<i64, Vec<[f64; 7]>> = BTreeMap::new();
    for (t, v) in posts {
        groups.entry(t.timestamp().div_euclid(3600)).or_default().push(v.to_array());
    }
    groups
        .into_iter()
        .map(|(h, members)| {
            let mut sum = [0.0; 7];
            for m in &members {
                for c in 0..7 {
                    sum[c] += m[c];
                }
            }
            let n = members.len() as f64;
            (DateTime::from_timestamp(h * 3600, 0).unwrap(), sum.map(|s| s / n))
        })
        .collect()
}

const CORPUS: &str = include_str!("../fixtures/sentiment/corpus.txt");
const ORACLE: &str = include_str!("../fixtures/sentiment/oracle.csv");
pub const SENTIMENT_TOL: f64 = 1e-4;

pub fn corpus_lines() -> usize {
    CORPUS.lines().count()
}

pub fn oracle_rows() -> Vec<(usize, [f64; 6])> {
    ORACLE
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let mut vals = [0.0; 6];
            for (v, s) in vals.iter_mut().zip(&f[1..]) {
                *v = s.parse().unwrap();
            }
            (f[0].parse().unwrap(), vals)
        })
        .collect()
}

/// Largest per-channel deviation from the frozen reference scores, and a
/// description of every line outside tolerance.
pub fn sentiment_parity() -> (f64, Vec<String>) {
    let lines: Vec<&str> = CORPUS.lines().collect();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (line, want) in oracle_rows() {
        let text = lines[line - 1];
        let v = score_vader(text);
        let p = score_pattern(text);
        let got = [v.pos, v.neg, v.neu, v.compound, p.polarity, p.subjectivity];
        for (c, (g, w)) in got.iter().zip(want).enumerate() {
            let d = (g - w).abs();
            worst = worst.max(d);
            if d > SENTIMENT_TOL {
                bad.push(format!("line {line} channel {c}: got {g}, want {w} ({text:?})"));
            }
        }
    }
    (worst, bad)
}

/// A throwaway HTTP/1.1 server on localhost. `handler` maps a request target
/// (path and query) to `(status, body)`; connections are closed after each
/// response.
pub struct MockServer {
    pub base_url: String,
    pub hits: Arc<AtomicUsize>,
}

impl MockServer {
    pub fn start<F>(handler: F) -> MockServer
    where
        F: Fn(&str) -> (u16, String) + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = Arc::clone(&hits);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut line = String::new();
                if reader.read_line(&mut line).is_err() {
                    continue;
                }
                loop {
                    let mut h = String::new();
                    if reader.read_line(&mut h).is_err() || h == "\r\n" || h.is_empty() {
                        break;
                    }
                }
                let target = line.split_whitespace().nth(1).unwrap_or("/").to_string();
                counter.fetch_add(1, Ordering::SeqCst);
                let (status, body) = handler(&target);
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        MockServer { base_url, hits }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

/// Value of `key` in a request target's query string.
pub fn query_param(target: &str, key: &str) -> Option<String> {
    let q = target.split_once('?')?.1;
    url::form_urlencoded::parse(q.as_bytes())
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.into_owned())
}
