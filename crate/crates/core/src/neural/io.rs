//! Binary weight container.
//!
//! Layout: the 6-byte magic, a little-endian `u32` length followed by the model
//! spec as JSON, a `u64` parameter count, then every parameter as `f64` LE in
//! the order of `Model::params`. A `.json` sidecar next to the file repeats the
//! spec in readable form.

use std::fs;
use std::path::Path;

use super::{Model, ModelSpec};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 6] = b"SFNN1\0";

pub fn save_model(path: &Path, model: &mut Model) -> Result<()> {
    let spec = serde_json::to_vec(model.spec())?;
    let params = model.params();
    let mut buf = Vec::with_capacity(MODEL_MAGIC.len() + 12 + spec.len() + params.len() * 8);
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&(spec.len() as u32).to_le_bytes());
    buf.extend_from_slice(&spec);
    buf.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in &params {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    let sidecar = path.with_extension("json");
    let meta = serde_json::json!({
        "format": "SFNN1",
        "n_params": params.len(),
        "spec": model.spec(),
    });
    fs::write(&sidecar, serde_json::to_string_pretty(&meta)? + "\n").map_err(|e| Error::io(&sidecar, e))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<Model> {
    let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |why: &str| Error::Data(format!("{}: {why}", path.display()));
    let rest = buf.strip_prefix(MODEL_MAGIC.as_slice()).ok_or_else(|| bad("not a model file"))?;
    let (len, rest) = take(rest, 4).ok_or_else(|| bad("truncated header"))?;
    let len = u32::from_le_bytes(len.try_into().expect("4 bytes")) as usize;
    let (spec, rest) = take(rest, len).ok_or_else(|| bad("truncated spec"))?;
    let spec: ModelSpec = serde_json::from_slice(spec)?;
    let (count, rest) = take(rest, 8).ok_or_else(|| bad("truncated parameter count"))?;
    let count = u64::from_le_bytes(count.try_into().expect("8 bytes")) as usize;
    if rest.len() != count * 8 {
        return Err(bad(&format!("expected {count} parameters, found {} bytes", rest.len())));
    }
    let params: Vec<f64> = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let mut model = Model::new(&spec, 0)?;
    if model.n_params() != count {
        return Err(bad(&format!("spec needs {} parameters, file has {count}", model.n_params())));
    }
    model.set_params(&params)?;
    Ok(model)
}

fn take(b: &[u8], n: usize) -> Option<(&[u8], &[u8])> {
    (b.len() >= n).then(|| b.split_at(n))
}
