//! Model file.
//!
//! All integers are little-endian `u32`, all reals little-endian `f32`:
//!
//! ```text
//! magic    4 bytes  "REGM"
//! version  u32      1
//! config   u32 length, then that many bytes of UTF-8 JSON (ModelConfig)
//! count    u32      number of tensors
//! tensor   u32 name length, UTF-8 name, u32 rows, u32 cols, rows*cols f32 (row-major)
//! ```
//!
//! Tensors are the learnable weights followed by the buffers (batch-norm
//! running statistics and `input.mean` / `input.std`), in layout order.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::config::ModelConfig;
use super::params::{ModelParams, Store};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"REGM";
pub const MODEL_FILE_VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub fn encode_model(params: &ModelParams) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, MODEL_FILE_VERSION);
    let config = serde_json::to_vec(&params.config).expect("config serializes");
    put_u32(&mut out, config.len() as u32);
    out.extend_from_slice(&config);
    let layout = params.layout();
    put_u32(&mut out, layout.entries.len() as u32);
    for (name, store, slot) in &layout.entries {
        put_u32(&mut out, name.len() as u32);
        out.extend_from_slice(name.as_bytes());
        put_u32(&mut out, slot.rows as u32);
        put_u32(&mut out, slot.cols as u32);
        let data = match store {
            Store::Weights => &params.weights,
            Store::Buffers => &params.buffers,
        };
        for v in &data[slot.range()] {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| Error::Format {
            context: "model file".into(),
            message: format!("truncated at byte {}", self.pos),
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

fn format_err(message: impl Into<String>) -> Error {
    Error::Format {
        context: "model file".into(),
        message: message.into(),
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(format_err("bad magic"));
    }
    let version = r.u32()?;
    if version != MODEL_FILE_VERSION {
        return Err(Error::Version {
            what: "model file",
            found: version,
            expected: MODEL_FILE_VERSION,
        });
    }
    let len = r.u32()? as usize;
    let config: ModelConfig = serde_json::from_slice(r.take(len)?).map_err(|e| format_err(e.to_string()))?;
    config.validate()?;
    let count = r.u32()? as usize;
    let mut tensors = HashMap::with_capacity(count);
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?).map_err(|e| format_err(e.to_string()))?.to_owned();
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        let raw = r.take(rows.checked_mul(cols).and_then(|n| n.checked_mul(4)).ok_or_else(|| format_err("tensor too large"))?)?;
        let data: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        tensors.insert(name, (rows, cols, data));
    }
    if r.pos != bytes.len() {
        return Err(format_err("trailing bytes"));
    }

    let mut params = ModelParams::init(&config, 0);
    let layout = params.layout();
    if tensors.len() != layout.entries.len() {
        return Err(format_err(format!(
            "expected {} tensors, found {}",
            layout.entries.len(),
            tensors.len()
        )));
    }
    for (name, store, slot) in &layout.entries {
        let (rows, cols, data) = tensors.remove(name).ok_or_else(|| format_err(format!("missing tensor {name}")))?;
        if (rows, cols) != (slot.rows, slot.cols) {
            return Err(Error::Shape(format!(
                "{name}: file has {rows}x{cols}, config implies {}x{}",
                slot.rows, slot.cols
            )));
        }
        let target = match store {
            Store::Weights => &mut params.weights,
            Store::Buffers => &mut params.buffers,
        };
        target[slot.range()].copy_from_slice(&data);
    }
    Ok(params)
}

pub fn save_model(params: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, encode_model(params)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelParams> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
