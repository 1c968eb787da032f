//! "JWGT" checkpoint container: preamble, JSON header, f64 LE blobs.

use std::io::{Cursor, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::spec::LayerSpec;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::io::{read_preamble, write_atomic, write_preamble};

pub const MAGIC: &[u8; 4] = b"JWGT";
pub const VERSION: u16 = 1;
const KIND: &str = "weight file";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    meta: serde_json::Value,
    layers: Vec<LayerSpec>,
    tensors: Vec<TensorEntry>,
}

/// Named tensors plus the layer specs and free-form metadata of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFile {
    pub meta: serde_json::Value,
    pub layers: Vec<LayerSpec>,
    pub tensors: Vec<(String, Tensor)>,
}

impl WeightFile {
    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::Format { kind: KIND, msg: format!("missing tensor `{name}`") })
    }

    /// Returns the tensor `name`, checking it has `shape`.
    pub fn take(&self, name: &str, shape: &[usize]) -> Result<Tensor> {
        let t = self.get(name)?;
        if t.shape() != shape {
            return Err(Error::Format {
                kind: KIND,
                msg: format!("tensor `{name}` has shape {:?}, expected {shape:?}", t.shape()),
            });
        }
        Ok(t.clone())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            meta: self.meta.clone(),
            layers: self.layers.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|(name, t)| TensorEntry { name: name.clone(), shape: t.shape().to_vec() })
                .collect(),
        };
        let json = serde_json::to_vec(&header)?;
        let total: usize = self.tensors.iter().map(|(_, t)| t.len()).sum();
        let mut out = Vec::with_capacity(json.len() + 10 + total * 8);
        write_preamble(&mut out, MAGIC, VERSION, &json).expect("in-memory write");
        for (_, t) in &self.tensors {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor::new(bytes);
        let header: Header = serde_json::from_slice(&read_preamble(&mut r, MAGIC, VERSION, KIND)?)?;
        let mut tensors = Vec::with_capacity(header.tensors.len());
        for entry in header.tensors {
            let n: usize = entry.shape.iter().product();
            let mut raw = vec![0u8; n * 8];
            r.read_exact(&mut raw).map_err(|e| Error::Format {
                kind: KIND,
                msg: format!("truncated blob for `{}`: {e}", entry.name),
            })?;
            let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            tensors.push((entry.name, Tensor::new(entry.shape, data)?));
        }
        Ok(WeightFile { meta: header.meta, layers: header.layers, tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
