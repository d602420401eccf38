//! Checkpoint container.
//!
//! ```text
//! b"EXCK"          magic
//! u32 LE           header length H
//! H bytes          JSON header
//! f32 LE blob      tensors back to back, row-major
//! ```
//!
//! The header lists every tensor with its shape and byte offset into the
//! blob. Optimizer moments, when present, follow the parameters as
//! `adam.m/<name>` and `adam.v/<name>`.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::params::{tensor_specs, Parameters};
use super::NetConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"EXCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub name: String,
    pub shape: [usize; 2],
    pub offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerHeader {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointHeader {
    pub version: u32,
    pub config: NetConfig,
    pub fingerprint: String,
    pub step: u64,
    pub seed: u64,
    pub tensors: Vec<TensorEntry>,
    pub optimizer: Option<OptimizerHeader>,
    /// Owner-defined metadata (variant tag, filters, statistics).
    pub extra: serde_json::Value,
}

/// Network weights plus training state.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: NetConfig,
    pub step: u64,
    pub seed: u64,
    pub params: Parameters<f32>,
    pub optimizer: Option<Adam<f32>>,
    pub extra: serde_json::Value,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.params.check_shapes(&self.config)?;
        let specs = tensor_specs(&self.config);
        let mut named: Vec<(String, &Array2<f32>)> = specs
            .iter()
            .map(|s| s.name.clone())
            .zip(&self.params.tensors)
            .collect();
        if let Some(adam) = &self.optimizer {
            for (prefix, moments) in [("adam.m/", &adam.first_moment), ("adam.v/", &adam.second_moment)] {
                moments.check_shapes(&self.config)?;
                named.extend(
                    specs
                        .iter()
                        .map(|s| format!("{prefix}{}", s.name))
                        .zip(&moments.tensors),
                );
            }
        }
        let mut offset = 0u64;
        let tensors = named
            .iter()
            .map(|(name, t)| {
                let entry = TensorEntry {
                    name: name.clone(),
                    shape: [t.nrows(), t.ncols()],
                    offset,
                };
                offset += 4 * t.len() as u64;
                entry
            })
            .collect();
        let header = CheckpointHeader {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            fingerprint: self.config.fingerprint(),
            step: self.step,
            seed: self.seed,
            tensors,
            optimizer: self.optimizer.as_ref().map(|a| OptimizerHeader {
                learning_rate: a.learning_rate,
                beta1: a.beta1,
                beta2: a.beta2,
                epsilon: a.epsilon,
                step: a.step,
            }),
            extra: self.extra.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        let mut out = Vec::with_capacity(8 + json.len() + offset as usize);
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, t) in &named {
            for v in t.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != CHECKPOINT_MAGIC {
            return Err(Error::Format("bad checkpoint magic".into()));
        }
        let len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let json = bytes
            .get(8..8 + len)
            .ok_or_else(|| Error::Format("truncated checkpoint header".into()))?;
        let header: CheckpointHeader = serde_json::from_slice(json)?;
        if header.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "unsupported checkpoint version {}",
                header.version
            )));
        }
        header.config.validate()?;
        if header.fingerprint != header.config.fingerprint() {
            return Err(Error::Format("checkpoint config fingerprint mismatch".into()));
        }
        let blob = &bytes[8 + len..];
        let read = |entry: &TensorEntry| -> Result<Array2<f32>> {
            let [rows, cols] = entry.shape;
            let start = entry.offset as usize;
            let end = start + 4 * rows * cols;
            let raw = blob
                .get(start..end)
                .ok_or_else(|| Error::Format(format!("tensor {} outside blob", entry.name)))?;
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                .collect();
            Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Format(e.to_string()))
        };
        let find = |name: &str| -> Result<Array2<f32>> {
            let entry = header
                .tensors
                .iter()
                .find(|e| e.name == name)
                .ok_or_else(|| Error::Format(format!("checkpoint lacks tensor {name}")))?;
            read(entry)
        };
        let specs = tensor_specs(&header.config);
        let load = |prefix: &str| -> Result<Parameters<f32>> {
            let tensors = specs
                .iter()
                .map(|s| find(&format!("{prefix}{}", s.name)))
                .collect::<Result<Vec<_>>>()?;
            let p = Parameters { tensors };
            p.check_shapes(&header.config)?;
            Ok(p)
        };
        let params = load("")?;
        let optimizer = match &header.optimizer {
            Some(o) => Some(Adam {
                learning_rate: o.learning_rate,
                beta1: o.beta1,
                beta2: o.beta2,
                epsilon: o.epsilon,
                first_moment: load("adam.m/")?,
                second_moment: load("adam.v/")?,
                step: o.step,
            }),
            None => None,
        };
        Ok(Self {
            config: header.config,
            step: header.step,
            seed: header.seed,
            params,
            optimizer,
            extra: header.extra,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
