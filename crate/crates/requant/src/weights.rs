//! Fusion-operator weights: a flat little-endian `f32` file plus a JSON
//! sidecar naming each tensor.
//!
//! ```json
//! { "tensors": [ { "name": "c1.proj.weight", "shape": [48, 96], "offset": 0 } ] }
//! ```
//!
//! `offset` counts `f32` elements from the start of the binary. Dense and
//! 1x1 weights are `[out, in]`, 3x3 kernels `[out, in, 3, 3]`, biases `[out]`.

use std::collections::BTreeMap;
use std::path::Path;

use requant_core::fusion::{AsppParams, AttentionParams, Conv3x3, Dense};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tensors: Vec<TensorEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightFile {
    tensors: BTreeMap<String, Tensor>,
}

impl WeightFile {
    pub fn from_parts(binary: &[u8], sidecar: &Sidecar) -> Result<Self, String> {
        if binary.len() % 4 != 0 {
            return Err("binary length is not a multiple of 4".into());
        }
        let floats: Vec<f32> = binary
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        let mut tensors = BTreeMap::new();
        for e in &sidecar.tensors {
            let len: usize = e.shape.iter().product();
            let end = e.offset.checked_add(len).filter(|&end| end <= floats.len());
            let Some(end) = end else {
                return Err(format!("tensor {} runs past the end of the binary", e.name));
            };
            let data: Vec<f64> = floats[e.offset..end].iter().map(|&v| v as f64).collect();
            if data.iter().any(|v| !v.is_finite()) {
                return Err(format!("tensor {} holds non-finite values", e.name));
            }
            let t = Tensor {
                shape: e.shape.clone(),
                data,
            };
            if tensors.insert(e.name.clone(), t).is_some() {
                return Err(format!("duplicate tensor {}", e.name));
            }
        }
        Ok(Self { tensors })
    }

    pub fn load(binary: &Path, sidecar: &Path) -> AppResult<Self> {
        let bin = std::fs::read(binary).map_err(|e| AppError::io(binary, e))?;
        let text = std::fs::read(sidecar).map_err(|e| AppError::io(sidecar, e))?;
        let meta: Sidecar =
            serde_json::from_slice(&text).map_err(|e| AppError::format(sidecar, e.to_string()))?;
        Self::from_parts(&bin, &meta).map_err(|m| AppError::format(binary, m))
    }

    /// Serializes back to `(binary, sidecar)`; values are narrowed to `f32`.
    pub fn to_parts(&self) -> (Vec<u8>, Sidecar) {
        let mut bin = Vec::new();
        let mut entries = Vec::new();
        for (name, t) in &self.tensors {
            entries.push(TensorEntry {
                name: name.clone(),
                shape: t.shape.clone(),
                offset: bin.len() / 4,
            });
            for &v in &t.data {
                bin.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        (bin, Sidecar { tensors: entries })
    }

    pub fn insert(&mut self, name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "shape and data length");
        self.tensors.insert(name.into(), Tensor { shape, data });
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor, String> {
        self.tensors.get(name).ok_or_else(|| format!("missing tensor {name}"))
    }

    fn shaped(&self, name: &str, rank: usize) -> Result<&Tensor, String> {
        let t = self.tensor(name)?;
        if t.shape.len() != rank {
            return Err(format!("tensor {name} should have rank {rank}"));
        }
        Ok(t)
    }

    /// `<prefix>.weight` `[out, in]` and `<prefix>.bias` `[out]`.
    pub fn dense(&self, prefix: &str) -> Result<Dense, String> {
        let w = self.shaped(&format!("{prefix}.weight"), 2)?;
        let b = self.shaped(&format!("{prefix}.bias"), 1)?;
        Dense::new(w.shape[1], w.shape[0], w.data.clone(), b.data.clone()).map_err(|e| format!("{prefix}: {e}"))
    }

    /// `<prefix>.weight` `[out, in, 3, 3]` and `<prefix>.bias` `[out]`.
    pub fn conv3x3(&self, prefix: &str, dilation: usize) -> Result<Conv3x3, String> {
        let w = self.shaped(&format!("{prefix}.weight"), 4)?;
        let b = self.shaped(&format!("{prefix}.bias"), 1)?;
        if w.shape[2] != 3 || w.shape[3] != 3 {
            return Err(format!("{prefix}: kernel must be 3x3"));
        }
        Conv3x3::new(w.shape[1], w.shape[0], dilation, w.data.clone(), b.data.clone())
            .map_err(|e| format!("{prefix}: {e}"))
    }

    /// `<prefix>.{proj,excite_down,excite_up,spatial}`; the reduction is
    /// inferred from the bottleneck width.
    pub fn attention(&self, prefix: &str) -> Result<AttentionParams, String> {
        let proj = self.dense(&format!("{prefix}.proj"))?;
        let down = self.dense(&format!("{prefix}.excite_down"))?;
        let up = self.dense(&format!("{prefix}.excite_up"))?;
        let spatial = self.dense(&format!("{prefix}.spatial"))?;
        if down.outputs() == 0 || proj.outputs() % down.outputs() != 0 {
            return Err(format!("{prefix}: bottleneck does not divide projected width"));
        }
        let r = proj.outputs() / down.outputs();
        AttentionParams::new(proj, down, up, r, spatial).map_err(|e| format!("{prefix}: {e}"))
    }

    /// `<prefix>.branch{0,1,2}`, `<prefix>.pooled`, `<prefix>.project`.
    pub fn aspp(&self, prefix: &str, rates: [usize; 3]) -> Result<AsppParams, String> {
        let branches = [
            self.conv3x3(&format!("{prefix}.branch0"), rates[0])?,
            self.conv3x3(&format!("{prefix}.branch1"), rates[1])?,
            self.conv3x3(&format!("{prefix}.branch2"), rates[2])?,
        ];
        let pooled = self.dense(&format!("{prefix}.pooled"))?;
        let project = self.dense(&format!("{prefix}.project"))?;
        AsppParams::new(branches, pooled, project).map_err(|e| format!("{prefix}: {e}"))
    }
}
