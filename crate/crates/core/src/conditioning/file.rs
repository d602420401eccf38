//! Binary feature file.
//!
//! ```text
//! b"EXCF"                magic
//! u32 LE                 format version (1)
//! u32 LE                 frame count F
//! u32 LE                 dimension D
//! F * D f32 LE           feature rows, row-major, unnormalized
//! u32 LE                 gain count G
//! G f32 LE               target normalization gains
//! ```
//!
//! The trailing gains are indexed by target kind (speech, noise-shaped
//! residual, LP residual); they let synthesis undo per-utterance target
//! scaling without the reference audio.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"EXCF";
pub const FEATURE_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub rows: Array2<f32>,
    pub gains: Vec<f32>,
}

impl FeatureFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let (frames, dim) = self.rows.dim();
        let mut out = Vec::with_capacity(24 + 4 * (frames * dim + self.gains.len()));
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&FEATURE_FILE_VERSION.to_le_bytes());
        out.extend_from_slice(&(frames as u32).to_le_bytes());
        out.extend_from_slice(&(dim as u32).to_le_bytes());
        for v in self.rows.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.gains.len() as u32).to_le_bytes());
        for g in &self.gains {
            out.extend_from_slice(&g.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != FEATURE_MAGIC {
            return Err(Error::Format("bad feature file magic".into()));
        }
        let version = cur.u32()?;
        if version != FEATURE_FILE_VERSION {
            return Err(Error::Format(format!("unsupported feature file version {version}")));
        }
        let frames = cur.u32()? as usize;
        let dim = cur.u32()? as usize;
        let values = (0..frames * dim)
            .map(|_| cur.f32())
            .collect::<Result<Vec<f32>>>()?;
        let rows = Array2::from_shape_vec((frames, dim), values)
            .map_err(|e| Error::Format(e.to_string()))?;
        let count = cur.u32()? as usize;
        let gains = (0..count).map(|_| cur.f32()).collect::<Result<Vec<f32>>>()?;
        if cur.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes in feature file",
                bytes.len() - cur.pos
            )));
        }
        Ok(Self { rows, gains })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let out = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Format("truncated feature file".into()))?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn write_feature_file(path: impl AsRef<Path>, file: &FeatureFile) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, file.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureFile::from_bytes(&bytes)
}
