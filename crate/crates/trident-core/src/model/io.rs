//! Binary model files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//!   "OPEN"  magic
//!   u32     format version (1)
//!   u8      kind: 0 = three-branch cube model, 1 = spectrogram baseline
//!   u32     classes
//!   u32     head hidden width (0 for the baseline)
//!   u32...  input dims: t,m,n for kind 0; rows,cols for kind 1
//!   u32     stem channels
//!   u32     se reduction
//!   u32     stage count, then per stage:
//!             u32 expansion, u32 kernel, u32 stride, u32 out_channels, u32 repeats
//!   f64...  normalization stats as (mean, std) pairs: three for kind 0, one for kind 1
//!   f32...  every parameter block in declaration order, including batch-norm
//!           running statistics
//!   u32     CRC-32 of all preceding bytes
//! ```

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::projection::NormStats;
use crate::nn::param::ParamBlock;

use super::{Baseline2dModel, BranchSpec, ModelError, Open3dModel, StageSpec};

pub const MODEL_MAGIC: &[u8; 4] = b"OPEN";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("unknown model kind tag {0}")]
    BadKind(u8),
    #[error("model file checksum mismatch")]
    ChecksumMismatch,
    #[error("model file truncated")]
    Truncated,
    #[error("model file has trailing bytes")]
    TrailingBytes,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Either classifier kind behind one file format and harness interface.
// A process holds at most a handful of models at once, so the size gap
// between the variants costs nothing; boxing would only add indirection.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum AnyModel {
    ThreeBranch(Open3dModel),
    Spectro(Baseline2dModel),
}

impl AnyModel {
    pub fn classes(&self) -> usize {
        match self {
            AnyModel::ThreeBranch(m) => m.classes,
            AnyModel::Spectro(m) => m.classes,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            AnyModel::ThreeBranch(_) => "three-branch",
            AnyModel::Spectro(_) => "spectrogram-baseline",
        }
    }

    pub fn param_blocks(&mut self) -> Vec<&mut ParamBlock> {
        match self {
            AnyModel::ThreeBranch(m) => m.param_blocks(),
            AnyModel::Spectro(m) => m.param_blocks(),
        }
    }

    pub fn save(&mut self, path: &Path) -> Result<(), ModelIoError> {
        match self {
            AnyModel::ThreeBranch(m) => m.save(path),
            AnyModel::Spectro(m) => m.save(path),
        }
    }
}

// ---------------------------------------------------------------------------
// writing
// ---------------------------------------------------------------------------

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_spec(buf: &mut Vec<u8>, spec: &BranchSpec) {
    push_u32(buf, spec.stem_channels as u32);
    push_u32(buf, spec.se_reduction as u32);
    push_u32(buf, spec.stages.len() as u32);
    for st in &spec.stages {
        push_u32(buf, st.expansion as u32);
        push_u32(buf, st.kernel as u32);
        push_u32(buf, st.stride as u32);
        push_u32(buf, st.out_channels as u32);
        push_u32(buf, st.repeats as u32);
    }
}

fn push_norm(buf: &mut Vec<u8>, stats: &NormStats) {
    buf.extend_from_slice(&stats.mean.to_le_bytes());
    buf.extend_from_slice(&stats.std.to_le_bytes());
}

fn push_params(buf: &mut Vec<u8>, blocks: Vec<&mut ParamBlock>) {
    for block in blocks {
        for &v in &block.values {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
}

fn finish(mut buf: Vec<u8>, path: &Path) -> Result<(), ModelIoError> {
    let crc = crc32fast::hash(&buf);
    push_u32(&mut buf, crc);
    fs::write(path, buf)?;
    Ok(())
}

impl Open3dModel {
    pub fn save(&mut self, path: &Path) -> Result<(), ModelIoError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MODEL_MAGIC);
        push_u32(&mut buf, MODEL_VERSION);
        buf.push(0u8);
        push_u32(&mut buf, self.classes as u32);
        push_u32(&mut buf, self.hidden as u32);
        push_u32(&mut buf, self.cube_dims.0 as u32);
        push_u32(&mut buf, self.cube_dims.1 as u32);
        push_u32(&mut buf, self.cube_dims.2 as u32);
        push_spec(&mut buf, &self.spec);
        let norm = self.norm;
        for stats in &norm {
            push_norm(&mut buf, stats);
        }
        push_params(&mut buf, self.param_blocks());
        finish(buf, path)
    }
}

impl Baseline2dModel {
    pub fn save(&mut self, path: &Path) -> Result<(), ModelIoError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MODEL_MAGIC);
        push_u32(&mut buf, MODEL_VERSION);
        buf.push(1u8);
        push_u32(&mut buf, self.classes as u32);
        push_u32(&mut buf, 0);
        push_u32(&mut buf, self.input_dims.0 as u32);
        push_u32(&mut buf, self.input_dims.1 as u32);
        push_spec(&mut buf, &self.spec);
        let norm = self.norm;
        push_norm(&mut buf, &norm);
        push_params(&mut buf, self.param_blocks());
        finish(buf, path)
    }
}

// ---------------------------------------------------------------------------
// reading
// ---------------------------------------------------------------------------

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelIoError> {
        if self.at + n > self.buf.len() {
            return Err(ModelIoError::Truncated);
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, ModelIoError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, ModelIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn usize32(&mut self) -> Result<usize, ModelIoError> {
        Ok(self.u32()? as usize)
    }

    fn f64(&mut self) -> Result<f64, ModelIoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, ModelIoError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn spec(&mut self) -> Result<BranchSpec, ModelIoError> {
        let stem_channels = self.usize32()?;
        let se_reduction = self.usize32()?;
        let count = self.usize32()?;
        let mut stages = Vec::with_capacity(count);
        for _ in 0..count {
            stages.push(StageSpec {
                expansion: self.usize32()?,
                kernel: self.usize32()?,
                stride: self.usize32()?,
                out_channels: self.usize32()?,
                repeats: self.usize32()?,
            });
        }
        Ok(BranchSpec { stem_channels, stages, se_reduction })
    }

    fn norm(&mut self) -> Result<NormStats, ModelIoError> {
        Ok(NormStats { mean: self.f64()?, std: self.f64()? })
    }

    fn fill_params(&mut self, blocks: Vec<&mut ParamBlock>) -> Result<(), ModelIoError> {
        for block in blocks {
            for i in 0..block.values.len() {
                block.values[i] = self.f32()? as f64;
            }
        }
        Ok(())
    }
}

/// Reads either model kind from a file.
pub fn load_model(path: &Path) -> Result<AnyModel, ModelIoError> {
    let bytes = fs::read(path)?;
    if bytes.len() < MODEL_MAGIC.len() + 8 {
        return Err(ModelIoError::Truncated);
    }
    let (payload, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    if crc32fast::hash(payload) != stored {
        return Err(ModelIoError::ChecksumMismatch);
    }

    let mut r = Reader { buf: payload, at: 0 };
    if r.take(4)? != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(ModelIoError::UnsupportedVersion(version));
    }
    let kind = r.u8()?;
    let classes = r.usize32()?;
    let hidden = r.usize32()?;

    let model = match kind {
        0 => {
            let t = r.usize32()?;
            let m = r.usize32()?;
            let n = r.usize32()?;
            let spec = r.spec()?;
            let norm = [r.norm()?, r.norm()?, r.norm()?];
            let mut model = Open3dModel::new(spec, (t, m, n), classes, hidden, 0)?;
            model.norm = norm;
            r.fill_params(model.param_blocks())?;
            AnyModel::ThreeBranch(model)
        }
        1 => {
            let rows = r.usize32()?;
            let cols = r.usize32()?;
            let spec = r.spec()?;
            let norm = r.norm()?;
            let mut model = Baseline2dModel::new(spec, (rows, cols), classes, 0)?;
            model.norm = norm;
            r.fill_params(model.param_blocks())?;
            AnyModel::Spectro(model)
        }
        other => return Err(ModelIoError::BadKind(other)),
    };
    if r.at != payload.len() {
        return Err(ModelIoError::TrailingBytes);
    }
    Ok(model)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
