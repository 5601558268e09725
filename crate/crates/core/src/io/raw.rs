//! Raw little-endian scalar volumes with a JSON sidecar.
//!
//! `lesion.raw` holds `dims[0]·dims[1]·dims[2]` scalars, x fastest, and
//! `lesion.raw.json` describes them:
//!
//! ```json
//! {"dims": [64, 64, 64], "spacing": [0.93, 0.93, 0.5], "dtype": "f32", "byte_order": "little"}
//! ```

use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Spacing, Volume3D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RawDtype {
    F32,
    F64,
}

impl RawDtype {
    pub fn width(self) -> usize {
        match self {
            RawDtype::F32 => 4,
            RawDtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSidecar {
    pub dims: Dims,
    pub spacing: Spacing,
    pub dtype: RawDtype,
    pub byte_order: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<Volume3D> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    if !side.is_file() {
        return Err(Error::MissingSidecar {
            path: path.into(),
            sidecar: side,
        });
    }
    let text = std::fs::read(&side).map_err(|e| Error::io(&side, e))?;
    let meta: RawSidecar = serde_json::from_slice(&text).map_err(|e| Error::Json {
        path: side.clone(),
        source: e,
    })?;
    let mismatch = |reason: String| Error::MetadataMismatch {
        path: path.into(),
        reason,
    };
    if meta.byte_order != "little" {
        return Err(mismatch(format!("byte_order {:?} (only \"little\" is supported)", meta.byte_order)));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let n = meta.dims.iter().product::<usize>();
    let w = meta.dtype.width();
    if bytes.len() != n * w {
        return Err(mismatch(format!(
            "file has {} bytes, dims {:?} × {} bytes need {}",
            bytes.len(),
            meta.dims,
            w,
            n * w
        )));
    }
    let data: Vec<f64> = match meta.dtype {
        RawDtype::F32 => bytes.chunks_exact(4).map(|c| LittleEndian::read_f32(c) as f64).collect(),
        RawDtype::F64 => bytes.chunks_exact(8).map(LittleEndian::read_f64).collect(),
    };
    if let Some(index) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteVoxel {
            path: path.into(),
            index,
        });
    }
    Volume3D::new(meta.dims, meta.spacing, data).map_err(|e| mismatch(e.to_string()))
}

/// Writes `vol` and its sidecar; `F32` rounds each value to single precision.
pub fn write_raw(path: impl AsRef<Path>, vol: &Volume3D, dtype: RawDtype) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = vec![0u8; vol.len() * dtype.width()];
    match dtype {
        RawDtype::F32 => {
            for (c, v) in bytes.chunks_exact_mut(4).zip(vol.data()) {
                LittleEndian::write_f32(c, *v as f32);
            }
        }
        RawDtype::F64 => {
            for (c, v) in bytes.chunks_exact_mut(8).zip(vol.data()) {
                LittleEndian::write_f64(c, *v);
            }
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = RawSidecar {
        dims: vol.dims(),
        spacing: vol.spacing(),
        dtype,
        byte_order: "little".into(),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string(&meta).expect("sidecar serializes");
    std::fs::write(&side, text).map_err(|e| Error::io(&side, e))
}
