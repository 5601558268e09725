//! Single-file NIfTI-1 reader (int16, float32 and float64 scalars).
//!
//! Orientation (qform/sform) is ignored; only voxel spacing is kept, so a
//! mask and its phases must share the same voxel grid.

use std::io::Read;
use std::path::Path;

use byteorder::{BigEndian, ByteOrder, LittleEndian};
use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::volume::Volume3D;

pub const HEADER_SIZE: usize = 348;
pub const DT_INT16: i16 = 4;
pub const DT_FLOAT32: i16 = 16;
pub const DT_FLOAT64: i16 = 64;

/// Reads `path`, transparently inflating gzip content.
pub fn load_nifti(path: impl AsRef<Path>) -> Result<Volume3D> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let bytes = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        out
    } else {
        bytes
    };
    parse_nifti(path, &bytes)
}

/// Decodes an in-memory (already inflated) NIfTI-1 file.
pub fn parse_nifti(path: &Path, bytes: &[u8]) -> Result<Volume3D> {
    if bytes.len() < HEADER_SIZE {
        return Err(Error::TruncatedFile {
            path: path.into(),
            needed: HEADER_SIZE,
            available: bytes.len(),
        });
    }
    if LittleEndian::read_i32(&bytes[0..4]) == HEADER_SIZE as i32 {
        decode::<LittleEndian>(path, bytes)
    } else if BigEndian::read_i32(&bytes[0..4]) == HEADER_SIZE as i32 {
        decode::<BigEndian>(path, bytes)
    } else {
        Err(Error::BadMagic { path: path.into() })
    }
}

fn decode<B: ByteOrder>(path: &Path, bytes: &[u8]) -> Result<Volume3D> {
    let unsupported = |reason: String| Error::UnsupportedDatatype {
        path: path.into(),
        reason,
    };
    match &bytes[344..348] {
        b"n+1\0" => {}
        b"ni1\0" => return Err(unsupported("two-file (.hdr/.img) layout".into())),
        _ => return Err(Error::BadMagic { path: path.into() }),
    }

    let dim: Vec<i16> = (0..8).map(|i| B::read_i16(&bytes[40 + 2 * i..])).collect();
    let ndim = dim[0];
    if !(ndim == 3 || (ndim == 4 && dim[4] == 1)) {
        return Err(unsupported(format!(
            "dim[0] = {ndim} (only 3-D volumes or 4-D with one frame are accepted)"
        )));
    }
    if dim[1..4].iter().any(|&d| d < 1) {
        return Err(unsupported(format!("non-positive extent in dim {:?}", &dim[1..4])));
    }
    let dims = [dim[1] as usize, dim[2] as usize, dim[3] as usize];

    let datatype = B::read_i16(&bytes[70..]);
    let width = match datatype {
        DT_INT16 => 2,
        DT_FLOAT32 => 4,
        DT_FLOAT64 => 8,
        other => return Err(unsupported(format!("datatype code {other}"))),
    };

    let pixdim: [f64; 3] = std::array::from_fn(|i| B::read_f32(&bytes[80 + 4 * i..]) as f64);
    if pixdim.iter().any(|p| !p.is_finite() || *p <= 0.0) {
        return Err(Error::NonPositivePixdim {
            path: path.into(),
            pixdim,
        });
    }

    let vox_offset = B::read_f32(&bytes[108..]);
    if !vox_offset.is_finite() || vox_offset < HEADER_SIZE as f32 {
        return Err(unsupported(format!("vox_offset {vox_offset}")));
    }
    let offset = vox_offset as usize;
    let slope = B::read_f32(&bytes[112..]) as f64;
    let inter = B::read_f32(&bytes[116..]) as f64;
    let scale = slope != 0.0 && slope.is_finite();

    let n = dims[0] * dims[1] * dims[2];
    let needed = offset + n * width;
    if bytes.len() < needed {
        return Err(Error::TruncatedFile {
            path: path.into(),
            needed,
            available: bytes.len(),
        });
    }
    let raw = &bytes[offset..needed];
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        let chunk = &raw[i * width..];
        let v = match datatype {
            DT_INT16 => B::read_i16(chunk) as f64,
            DT_FLOAT32 => B::read_f32(chunk) as f64,
            _ => B::read_f64(chunk),
        };
        let v = if scale { slope * v + inter } else { v };
        if !v.is_finite() {
            return Err(Error::NonFiniteVoxel {
                path: path.into(),
                index: i,
            });
        }
        data.push(v);
    }
    Volume3D::new(dims, pixdim, data)
}
