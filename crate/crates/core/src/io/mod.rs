//! Volume loaders, the lesion manifest, feature tables and JSON documents.

pub mod manifest;
pub mod nifti;
pub mod raw;
pub mod table;

use std::path::Path;

pub use manifest::{load_manifest, parse_manifest, render_manifest, write_manifest, ManifestRecord, MANIFEST_COLUMNS};
pub use nifti::{load_nifti, parse_nifti};
pub use raw::{load_raw, write_raw, RawDtype, RawSidecar};
pub use table::{read_feature_table, read_json, write_feature_table, write_json};

use crate::error::{Error, Result};
use crate::volume::{DceSeries, LesionRoi, Mask3D, Volume3D, DEFAULT_PHASE_INTERVAL_S};

/// Picks the loader from the extension: `.raw` or NIfTI (`.nii`, `.nii.gz`).
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume3D> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "raw") {
        load_raw(path)
    } else {
        load_nifti(path)
    }
}

/// Loads the six phases and mask of one manifest record.
pub fn load_lesion(record: &ManifestRecord) -> Result<(DceSeries, LesionRoi)> {
    let phases = record
        .phases
        .iter()
        .map(load_volume)
        .collect::<Result<Vec<_>>>()?;
    let series = DceSeries::from_vec(phases, DEFAULT_PHASE_INTERVAL_S)?;
    let mask_vol = load_volume(&record.mask)?;
    if mask_vol.dims() != series.dims() {
        return Err(Error::DimensionMismatch {
            expected: series.dims(),
            found: mask_vol.dims(),
        });
    }
    let roi = LesionRoi::new(
        record.patient_id.clone(),
        record.lesion_id.clone(),
        Mask3D::from_volume(&mask_vol),
        record.label,
    )?;
    Ok((series, roi))
}
