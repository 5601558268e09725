//! Manifest-level feature extraction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{extract_lesion_features, feature_names, ExtractionConfig, FeatureMatrix};
use crate::io::{load_lesion, ManifestRecord};

/// Extracts every lesion of `records` in parallel; rows keep manifest order.
///
/// `on_done` is called once per finished lesion (from worker threads).
/// The first failure aborts the run and names its lesion.
pub fn extract_manifest(
    records: &[ManifestRecord],
    config: &ExtractionConfig,
    on_done: impl Fn(&ManifestRecord) + Sync,
) -> Result<FeatureMatrix> {
    let rows = records
        .par_iter()
        .map(|r| {
            let wrap = |e: Error| match e {
                Error::Lesion { .. } => e,
                e => Error::Lesion {
                    patient_id: r.patient_id.clone(),
                    lesion_id: r.lesion_id.clone(),
                    source: Box::new(e),
                },
            };
            let (series, roi) = load_lesion(r).map_err(wrap)?;
            let row = extract_lesion_features(&series, &roi, config).map_err(wrap)?;
            on_done(r);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut m = FeatureMatrix::empty(feature_names(config));
    for (r, row) in records.iter().zip(rows) {
        m.push_row(r.patient_id.clone(), r.lesion_id.clone(), r.label, &row)?;
    }
    Ok(m)
}
