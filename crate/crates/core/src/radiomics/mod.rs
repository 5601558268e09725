//! Radiomic feature bank.
//!
//! Shape features come from the lesion mask alone. First-order, GLCM,
//! GLSZM and GLDM features are computed on every derived image of the
//! catalog (original, eight wavelet bands, LoG scales), each after its own
//! fixed-bin-count discretization. Names follow
//! `<image>_<family>_<feature>`, e.g. `wavelet-LHH_glszm_ZoneEntropy`.

pub mod discretize;
pub mod first_order;
pub mod glcm;
pub mod gldm;
pub mod glszm;
pub mod shape;

use serde::{Deserialize, Serialize};

pub use discretize::{discretize, DiscretizedRoi, DEFAULT_BIN_COUNT};
pub use first_order::{first_order_features, FIRST_ORDER_NAMES};
pub use glcm::{glcm_counts, glcm_features, glcm_matrix, unique_directions, Glcm, GLCM_NAMES};
pub use gldm::{gldm_features, gldm_matrix, Gldm, GLDM_NAMES};
pub use glszm::{glszm_features, glszm_matrix, Glszm, GLSZM_NAMES};
pub use shape::{shape_features, SHAPE_NAMES};

use crate::error::{Error, Result};
use crate::filters::{default_catalog, derive, DerivedImageId, DEFAULT_LOG_SIGMAS_MM};
use crate::kinetic::select_peak_phase;
use crate::volume::{bounding_box, DceSeries, LesionRoi, Mask3D, Volume3D};

pub(crate) const NEIGHBORS_26: [[isize; 3]; 26] = {
    let mut out = [[0isize; 3]; 26];
    let mut n = 0;
    let mut dz = -1;
    while dz <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dx = -1;
            while dx <= 1 {
                if !(dx == 0 && dy == 0 && dz == 0) {
                    out[n] = [dx, dy, dz];
                    n += 1;
                }
                dx += 1;
            }
            dy += 1;
        }
        dz += 1;
    }
    out
};

/// Features per derived image.
pub const PER_IMAGE_FEATURES: usize =
    FIRST_ORDER_NAMES.len() + GLCM_NAMES.len() + GLSZM_NAMES.len() + GLDM_NAMES.len();

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiomicsConfig {
    pub bin_count: usize,
    pub catalog: Vec<DerivedImageId>,
    /// Dependence tolerance for the GLDM.
    pub gldm_alpha: u16,
}

impl Default for RadiomicsConfig {
    fn default() -> Self {
        Self {
            bin_count: DEFAULT_BIN_COUNT,
            catalog: default_catalog(&DEFAULT_LOG_SIGMAS_MM),
            gldm_alpha: 0,
        }
    }
}

/// Ordered named radiomic features of one lesion.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiomicFeatureSet {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

impl RadiomicFeatureSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Canonical feature names for a catalog.
pub fn radiomic_feature_names(catalog: &[DerivedImageId]) -> Vec<String> {
    let mut names: Vec<String> = SHAPE_NAMES
        .iter()
        .map(|f| format!("original_shape_{f}"))
        .collect();
    for id in catalog {
        let image = id.name();
        let families: [(&str, &[&str]); 4] = [
            ("firstorder", &FIRST_ORDER_NAMES),
            ("glcm", &GLCM_NAMES),
            ("glszm", &GLSZM_NAMES),
            ("gldm", &GLDM_NAMES),
        ];
        for (family, features) in families {
            names.extend(features.iter().map(|f| format!("{image}_{family}_{f}")));
        }
    }
    names
}

/// First-order, GLCM, GLSZM and GLDM features of one image inside `mask`.
pub fn image_features(
    image: &Volume3D,
    mask: &Mask3D,
    bin_count: usize,
    gldm_alpha: u16,
) -> Result<Vec<f64>> {
    let levels = discretize(image, mask, bin_count)?;
    let mut out = Vec::with_capacity(PER_IMAGE_FEATURES);
    out.extend(first_order_features(image, mask, bin_count)?);
    out.extend(glcm_features(&glcm_matrix(&levels)));
    out.extend(glszm_features(&glszm_matrix(&levels)));
    out.extend(gldm_features(&gldm_matrix(&levels, gldm_alpha)));
    Ok(out)
}

/// Radiomic features of `roi` on the peak-enhancement phase.
///
/// Filtering runs on a crop around the lesion padded by each filter's
/// reach, which gives the same in-mask values as filtering the full grid.
pub fn extract_radiomic_features(
    series: &DceSeries,
    roi: &LesionRoi,
    config: &RadiomicsConfig,
) -> Result<RadiomicFeatureSet> {
    let peak = select_peak_phase(series, &roi.mask)?;
    let base = series.phase(peak);
    let spacing = base.spacing();

    let mut pad = [0usize; 3];
    for id in &config.catalog {
        let r = id.reach(spacing);
        for a in 0..3 {
            pad[a] = pad[a].max(r[a]);
        }
    }
    let bbox = bounding_box(&roi.mask)?.padded(pad, base.dims());
    let base = base.crop(&bbox);
    let mask = roi.mask.crop(&bbox);

    let mut values = Vec::with_capacity(SHAPE_NAMES.len() + config.catalog.len() * PER_IMAGE_FEATURES);
    values.extend(shape_features(&mask, spacing)?);
    for id in &config.catalog {
        let image = derive(&base, id)?;
        values.extend(image_features(&image, &mask, config.bin_count, config.gldm_alpha)?);
    }
    let names = radiomic_feature_names(&config.catalog);
    debug_assert_eq!(names.len(), values.len());
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidVolume(format!("non-finite feature {}", names[i])));
    }
    Ok(RadiomicFeatureSet { names, values })
}
