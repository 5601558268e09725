//! Breast DCE-MRI lesion characterization.
//!
//! Kinetic-curve maps and summary features, a radiomic feature bank on the
//! peak-enhancement phase, per-block LASSO selection, LDA classification and
//! patient-grouped cross-validation, plus file loaders and a synthetic
//! phantom generator.

pub mod error;
pub mod evaluation;
pub mod features;
pub mod filters;
pub mod io;
pub mod kinetic;
pub mod lda;
pub mod phantom;
pub mod pipeline;
pub mod radiomics;
pub mod selection;
pub mod volume;

pub use error::{Error, Result};
pub use features::{
    extract_lesion_features, feature_names, ExtractionConfig, FeatureBlock, FeatureMatrix, FeatureSet,
};
pub use volume::{DceSeries, Label, LesionRoi, Mask3D, Volume3D};
