use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: [usize; 3],
        found: [usize; 3],
    },
    #[error("mask has no true voxels")]
    EmptyMask,
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("rate map of kind {found:?} passed where {expected:?} was required")]
    WrongMapKind {
        expected: crate::kinetic::RateMapKind,
        found: crate::kinetic::RateMapKind,
    },
    #[error("rate map has no defined voxels")]
    EmptyMap,
    #[error("volume too small for filter: dims {0:?} (each axis needs at least 2 voxels)")]
    VolumeTooSmall([usize; 3]),
    #[error("filter sigma must be finite and > 0, got {0}")]
    NonPositiveSigma(f64),
    #[error("gray level count must be >= 2, got {0}")]
    BadLevelCount(usize),
    #[error("too few rows: {0}")]
    TooFewRows(String),
    #[error("coordinate descent did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
    #[error("pooled covariance is singular even after ridge regularization")]
    SingularCovariance,
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("ROC analysis needs both classes present")]
    OneClassOnly,
    #[error("too few patient groups: {0}")]
    TooFewGroups(String),
    #[error("unknown feature column: {0}")]
    UnknownFeature(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("lesion does not fit inside the grid: {0}")]
    LesionDoesNotFit(String),

    #[error("{path}: unsupported NIfTI content: {reason}")]
    UnsupportedDatatype { path: PathBuf, reason: String },
    #[error("{path}: bad NIfTI magic or header size")]
    BadMagic { path: PathBuf },
    #[error("{path}: file truncated (need {needed} bytes, have {available})")]
    TruncatedFile {
        path: PathBuf,
        needed: usize,
        available: usize,
    },
    #[error("{path}: non-positive pixdim {pixdim:?}")]
    NonPositivePixdim { path: PathBuf, pixdim: [f64; 3] },
    #[error("{path}: non-finite intensity at voxel {index}")]
    NonFiniteVoxel { path: PathBuf, index: usize },
    #[error("{path}: missing sidecar {sidecar}")]
    MissingSidecar { path: PathBuf, sidecar: PathBuf },
    #[error("{path}: metadata mismatch: {reason}")]
    MetadataMismatch { path: PathBuf, reason: String },
    #[error("{path}:{line}: {message}")]
    ParseError {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: duplicate lesion ({patient_id}, {lesion_id})")]
    DuplicateLesion {
        path: PathBuf,
        line: usize,
        patient_id: String,
        lesion_id: String,
    },
    #[error("{path}:{line}: unknown label {label:?} (expected benign or malignant)")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        label: String,
    },
    #[error("{path}:{line}: referenced file does not exist: {missing}")]
    MissingFile {
        path: PathBuf,
        line: usize,
        missing: PathBuf,
    },
    #[error("{path}: header mismatch: {reason}")]
    HeaderMismatch { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("lesion {patient_id}/{lesion_id}: {source}")]
    Lesion {
        patient_id: String,
        lesion_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
