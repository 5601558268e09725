//! Geometry-aware scalar volumes and binary masks.
//!
//! Every grid in the crate is stored row-major with x varying fastest:
//! the linear index of voxel `(x, y, z)` is `x + nx * (y + ny * z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Dims = [usize; 3];
pub type Spacing = [f64; 3];

#[inline]
pub fn linear_index(dims: Dims, x: usize, y: usize, z: usize) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

#[inline]
pub fn coords(dims: Dims, index: usize) -> [usize; 3] {
    let x = index % dims[0];
    let rest = index / dims[0];
    [x, rest % dims[1], rest / dims[1]]
}

fn check_dims(dims: Dims) -> Result<usize> {
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::InvalidVolume(format!("zero-sized dims {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidVolume(format!("dims {dims:?} overflow")))
}

/// A 3D scalar image with physical voxel spacing in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    dims: Dims,
    spacing: Spacing,
    data: Vec<f64>,
}

impl Volume3D {
    pub fn new(dims: Dims, spacing: Spacing, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::InvalidVolume(format!(
                "data length {} does not match dims {dims:?} ({len} voxels)",
                data.len()
            )));
        }
        if spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidVolume(format!(
                "spacing {spacing:?} must be finite and positive"
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidVolume(format!(
                "non-finite intensity at voxel {i}"
            )));
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    pub fn filled(dims: Dims, spacing: Spacing, value: f64) -> Result<Self> {
        let len = check_dims(dims)?;
        Self::new(dims, spacing, vec![value; len])
    }

    /// Builds a volume by evaluating `f(x, y, z)` at every voxel.
    pub fn from_fn(
        dims: Dims,
        spacing: Spacing,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut data = Vec::with_capacity(len);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(dims, spacing, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[linear_index(self.dims, x, y, z)]
    }

    /// Physical volume of one voxel in mm³.
    pub fn voxel_volume_mm3(&self) -> f64 {
        voxel_volume_mm3(self.spacing)
    }

    /// Copies the sub-grid covered by `bbox` (inclusive ranges).
    pub fn crop(&self, bbox: &BoundingBox) -> Volume3D {
        let dims = bbox.dims();
        let mut data = Vec::with_capacity(dims.iter().product());
        for z in bbox.z.0..=bbox.z.1 {
            for y in bbox.y.0..=bbox.y.1 {
                let start = linear_index(self.dims, bbox.x.0, y, z);
                data.extend_from_slice(&self.data[start..start + dims[0]]);
            }
        }
        Volume3D {
            dims,
            spacing: self.spacing,
            data,
        }
    }

    pub(crate) fn from_parts_unchecked(dims: Dims, spacing: Spacing, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.iter().product::<usize>());
        Volume3D {
            dims,
            spacing,
            data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Volume3D> {
        Volume3D::new(self.dims, self.spacing, self.data.iter().map(|&v| f(v)).collect())
    }
}

pub fn voxel_volume_mm3(spacing: Spacing) -> f64 {
    spacing[0] * spacing[1] * spacing[2]
}

/// Inclusive voxel ranges along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x: (usize, usize),
    pub y: (usize, usize),
    pub z: (usize, usize),
}

impl BoundingBox {
    pub fn dims(&self) -> Dims {
        [
            self.x.1 - self.x.0 + 1,
            self.y.1 - self.y.0 + 1,
            self.z.1 - self.z.0 + 1,
        ]
    }

    pub fn contains(&self, p: [usize; 3]) -> bool {
        (self.x.0..=self.x.1).contains(&p[0])
            && (self.y.0..=self.y.1).contains(&p[1])
            && (self.z.0..=self.z.1).contains(&p[2])
    }

    /// Grows the box by `pad` voxels per axis, clamped to `dims`.
    pub fn padded(&self, pad: [usize; 3], dims: Dims) -> BoundingBox {
        let grow = |(lo, hi): (usize, usize), p: usize, n: usize| {
            (lo.saturating_sub(p), (hi + p).min(n - 1))
        };
        BoundingBox {
            x: grow(self.x, pad[0], dims[0]),
            y: grow(self.y, pad[1], dims[1]),
            z: grow(self.z, pad[2], dims[2]),
        }
    }
}

/// Binary voxel mask on the same grid convention as [`Volume3D`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask3D {
    dims: Dims,
    data: Vec<bool>,
}

impl Mask3D {
    pub fn new(dims: Dims, data: Vec<bool>) -> Result<Self> {
        let len = check_dims(dims)?;
        if data.len() != len {
            return Err(Error::InvalidVolume(format!(
                "mask length {} does not match dims {dims:?} ({len} voxels)",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: Dims, value: bool) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Self {
            dims,
            data: vec![value; len],
        })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut data = Vec::with_capacity(len);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    data.push(f(x, y, z));
                }
            }
        }
        Ok(Self { dims, data })
    }

    /// Nonzero voxels of `vol` become true.
    pub fn from_volume(vol: &Volume3D) -> Self {
        Self {
            dims: vol.dims(),
            data: vol.data().iter().map(|&v| v != 0.0).collect(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.data[linear_index(self.dims, x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = linear_index(self.dims, x, y, z);
        self.data[i] = value;
    }

    /// Linear indices of true voxels in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.data
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn voxel_count(&self) -> usize {
        voxel_count(self)
    }

    pub fn crop(&self, bbox: &BoundingBox) -> Mask3D {
        let dims = bbox.dims();
        let mut data = Vec::with_capacity(dims.iter().product());
        for z in bbox.z.0..=bbox.z.1 {
            for y in bbox.y.0..=bbox.y.1 {
                let start = linear_index(self.dims, bbox.x.0, y, z);
                data.extend_from_slice(&self.data[start..start + dims[0]]);
            }
        }
        Mask3D { dims, data }
    }

    pub(crate) fn ensure_matches(&self, dims: Dims) -> Result<()> {
        if self.dims != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: self.dims,
            });
        }
        Ok(())
    }
}

pub fn voxel_count(mask: &Mask3D) -> usize {
    mask.data.iter().filter(|&&m| m).count()
}

/// Intensities of `vol` at the true voxels of `mask`, in row-major order.
pub fn masked_values(vol: &Volume3D, mask: &Mask3D) -> Result<Vec<f64>> {
    mask.ensure_matches(vol.dims())?;
    Ok(mask.indices().map(|i| vol.data[i]).collect())
}

pub fn bounding_box(mask: &Mask3D) -> Result<BoundingBox> {
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for i in mask.indices() {
        let c = coords(mask.dims, i);
        for a in 0..3 {
            lo[a] = lo[a].min(c[a]);
            hi[a] = hi[a].max(c[a]);
        }
        any = true;
    }
    if !any {
        return Err(Error::EmptyMask);
    }
    Ok(BoundingBox {
        x: (lo[0], hi[0]),
        y: (lo[1], hi[1]),
        z: (lo[2], hi[2]),
    })
}

pub const PHASE_COUNT: usize = 6;
pub const DEFAULT_PHASE_INTERVAL_S: f64 = 90.0;

/// Six co-registered acquisitions: pre-contrast C0 followed by C1..C5.
#[derive(Debug, Clone, PartialEq)]
pub struct DceSeries {
    phases: [Volume3D; PHASE_COUNT],
    phase_interval_s: f64,
}

impl DceSeries {
    pub fn new(phases: [Volume3D; PHASE_COUNT], phase_interval_s: f64) -> Result<Self> {
        if !(phase_interval_s.is_finite() && phase_interval_s > 0.0) {
            return Err(Error::InvalidVolume(format!(
                "phase interval must be positive, got {phase_interval_s}"
            )));
        }
        let dims = phases[0].dims();
        let spacing = phases[0].spacing();
        for p in &phases[1..] {
            if p.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: p.dims(),
                });
            }
            if p.spacing() != spacing {
                return Err(Error::InvalidVolume(format!(
                    "phase spacing {:?} differs from C0 spacing {spacing:?}",
                    p.spacing()
                )));
            }
        }
        Ok(Self {
            phases,
            phase_interval_s,
        })
    }

    pub fn from_vec(phases: Vec<Volume3D>, phase_interval_s: f64) -> Result<Self> {
        let n = phases.len();
        let phases: [Volume3D; PHASE_COUNT] = phases.try_into().map_err(|_| {
            Error::InvalidVolume(format!("expected {PHASE_COUNT} phases, got {n}"))
        })?;
        Self::new(phases, phase_interval_s)
    }

    pub fn phase(&self, index: usize) -> &Volume3D {
        &self.phases[index]
    }

    pub fn phases(&self) -> &[Volume3D; PHASE_COUNT] {
        &self.phases
    }

    pub fn phase_interval_s(&self) -> f64 {
        self.phase_interval_s
    }

    pub fn dims(&self) -> Dims {
        self.phases[0].dims()
    }

    pub fn spacing(&self) -> Spacing {
        self.phases[0].spacing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Benign,
    Malignant,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Benign => "benign",
            Label::Malignant => "malignant",
        }
    }

    /// 0 for benign, 1 for malignant.
    pub fn as_binary(self) -> u8 {
        match self {
            Label::Benign => 0,
            Label::Malignant => 1,
        }
    }

    pub fn from_binary(v: u8) -> Label {
        if v == 0 {
            Label::Benign
        } else {
            Label::Malignant
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "benign" => Some(Label::Benign),
            "malignant" => Some(Label::Malignant),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A segmented lesion with its identifiers and ground-truth label.
#[derive(Debug, Clone)]
pub struct LesionRoi {
    pub patient_id: String,
    pub lesion_id: String,
    pub mask: Mask3D,
    pub label: Label,
}

impl LesionRoi {
    pub fn new(
        patient_id: impl Into<String>,
        lesion_id: impl Into<String>,
        mask: Mask3D,
        label: Label,
    ) -> Result<Self> {
        if voxel_count(&mask) == 0 {
            return Err(Error::EmptyMask);
        }
        Ok(Self {
            patient_id: patient_id.into(),
            lesion_id: lesion_id.into(),
            mask,
            label,
        })
    }
}
