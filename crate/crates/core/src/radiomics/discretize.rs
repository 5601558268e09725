use crate::error::{Error, Result};
use crate::volume::{voxel_count, Dims, Mask3D, Volume3D};

pub const DEFAULT_BIN_COUNT: usize = 32;

/// Gray levels `1..=ng` on the full grid; 0 marks voxels outside the ROI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedRoi {
    dims: Dims,
    ng: usize,
    levels: Vec<u16>,
}

impl DiscretizedRoi {
    /// Wraps precomputed levels. Every nonzero level must lie in `1..=ng`.
    pub fn from_levels(dims: Dims, ng: usize, levels: Vec<u16>) -> Result<Self> {
        if ng < 2 || ng > u16::MAX as usize {
            return Err(Error::BadLevelCount(ng));
        }
        if levels.len() != dims.iter().product::<usize>() {
            return Err(Error::InvalidVolume(format!(
                "level grid length {} does not match dims {dims:?}",
                levels.len()
            )));
        }
        if levels.iter().any(|&l| l as usize > ng) {
            return Err(Error::InvalidVolume(format!("level above ng = {ng}")));
        }
        Ok(Self { dims, ng, levels })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn ng(&self) -> usize {
        self.ng
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    /// Number of voxels inside the ROI.
    pub fn voxel_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l > 0).count()
    }

    /// In-ROI levels in row-major order.
    pub fn roi_levels(&self) -> impl Iterator<Item = u16> + '_ {
        self.levels.iter().copied().filter(|&l| l > 0)
    }
}

/// Fixed bin count: `min(ng, 1 + floor(ng · (v − vmin) / (vmax − vmin)))`
/// over in-mask extremes; a flat ROI maps to level 1.
pub fn discretize(vol: &Volume3D, mask: &Mask3D, ng: usize) -> Result<DiscretizedRoi> {
    if ng < 2 || ng > u16::MAX as usize {
        return Err(Error::BadLevelCount(ng));
    }
    mask.ensure_matches(vol.dims())?;
    if voxel_count(mask) == 0 {
        return Err(Error::EmptyMask);
    }
    let data = vol.data();
    let (vmin, vmax) = mask.indices().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
        (lo.min(data[i]), hi.max(data[i]))
    });
    let range = vmax - vmin;
    let mut levels = vec![0u16; data.len()];
    for i in mask.indices() {
        levels[i] = if range > 0.0 {
            let bin = (ng as f64 * (data[i] - vmin) / range).floor() as usize;
            (1 + bin).min(ng) as u16
        } else {
            1
        };
    }
    Ok(DiscretizedRoi {
        dims: vol.dims(),
        ng,
        levels,
    })
}
