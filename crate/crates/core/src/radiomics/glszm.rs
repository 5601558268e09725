use super::discretize::DiscretizedRoi;
use super::shape::neighbor;
use super::NEIGHBORS_26;
use crate::volume::coords;

pub const GLSZM_NAMES: [&str; 16] = [
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "ZonePercentage",
    "GrayLevelVariance",
    "ZoneVariance",
    "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
];

/// Counts of 26-connected same-level zones by (level, size).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glszm {
    pub ng: usize,
    pub max_size: usize,
    /// `ng × max_size`, row-major; entry `(g-1, s-1)` counts zones of level g and size s.
    pub counts: Vec<u64>,
    pub n_voxels: usize,
}

impl Glszm {
    pub fn at(&self, level: usize, size: usize) -> u64 {
        self.counts[(level - 1) * self.max_size + (size - 1)]
    }

    pub fn zone_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Sizes of every zone as (level, size), in order of each zone's first voxel.
pub fn zones(d: &DiscretizedRoi) -> Vec<(u16, usize)> {
    let dims = d.dims();
    let levels = d.levels();
    let mut seen = vec![false; levels.len()];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for (start, &level) in levels.iter().enumerate() {
        if level == 0 || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(i) = stack.pop() {
            size += 1;
            let p = coords(dims, i);
            for dir in NEIGHBORS_26 {
                if let Some(j) = neighbor(dims, p, dir) {
                    if !seen[j] && levels[j] == level {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        out.push((level, size));
    }
    out
}

pub fn glszm_matrix(d: &DiscretizedRoi) -> Glszm {
    let zs = zones(d);
    let max_size = zs.iter().map(|z| z.1).max().unwrap_or(1);
    let ng = d.ng();
    let mut counts = vec![0u64; ng * max_size];
    for (level, size) in zs {
        counts[(level as usize - 1) * max_size + size - 1] += 1;
    }
    Glszm {
        ng,
        max_size,
        counts,
        n_voxels: d.voxel_count(),
    }
}

pub fn glszm_features(m: &Glszm) -> [f64; 16] {
    let nz = m.zone_count() as f64;
    if nz == 0.0 {
        return [0.0; 16];
    }
    let (ng, ns) = (m.ng, m.max_size);
    let mut by_level = vec![0.0; ng];
    let mut by_size = vec![0.0; ns];
    for g in 0..ng {
        for s in 0..ns {
            let c = m.counts[g * ns + s] as f64;
            by_level[g] += c;
            by_size[s] += c;
        }
    }
    let mu_g: f64 = (0..ng).map(|g| (g + 1) as f64 * by_level[g] / nz).sum();
    let mu_s: f64 = (0..ns).map(|s| (s + 1) as f64 * by_size[s] / nz).sum();

    let mut f = [0.0; 16];
    for g in 0..ng {
        for s in 0..ns {
            let c = m.counts[g * ns + s] as f64;
            if c == 0.0 {
                continue;
            }
            let p = c / nz;
            let (i, j) = ((g + 1) as f64, (s + 1) as f64);
            let (i2, j2) = (i * i, j * j);
            f[0] += p / j2;
            f[1] += p * j2;
            f[7] += p * (i - mu_g).powi(2);
            f[8] += p * (j - mu_s).powi(2);
            f[9] -= p * p.log2();
            f[10] += p / i2;
            f[11] += p * i2;
            f[12] += p / (i2 * j2);
            f[13] += p * i2 / j2;
            f[14] += p * j2 / i2;
            f[15] += p * i2 * j2;
        }
    }
    let gln: f64 = by_level.iter().map(|c| c * c).sum::<f64>();
    let szn: f64 = by_size.iter().map(|c| c * c).sum::<f64>();
    f[2] = gln / nz;
    f[3] = gln / (nz * nz);
    f[4] = szn / nz;
    f[5] = szn / (nz * nz);
    f[6] = nz / m.n_voxels as f64;
    f
}
