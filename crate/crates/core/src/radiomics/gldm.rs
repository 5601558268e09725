use super::discretize::DiscretizedRoi;
use super::shape::neighbor;
use super::NEIGHBORS_26;
use crate::volume::coords;

pub const GLDM_NAMES: [&str; 14] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "GrayLevelVariance",
    "DependenceVariance",
    "DependenceEntropy",
    "LowGrayLevelEmphasis",
    "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
];

/// Voxel counts by (level, number of dependent 26-neighbours).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gldm {
    pub ng: usize,
    /// Number of dependence columns (`max dependence + 1`).
    pub width: usize,
    /// `ng × width`, row-major; entry `(g-1, d)`.
    pub counts: Vec<u64>,
}

impl Gldm {
    pub fn at(&self, level: usize, dependence: usize) -> u64 {
        self.counts[(level - 1) * self.width + dependence]
    }
}

/// A neighbour is dependent when it is in the ROI and its level differs by at most `alpha`.
pub fn gldm_matrix(d: &DiscretizedRoi, alpha: u16) -> Gldm {
    let dims = d.dims();
    let levels = d.levels();
    let mut pairs = Vec::new();
    for (i, &g) in levels.iter().enumerate() {
        if g == 0 {
            continue;
        }
        let p = coords(dims, i);
        let dep = NEIGHBORS_26
            .iter()
            .filter_map(|dir| neighbor(dims, p, *dir))
            .filter(|&j| levels[j] > 0 && levels[j].abs_diff(g) <= alpha)
            .count();
        pairs.push((g as usize, dep));
    }
    let width = pairs.iter().map(|p| p.1).max().unwrap_or(0) + 1;
    let ng = d.ng();
    let mut counts = vec![0u64; ng * width];
    for (g, dep) in pairs {
        counts[(g - 1) * width + dep] += 1;
    }
    Gldm { ng, width, counts }
}

/// Dependence column `d` is weighted as size `d + 1` (the voxel itself counts).
pub fn gldm_features(m: &Gldm) -> [f64; 14] {
    let nz: f64 = m.counts.iter().sum::<u64>() as f64;
    if nz == 0.0 {
        return [0.0; 14];
    }
    let (ng, nd) = (m.ng, m.width);
    let mut by_level = vec![0.0; ng];
    let mut by_dep = vec![0.0; nd];
    for g in 0..ng {
        for d in 0..nd {
            let c = m.counts[g * nd + d] as f64;
            by_level[g] += c;
            by_dep[d] += c;
        }
    }
    let mu_g: f64 = (0..ng).map(|g| (g + 1) as f64 * by_level[g] / nz).sum();
    let mu_d: f64 = (0..nd).map(|d| (d + 1) as f64 * by_dep[d] / nz).sum();

    let mut f = [0.0; 14];
    for g in 0..ng {
        for d in 0..nd {
            let c = m.counts[g * nd + d] as f64;
            if c == 0.0 {
                continue;
            }
            let p = c / nz;
            let (i, j) = ((g + 1) as f64, (d + 1) as f64);
            let (i2, j2) = (i * i, j * j);
            f[0] += p / j2;
            f[1] += p * j2;
            f[5] += p * (i - mu_g).powi(2);
            f[6] += p * (j - mu_d).powi(2);
            f[7] -= p * p.log2();
            f[8] += p / i2;
            f[9] += p * i2;
            f[10] += p / (i2 * j2);
            f[11] += p * i2 / j2;
            f[12] += p * j2 / i2;
            f[13] += p * i2 * j2;
        }
    }
    let dn: f64 = by_dep.iter().map(|c| c * c).sum();
    f[2] = by_level.iter().map(|c| c * c).sum::<f64>() / nz;
    f[3] = dn / nz;
    f[4] = dn / (nz * nz);
    f
}
