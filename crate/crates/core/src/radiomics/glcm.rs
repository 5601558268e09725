use nalgebra::DMatrix;

use super::discretize::DiscretizedRoi;
use super::shape::neighbor;
use crate::volume::coords;

pub const GLCM_NAMES: [&str; 24] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
    "MCC",
];

/// Feature values for an ROI without a single in-ROI neighbour pair:
/// the homogeneity-type features take their uniform-region limit (1),
/// everything else is 0.
pub const GLCM_DEGENERATE: [f64; 24] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, //
    0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
];

/// The 13 offsets forming one half of the 26-neighbourhood.
pub fn unique_directions() -> Vec<[isize; 3]> {
    let mut dirs = Vec::with_capacity(13);
    for dz in -1..=1isize {
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                if dz > 0 || (dz == 0 && dy > 0) || (dz == 0 && dy == 0 && dx > 0) {
                    dirs.push([dx, dy, dz]);
                }
            }
        }
    }
    dirs
}

/// Symmetrized co-occurrence counts (`ng × ng`, row-major, level 1 at index 0)
/// summed over `directions` at distance 1.
pub fn glcm_counts(d: &DiscretizedRoi, directions: &[[isize; 3]]) -> Vec<u64> {
    let ng = d.ng();
    let dims = d.dims();
    let levels = d.levels();
    let mut counts = vec![0u64; ng * ng];
    for (i, &a) in levels.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let p = coords(dims, i);
        for dir in directions {
            if let Some(j) = neighbor(dims, p, *dir) {
                let b = levels[j];
                if b > 0 {
                    let (a, b) = (a as usize - 1, b as usize - 1);
                    counts[a * ng + b] += 1;
                    counts[b * ng + a] += 1;
                }
            }
        }
    }
    counts
}

/// Normalized, symmetric co-occurrence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Glcm {
    pub ng: usize,
    /// `ng × ng` probabilities, row-major; all zero when `total == 0`.
    pub p: Vec<f64>,
    /// Sum of the symmetrized counts.
    pub total: u64,
}

impl Glcm {
    pub fn from_counts(ng: usize, counts: &[u64]) -> Glcm {
        let total: u64 = counts.iter().sum();
        let p = if total == 0 {
            vec![0.0; ng * ng]
        } else {
            counts.iter().map(|&c| c as f64 / total as f64).collect()
        };
        Glcm { ng, p, total }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.p[(i - 1) * self.ng + (j - 1)]
    }
}

pub fn glcm_matrix(d: &DiscretizedRoi) -> Glcm {
    Glcm::from_counts(d.ng(), &glcm_counts(d, &unique_directions()))
}

fn entropy(ps: impl IntoIterator<Item = f64>) -> f64 {
    ps.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// Second largest eigenvalue magnitude of `D^-1/2 P D^-1/2` over occupied
/// levels, which equals the square root of the second eigenvalue of
/// `Q = D^-1 P D^-1 P^T` for symmetric `P`.
fn maximal_correlation_coefficient(m: &Glcm, px: &[f64]) -> f64 {
    let occupied: Vec<usize> = (0..m.ng).filter(|&i| px[i] > 0.0).collect();
    let k = occupied.len();
    if k < 2 {
        return 1.0;
    }
    let a = DMatrix::from_fn(k, k, |r, c| {
        let (i, j) = (occupied[r], occupied[c]);
        m.p[i * m.ng + j] / (px[i] * px[j]).sqrt()
    });
    let mut mags: Vec<f64> = a.symmetric_eigenvalues().iter().map(|e| e.abs()).collect();
    mags.sort_by(|x, y| y.total_cmp(x));
    mags[1].clamp(0.0, 1.0)
}

pub fn glcm_features(m: &Glcm) -> [f64; 24] {
    if m.is_empty() {
        return GLCM_DEGENERATE;
    }
    let ng = m.ng;
    let mut px = vec![0.0; ng];
    let mut sum_dist = vec![0.0; 2 * ng + 1];
    let mut diff_dist = vec![0.0; ng];
    for i in 0..ng {
        for j in 0..ng {
            let p = m.p[i * ng + j];
            px[i] += p;
            sum_dist[i + j + 2] += p;
            diff_dist[i.abs_diff(j)] += p;
        }
    }
    // symmetric matrix: the column marginal equals the row marginal
    let mu: f64 = px.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum();
    let var: f64 = px.iter().enumerate().map(|(i, p)| ((i + 1) as f64 - mu).powi(2) * p).sum();
    let hx = entropy(px.iter().copied());

    let mut autocorr = 0.0;
    let (mut prom, mut shade, mut tend) = (0.0, 0.0, 0.0);
    let mut contrast = 0.0;
    let mut energy = 0.0;
    let (mut hxy, mut hxy1, mut hxy2) = (0.0, 0.0, 0.0);
    let (mut idm, mut idmn, mut id, mut idn, mut inv_var) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut max_p = 0.0f64;
    let ngf = ng as f64;
    for i in 0..ng {
        for j in 0..ng {
            let p = m.p[i * ng + j];
            let (fi, fj) = ((i + 1) as f64, (j + 1) as f64);
            let pxy = px[i] * px[j];
            if pxy > 0.0 {
                hxy2 -= pxy * pxy.log2();
            }
            if p == 0.0 {
                continue;
            }
            let s = fi + fj - 2.0 * mu;
            let d = fi - fj;
            autocorr += p * fi * fj;
            prom += s.powi(4) * p;
            shade += s.powi(3) * p;
            tend += s * s * p;
            contrast += d * d * p;
            energy += p * p;
            hxy -= p * p.log2();
            hxy1 -= p * pxy.log2();
            idm += p / (1.0 + d * d);
            idmn += p / (1.0 + d * d / (ngf * ngf));
            id += p / (1.0 + d.abs());
            idn += p / (1.0 + d.abs() / ngf);
            if i != j {
                inv_var += p / (d * d);
            }
            max_p = max_p.max(p);
        }
    }

    let correlation = if var > 0.0 { (autocorr - mu * mu) / var } else { 1.0 };
    let diff_avg: f64 = diff_dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let diff_var: f64 = diff_dist
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 - diff_avg).powi(2) * p)
        .sum();
    let sum_avg: f64 = sum_dist.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let imc1 = if hx > 0.0 { (hxy - hxy1) / hx } else { 0.0 };
    let imc2 = if hxy2 > hxy {
        (1.0 - (-2.0 * (hxy2 - hxy)).exp()).sqrt()
    } else {
        0.0
    };

    [
        autocorr,
        mu,
        prom,
        shade,
        tend,
        contrast,
        correlation,
        diff_avg,
        entropy(diff_dist.iter().copied()),
        diff_var,
        energy,
        hxy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inv_var,
        max_p,
        sum_avg,
        entropy(sum_dist.iter().copied()),
        var,
        maximal_correlation_coefficient(m, &px),
    ]
}
