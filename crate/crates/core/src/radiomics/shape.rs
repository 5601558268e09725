use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen};

use super::NEIGHBORS_26;
use crate::error::{Error, Result};
use crate::volume::{coords, linear_index, voxel_count, voxel_volume_mm3, Mask3D, Spacing};

pub const SHAPE_NAMES: [&str; 14] = [
    "VoxelVolume",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "Sphericity",
    "Compactness1",
    "Compactness2",
    "SphericalDisproportion",
    "Maximum3DDiameter",
    "MajorAxisLength",
    "MinorAxisLength",
    "LeastAxisLength",
    "Elongation",
    "Flatness",
    "ConnectedComponents",
];

const FACE_NEIGHBORS: [[isize; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

#[inline]
pub(crate) fn neighbor(dims: [usize; 3], p: [usize; 3], d: [isize; 3]) -> Option<usize> {
    let mut q = [0usize; 3];
    for a in 0..3 {
        let v = p[a] as isize + d[a];
        if v < 0 || v >= dims[a] as isize {
            return None;
        }
        q[a] = v as usize;
    }
    Some(linear_index(dims, q[0], q[1], q[2]))
}

/// Physical area of all faces separating the ROI from non-ROI voxels or
/// the grid boundary.
pub fn surface_area(mask: &Mask3D, spacing: Spacing) -> f64 {
    let dims = mask.dims();
    let face_area = [
        spacing[1] * spacing[2],
        spacing[1] * spacing[2],
        spacing[0] * spacing[2],
        spacing[0] * spacing[2],
        spacing[0] * spacing[1],
        spacing[0] * spacing[1],
    ];
    let data = mask.data();
    let mut area = 0.0;
    for i in mask.indices() {
        let p = coords(dims, i);
        for (d, a) in FACE_NEIGHBORS.iter().zip(face_area) {
            if !neighbor(dims, p, *d).is_some_and(|j| data[j]) {
                area += a;
            }
        }
    }
    area
}

/// Number of 26-connected components of the ROI.
pub fn connected_components(mask: &Mask3D) -> usize {
    let dims = mask.dims();
    let data = mask.data();
    let mut seen = vec![false; data.len()];
    let mut queue = VecDeque::new();
    let mut components = 0;
    for start in mask.indices() {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let p = coords(dims, i);
            for d in NEIGHBORS_26 {
                if let Some(j) = neighbor(dims, p, d) {
                    if data[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    components
}

fn physical(p: [usize; 3], spacing: Spacing) -> [f64; 3] {
    [
        p[0] as f64 * spacing[0],
        p[1] as f64 * spacing[1],
        p[2] as f64 * spacing[2],
    ]
}

/// Largest distance between two ROI voxel centres. Only voxels with an
/// exposed face are compared since extreme points cannot be interior.
pub fn maximum_3d_diameter(mask: &Mask3D, spacing: Spacing) -> f64 {
    let dims = mask.dims();
    let data = mask.data();
    let surface: Vec<[f64; 3]> = mask
        .indices()
        .map(|i| coords(dims, i))
        .filter(|&p| {
            FACE_NEIGHBORS
                .iter()
                .any(|d| !neighbor(dims, p, *d).is_some_and(|j| data[j]))
        })
        .map(|p| physical(p, spacing))
        .collect();
    let mut best = 0.0f64;
    for (k, a) in surface.iter().enumerate() {
        for b in &surface[k + 1..] {
            let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
            best = best.max(d2);
        }
    }
    best.sqrt()
}

/// Eigenvalues (descending, clamped at 0) of the population covariance of
/// ROI voxel centres in physical coordinates.
pub fn principal_moments(mask: &Mask3D, spacing: Spacing) -> [f64; 3] {
    let dims = mask.dims();
    let pts: Vec<[f64; 3]> = mask.indices().map(|i| physical(coords(dims, i), spacing)).collect();
    let n = pts.len() as f64;
    let mut mean = [0.0; 3];
    for p in &pts {
        for a in 0..3 {
            mean[a] += p[a] / n;
        }
    }
    let mut cov = Matrix3::<f64>::zeros();
    for p in &pts {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for r in 0..3 {
            for c in 0..3 {
                cov[(r, c)] += d[r] * d[c] / n;
            }
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .map(|&e| e.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    [ev[0], ev[1], ev[2]]
}

pub fn shape_features(mask: &Mask3D, spacing: Spacing) -> Result<[f64; 14]> {
    let n = voxel_count(mask);
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    let v = n as f64 * voxel_volume_mm3(spacing);
    let a = surface_area(mask, spacing);
    let sphericity = PI.cbrt() * (6.0 * v).powf(2.0 / 3.0) / a;
    let compactness1 = v / (PI.sqrt() * a.powf(1.5));
    let compactness2 = 36.0 * PI * v * v / a.powi(3);
    let r = (3.0 * v / (4.0 * PI)).cbrt();
    let disproportion = a / (4.0 * PI * r * r);
    let [l1, l2, l3] = principal_moments(mask, spacing);
    // a point-like ROI has no preferred axis
    let (elongation, flatness) = if l1 > 0.0 {
        ((l2 / l1).sqrt(), (l3 / l1).sqrt())
    } else {
        (1.0, 1.0)
    };
    Ok([
        v,
        a,
        a / v,
        sphericity,
        compactness1,
        compactness2,
        disproportion,
        maximum_3d_diameter(mask, spacing),
        4.0 * l1.sqrt(),
        4.0 * l2.sqrt(),
        4.0 * l3.sqrt(),
        elongation,
        flatness,
        connected_components(mask) as f64,
    ])
}
