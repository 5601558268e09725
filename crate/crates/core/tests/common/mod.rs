//! Naive reference implementations and random-input generators shared by
//! the oracle tests and the acceptance harness.
#![allow(dead_code)]

use dce_radiomics::radiomics::DiscretizedRoi;
use dce_radiomics::volume::{DceSeries, Mask3D, Volume3D};
use rand::Rng;

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn random_dims(rng: &mut impl Rng, max: usize) -> [usize; 3] {
    [rng.random_range(1..=max), rng.random_range(1..=max), rng.random_range(1..=max)]
}

/// Random mask with at least one true voxel.
pub fn random_mask(rng: &mut impl Rng, dims: [usize; 3]) -> Mask3D {
    let density: f64 = rng.random_range(0.1..1.0);
    let mut m = Mask3D::from_fn(dims, |_, _, _| rng.random::<f64>() < density).unwrap();
    if m.voxel_count() == 0 {
        let p = [0, 1, 2].map(|a| rng.random_range(0..dims[a]));
        m.set(p[0], p[1], p[2], true);
    }
    m
}

/// Six random phases; about 5% of voxels have a zero (or near-zero) baseline
/// and some phases are exactly flat, so guard paths get exercised.
pub fn random_series(rng: &mut impl Rng, dims: [usize; 3]) -> DceSeries {
    let n = dims.iter().product::<usize>();
    let spacing = [rng.random_range(0.3..2.0), rng.random_range(0.3..2.0), rng.random_range(0.3..3.0)];
    let mut phases: Vec<Vec<f64>> = vec![Vec::with_capacity(n); 6];
    for _ in 0..n {
        let c0 = match rng.random_range(0..20) {
            0 => 0.0,
            1 => 1e-9,
            _ => rng.random_range(1.0..300.0),
        };
        phases[0].push(c0);
        for p in phases.iter_mut().skip(1) {
            let v = match rng.random_range(0..10) {
                0 => c0,
                _ => rng.random_range(0.0..600.0),
            };
            p.push(v);
        }
    }
    let vols = phases
        .into_iter()
        .map(|d| Volume3D::new(dims, spacing, d).unwrap())
        .collect();
    DceSeries::from_vec(vols, 90.0).unwrap()
}

/// Reference kinetic analysis written as a plain loop over (x, y, z).
#[derive(Debug, Clone)]
pub struct NaiveKinetic {
    pub peak: usize,
    /// Per in-mask voxel (x fastest): `Some(rate)` or `None` for zero-signal.
    pub ierm: Vec<Option<f64>>,
    pub derm: Vec<Option<f64>>,
    /// 0 slow / 1 medium / 2 fast
    pub initial: Vec<u8>,
    /// 0 persistent / 1 plateau / 2 washout
    pub delayed: Vec<u8>,
    /// slow, medium, fast, persistent, plateau, washout (%)
    pub ratios: [f64; 6],
    pub features: [f64; 11],
}

pub fn naive_kinetic(series: &DceSeries, mask: &Mask3D, ftv_threshold: f64) -> NaiveKinetic {
    let [nx, ny, nz] = series.dims();
    let c = |k: usize, x: usize, y: usize, z: usize| series.phase(k).get(x, y, z);
    let mut voxels = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if mask.get(x, y, z) {
                    voxels.push((x, y, z));
                }
            }
        }
    }
    let n = voxels.len() as f64;
    let mean = |k: usize| voxels.iter().map(|&(x, y, z)| c(k, x, y, z)).sum::<f64>() / n;
    let peak = if mean(1) >= mean(2) { 1 } else { 2 };
    let max_c0 = voxels.iter().map(|&(x, y, z)| c(0, x, y, z)).fold(f64::MIN, f64::max);
    let eps = 1e-6 * if max_c0 > 1.0 { max_c0 } else { 1.0 };

    let mut out = NaiveKinetic {
        peak,
        ierm: vec![],
        derm: vec![],
        initial: vec![],
        delayed: vec![],
        ratios: [0.0; 6],
        features: [0.0; 11],
    };
    let mut counts = [0usize; 6];
    let (mut pe_sum, mut pe_n, mut pe_max, mut ftv_n) = (0.0, 0usize, f64::MIN, 0usize);
    let (mut ser_sum, mut ser_n, mut ser_max) = (0.0, 0usize, f64::MIN);
    for &(x, y, z) in &voxels {
        let (c0, cp, c5) = (c(0, x, y, z), c(peak, x, y, z), c(5, x, y, z));
        let initial = if c0 <= eps {
            out.ierm.push(None);
            if cp > eps { 2 } else { 0 }
        } else {
            let r = 100.0 * (cp - c0) / c0;
            out.ierm.push(Some(r));
            pe_sum += r;
            pe_n += 1;
            if r > pe_max {
                pe_max = r;
            }
            if r >= ftv_threshold {
                ftv_n += 1;
            }
            if r < 50.0 {
                0
            } else if r <= 100.0 {
                1
            } else {
                2
            }
        };
        let delayed = if cp <= eps {
            out.derm.push(None);
            1
        } else {
            let r = 100.0 * (c5 - cp) / cp;
            out.derm.push(Some(r));
            if r > 10.0 {
                0
            } else if r >= -10.0 {
                1
            } else {
                2
            }
        };
        let late = c5 - c0;
        if late.abs() > eps {
            let s = ((cp - c0) / late).max(0.0);
            ser_sum += s;
            ser_n += 1;
            if s > ser_max {
                ser_max = s;
            }
        }
        counts[initial as usize] += 1;
        counts[3 + delayed as usize] += 1;
        out.initial.push(initial);
        out.delayed.push(delayed);
    }
    for k in 0..6 {
        out.ratios[k] = 100.0 * counts[k] as f64 / n;
    }
    let sp = series.spacing();
    let voxel_volume = sp[0] * sp[1] * sp[2];
    let (avg_ser, peak_ser) = if ser_n == 0 { (0.0, 0.0) } else { (ser_sum / ser_n as f64, ser_max) };
    out.features = [
        out.ratios[0],
        out.ratios[1],
        out.ratios[2],
        out.ratios[3],
        out.ratios[4],
        out.ratios[5],
        if pe_n == 0 { f64::NAN } else { pe_sum / pe_n as f64 },
        if pe_n == 0 { f64::NAN } else { pe_max },
        avg_ser,
        peak_ser,
        ftv_n as f64 * voxel_volume,
    ];
    out
}

pub fn random_roi(rng: &mut impl Rng, max_dim: usize) -> DiscretizedRoi {
    let dims = random_dims(rng, max_dim);
    let ng = rng.random_range(2..=8usize);
    let density: f64 = rng.random_range(0.2..1.0);
    let mut levels: Vec<u16> = (0..dims.iter().product::<usize>())
        .map(|_| if rng.random::<f64>() < density { rng.random_range(1..=ng as u16) } else { 0 })
        .collect();
    if levels.iter().all(|&l| l == 0) {
        levels[0] = 1;
    }
    DiscretizedRoi::from_levels(dims, ng, levels).unwrap()
}

fn xyz(dims: [usize; 3], i: usize) -> [usize; 3] {
    [i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])]
}

fn chebyshev_one(a: [usize; 3], b: [usize; 3]) -> bool {
    let d = (0..3).map(|k| a[k].abs_diff(b[k])).max().unwrap();
    d == 1
}

/// GLCM counts by enumerating every ordered pair of 26-adjacent ROI voxels.
pub fn brute_glcm(d: &DiscretizedRoi) -> Vec<u64> {
    let (dims, lv, ng) = (d.dims(), d.levels(), d.ng());
    let mut m = vec![0u64; ng * ng];
    for a in 0..lv.len() {
        if lv[a] == 0 {
            continue;
        }
        for b in 0..lv.len() {
            if lv[b] > 0 && chebyshev_one(xyz(dims, a), xyz(dims, b)) {
                m[(lv[a] as usize - 1) * ng + lv[b] as usize - 1] += 1;
            }
        }
    }
    m
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// GLSZM counts `[level-1][size-1]` via union-find over all same-level adjacent pairs.
pub fn brute_glszm(d: &DiscretizedRoi) -> Vec<Vec<u64>> {
    let (dims, lv, ng) = (d.dims(), d.levels(), d.ng());
    let mut parent: Vec<usize> = (0..lv.len()).collect();
    for a in 0..lv.len() {
        for b in (a + 1)..lv.len() {
            if lv[a] > 0 && lv[a] == lv[b] && chebyshev_one(xyz(dims, a), xyz(dims, b)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut size = vec![0usize; lv.len()];
    for a in 0..lv.len() {
        if lv[a] > 0 {
            let r = find(&mut parent, a);
            size[r] += 1;
        }
    }
    let max = size.iter().copied().max().unwrap_or(1).max(1);
    let mut m = vec![vec![0u64; max]; ng];
    for a in 0..lv.len() {
        if lv[a] > 0 && find(&mut parent, a) == a {
            m[lv[a] as usize - 1][size[a] - 1] += 1;
        }
    }
    m
}

/// GLDM counts `[level-1][dependence]` by counting qualifying neighbours directly.
pub fn brute_gldm(d: &DiscretizedRoi, alpha: u16) -> Vec<Vec<u64>> {
    let (dims, lv, ng) = (d.dims(), d.levels(), d.ng());
    let mut pairs = Vec::new();
    for a in 0..lv.len() {
        if lv[a] == 0 {
            continue;
        }
        let dep = (0..lv.len())
            .filter(|&b| lv[b] > 0 && chebyshev_one(xyz(dims, a), xyz(dims, b)) && lv[a].abs_diff(lv[b]) <= alpha)
            .count();
        pairs.push((lv[a] as usize, dep));
    }
    let width = pairs.iter().map(|p| p.1).max().unwrap_or(0) + 1;
    let mut m = vec![vec![0u64; width]; ng];
    for (g, dep) in pairs {
        m[g - 1][dep] += 1;
    }
    m
}

fn log2_entropy(ps: impl Iterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for p in ps {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// (name, value) pairs of GLCM features computed straight from the definitions.
pub fn direct_glcm(counts: &[u64], ng: usize) -> Vec<(&'static str, f64)> {
    let total: u64 = counts.iter().sum();
    let p = |i: usize, j: usize| counts[(i - 1) * ng + (j - 1)] as f64 / total as f64;
    let mut px = vec![0.0; ng + 1];
    for i in 1..=ng {
        for j in 1..=ng {
            px[i] += p(i, j);
        }
    }
    let mu: f64 = (1..=ng).map(|i| i as f64 * px[i]).sum();
    let var: f64 = (1..=ng).map(|i| (i as f64 - mu).powi(2) * px[i]).sum();
    let (mut contrast, mut energy, mut idm, mut ij, mut tend, mut maxp) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0f64);
    let mut cells = Vec::new();
    for i in 1..=ng {
        for j in 1..=ng {
            let v = p(i, j);
            let (fi, fj) = (i as f64, j as f64);
            contrast += (fi - fj).powi(2) * v;
            energy += v * v;
            idm += v / (1.0 + (fi - fj).powi(2));
            ij += fi * fj * v;
            tend += (fi + fj - 2.0 * mu).powi(2) * v;
            maxp = maxp.max(v);
            cells.push(v);
        }
    }
    let mut out = vec![
        ("Contrast", contrast),
        ("JointEnergy", energy),
        ("JointEntropy", log2_entropy(cells.into_iter())),
        ("Idm", idm),
        ("Autocorrelation", ij),
        ("JointAverage", mu),
        ("ClusterTendency", tend),
        ("MaximumProbability", maxp),
        ("SumSquares", var),
        ("SumAverage", 2.0 * mu),
    ];
    if var > 0.0 {
        out.push(("Correlation", (ij - mu * mu) / var));
    }
    out
}

pub fn direct_glszm(m: &[Vec<u64>], n_voxels: usize) -> Vec<(&'static str, f64)> {
    let nz: f64 = m.iter().flatten().sum::<u64>() as f64;
    let (mut sae, mut lae, mut cells) = (0.0, 0.0, Vec::new());
    let mut by_level = vec![0.0; m.len()];
    for (g, row) in m.iter().enumerate() {
        for (s, &c) in row.iter().enumerate() {
            let size = (s + 1) as f64;
            sae += c as f64 / (size * size);
            lae += c as f64 * size * size;
            by_level[g] += c as f64;
            cells.push(c as f64 / nz);
        }
    }
    vec![
        ("SmallAreaEmphasis", sae / nz),
        ("LargeAreaEmphasis", lae / nz),
        ("GrayLevelNonUniformity", by_level.iter().map(|v| v * v).sum::<f64>() / nz),
        ("ZonePercentage", nz / n_voxels as f64),
        ("ZoneEntropy", log2_entropy(cells.into_iter())),
    ]
}

pub fn direct_gldm(m: &[Vec<u64>]) -> Vec<(&'static str, f64)> {
    let nz: f64 = m.iter().flatten().sum::<u64>() as f64;
    let (mut sde, mut lde, mut cells) = (0.0, 0.0, Vec::new());
    let mut by_level = vec![0.0; m.len()];
    for (g, row) in m.iter().enumerate() {
        for (d, &c) in row.iter().enumerate() {
            let j = (d + 1) as f64;
            sde += c as f64 / (j * j);
            lde += c as f64 * j * j;
            by_level[g] += c as f64;
            cells.push(c as f64 / nz);
        }
    }
    vec![
        ("SmallDependenceEmphasis", sde / nz),
        ("LargeDependenceEmphasis", lde / nz),
        ("GrayLevelNonUniformity", by_level.iter().map(|v| v * v).sum::<f64>() / nz),
        ("DependenceEntropy", log2_entropy(cells.into_iter())),
    ]
}

pub fn random_volume(rng: &mut impl Rng, dims: [usize; 3], spacing: [f64; 3]) -> Volume3D {
    Volume3D::from_fn(dims, spacing, |_, _, _| rng.random_range(-100.0..100.0)).unwrap()
}

/// Half-sample mirror: -1 -> 0, n -> n - 1.
pub fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

fn at(v: &Volume3D, x: isize, y: isize, z: isize) -> f64 {
    let d = v.dims();
    v.get(mirror(x, d[0]), mirror(y, d[1]), mirror(z, d[2]))
}

/// One Haar band evaluated voxel by voxel as a 2×2×2 weighted sum.
pub fn naive_wavelet(v: &Volume3D, high: [bool; 3]) -> Vec<f64> {
    let [nx, ny, nz] = v.dims();
    let w = |h: bool, k: usize| if h && k == 1 { -0.5 } else { 0.5 };
    let mut out = Vec::with_capacity(nx * ny * nz);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let mut acc = 0.0;
                for c in 0..2 {
                    for b in 0..2 {
                        for a in 0..2 {
                            acc += w(high[0], a) * w(high[1], b) * w(high[2], c)
                                * at(v, (x + a) as isize, (y + b) as isize, (z + c) as isize);
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    out
}

/// Full 3-D Gaussian kernel sum followed by the 6-neighbour Laplacian.
pub fn naive_log(v: &Volume3D, sigma: f64) -> Vec<f64> {
    let dims = v.dims();
    let sp = v.spacing();
    let kernel: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let r = (3.0 * sigma / sp[a]).ceil() as isize;
            let w: Vec<f64> = (-r..=r).map(|k| (-(k as f64 * sp[a]).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let r: Vec<isize> = kernel.iter().map(|k| (k.len() as isize - 1) / 2).collect();
    let smooth = Volume3D::from_fn(dims, sp, |x, y, z| {
        let mut acc = 0.0;
        for (k, wz) in kernel[2].iter().enumerate() {
            for (j, wy) in kernel[1].iter().enumerate() {
                for (i, wx) in kernel[0].iter().enumerate() {
                    acc += wx * wy * wz
                        * at(
                            v,
                            x as isize + i as isize - r[0],
                            y as isize + j as isize - r[1],
                            z as isize + k as isize - r[2],
                        );
                }
            }
        }
        acc
    })
    .unwrap();
    let mut out = Vec::new();
    for z in 0..dims[2] as isize {
        for y in 0..dims[1] as isize {
            for x in 0..dims[0] as isize {
                let c = at(&smooth, x, y, z);
                let lap = (at(&smooth, x + 1, y, z) - 2.0 * c + at(&smooth, x - 1, y, z)) / (sp[0] * sp[0])
                    + (at(&smooth, x, y + 1, z) - 2.0 * c + at(&smooth, x, y - 1, z)) / (sp[1] * sp[1])
                    + (at(&smooth, x, y, z + 1) - 2.0 * c + at(&smooth, x, y, z - 1)) / (sp[2] * sp[2]);
                out.push(lap);
            }
        }
    }
    out
}

/// Fraction of (malignant, benign) pairs ranked correctly, ties counted half.
pub fn pairwise_auc(labels: &[u8], scores: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &li) in labels.iter().enumerate() {
        for (j, &lj) in labels.iter().enumerate() {
            if li == 1 && lj == 0 {
                den += 1.0;
                if scores[i] > scores[j] {
                    num += 1.0;
                } else if scores[i] == scores[j] {
                    num += 0.5;
                }
            }
        }
    }
    num / den
}
