//! Derived images: one-level undecimated Haar wavelet bands and
//! Laplacian-of-Gaussian responses. All passes are separable, use
//! symmetric (half-sample mirror) boundary extension and keep input dims.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Volume3D};

pub const DEFAULT_LOG_SIGMAS_MM: [f64; 2] = [1.0, 3.0];

/// Low/high pass choice along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveletBand {
    pub high: [bool; 3],
}

impl WaveletBand {
    /// The eight bands in catalog order.
    pub const ALL: [WaveletBand; 8] = [
        WaveletBand::new(false, false, false),
        WaveletBand::new(false, false, true),
        WaveletBand::new(false, true, false),
        WaveletBand::new(true, false, false),
        WaveletBand::new(false, true, true),
        WaveletBand::new(true, false, true),
        WaveletBand::new(true, true, false),
        WaveletBand::new(true, true, true),
    ];

    pub const fn new(x_high: bool, y_high: bool, z_high: bool) -> Self {
        Self {
            high: [x_high, y_high, z_high],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let b = s.as_bytes();
        if b.len() != 3 {
            return None;
        }
        let mut high = [false; 3];
        for (h, c) in high.iter_mut().zip(b) {
            *h = match c {
                b'L' => false,
                b'H' => true,
                _ => return None,
            };
        }
        Some(Self { high })
    }
}

impl fmt::Display for WaveletBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in self.high {
            f.write_str(if h { "H" } else { "L" })?;
        }
        Ok(())
    }
}

/// Identifies the image a radiomic feature was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivedImageId {
    Original,
    Wavelet(WaveletBand),
    Log { sigma_mm: f64 },
}

impl DerivedImageId {
    /// Name used as the first component of feature names,
    /// e.g. `original`, `wavelet-LHH`, `log-sigma-1-0-mm`.
    pub fn name(&self) -> String {
        match self {
            DerivedImageId::Original => "original".to_string(),
            DerivedImageId::Wavelet(b) => format!("wavelet-{b}"),
            DerivedImageId::Log { sigma_mm } => {
                let s = if sigma_mm.fract() == 0.0 {
                    format!("{sigma_mm:.1}")
                } else {
                    format!("{sigma_mm}")
                };
                format!("log-sigma-{}-mm", s.replace('.', "-"))
            }
        }
    }

    /// Voxels beyond the mask each axis needs so that filtering a crop
    /// reproduces filtering the whole volume inside the mask.
    pub fn reach(&self, spacing: [f64; 3]) -> [usize; 3] {
        match self {
            DerivedImageId::Original => [0; 3],
            DerivedImageId::Wavelet(_) => [1; 3],
            DerivedImageId::Log { sigma_mm } => {
                spacing.map(|s| gaussian_radius(*sigma_mm, s) + 1)
            }
        }
    }
}

/// original + 8 wavelet bands + one LoG image per sigma.
pub fn default_catalog(log_sigmas_mm: &[f64]) -> Vec<DerivedImageId> {
    let mut ids = vec![DerivedImageId::Original];
    ids.extend(WaveletBand::ALL.iter().map(|&b| DerivedImageId::Wavelet(b)));
    ids.extend(
        log_sigmas_mm
            .iter()
            .map(|&sigma_mm| DerivedImageId::Log { sigma_mm }),
    );
    ids
}

/// Half-sample symmetric reflection of `i` into `0..n`.
#[inline]
pub(crate) fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let r = i.rem_euclid(period);
    (if r < n { r } else { period - 1 - r }) as usize
}

/// Correlates every line along `axis` with `taps` (offset, weight).
fn correlate_axis(data: &[f64], dims: Dims, axis: usize, taps: &[(isize, f64)]) -> Vec<f64> {
    let n = dims[axis];
    let stride = match axis {
        0 => 1,
        1 => dims[0],
        _ => dims[0] * dims[1],
    };
    let lo = taps.iter().map(|t| t.0).min().unwrap_or(0).min(0);
    let hi = taps.iter().map(|t| t.0).max().unwrap_or(0).max(0);
    let mut line = vec![0.0; n + (hi - lo) as usize];
    let mut out = vec![0.0; data.len()];

    let (outer_a, outer_b) = match axis {
        0 => (dims[1], dims[2]),
        1 => (dims[0], dims[2]),
        _ => (dims[0], dims[1]),
    };
    for b in 0..outer_b {
        for a in 0..outer_a {
            let base = match axis {
                0 => dims[0] * (a + dims[1] * b),
                1 => a + dims[0] * dims[1] * b,
                _ => a + dims[0] * b,
            };
            for (j, slot) in line.iter_mut().enumerate() {
                let src = reflect(j as isize + lo, n);
                *slot = data[base + src * stride];
            }
            for i in 0..n {
                let mut acc = 0.0;
                for &(off, w) in taps {
                    acc += w * line[(i as isize + off - lo) as usize];
                }
                out[base + i * stride] = acc;
            }
        }
    }
    out
}

const HAAR_LOW: [(isize, f64); 2] = [(0, 0.5), (1, 0.5)];
const HAAR_HIGH: [(isize, f64); 2] = [(0, 0.5), (1, -0.5)];

fn check_wavelet_dims(dims: Dims) -> Result<()> {
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::VolumeTooSmall(dims));
    }
    Ok(())
}

/// A single undecimated Haar band.
pub fn wavelet_band(vol: &Volume3D, band: WaveletBand) -> Result<Volume3D> {
    let dims = vol.dims();
    check_wavelet_dims(dims)?;
    let mut data = vol.data().to_vec();
    for axis in 0..3 {
        let taps = if band.high[axis] { &HAAR_HIGH } else { &HAAR_LOW };
        data = correlate_axis(&data, dims, axis, taps);
    }
    Ok(Volume3D::from_parts_unchecked(dims, vol.spacing(), data))
}

/// All eight bands in [`WaveletBand::ALL`] order, sharing intermediate passes.
pub fn wavelet_bands(vol: &Volume3D) -> Result<Vec<(WaveletBand, Volume3D)>> {
    let dims = vol.dims();
    check_wavelet_dims(dims)?;
    let pass = |d: &[f64], axis: usize, high: bool| {
        correlate_axis(d, dims, axis, if high { &HAAR_HIGH } else { &HAAR_LOW })
    };
    let mut by_band = Vec::with_capacity(8);
    for hx in [false, true] {
        let dx = pass(vol.data(), 0, hx);
        for hy in [false, true] {
            let dxy = pass(&dx, 1, hy);
            for hz in [false, true] {
                let d = pass(&dxy, 2, hz);
                by_band.push((
                    WaveletBand::new(hx, hy, hz),
                    Volume3D::from_parts_unchecked(dims, vol.spacing(), d),
                ));
            }
        }
    }
    Ok(WaveletBand::ALL
        .iter()
        .map(|b| {
            let i = by_band.iter().position(|(bb, _)| bb == b).expect("all bands built");
            (*b, by_band[i].1.clone())
        })
        .collect())
}

pub(crate) fn gaussian_radius(sigma_mm: f64, spacing: f64) -> usize {
    (3.0 * sigma_mm / spacing).ceil() as usize
}

/// Truncated Gaussian taps with physical sigma, normalized to unit sum.
pub fn gaussian_taps(sigma_mm: f64, spacing: f64) -> Vec<(isize, f64)> {
    let r = gaussian_radius(sigma_mm, spacing) as isize;
    let mut taps: Vec<(isize, f64)> = (-r..=r)
        .map(|k| {
            let d = k as f64 * spacing;
            (k, (-d * d / (2.0 * sigma_mm * sigma_mm)).exp())
        })
        .collect();
    let sum: f64 = taps.iter().map(|t| t.1).sum();
    for t in &mut taps {
        t.1 /= sum;
    }
    taps
}

/// Gaussian smoothing at `sigma_mm` followed by the 6-neighbour discrete Laplacian.
pub fn log_filter(vol: &Volume3D, sigma_mm: f64) -> Result<Volume3D> {
    if !(sigma_mm.is_finite() && sigma_mm > 0.0) {
        return Err(Error::NonPositiveSigma(sigma_mm));
    }
    let dims = vol.dims();
    let spacing = vol.spacing();
    let mut smooth = vol.data().to_vec();
    for axis in 0..3 {
        smooth = correlate_axis(&smooth, dims, axis, &gaussian_taps(sigma_mm, spacing[axis]));
    }
    let mut out = vec![0.0; smooth.len()];
    for axis in 0..3 {
        let h2 = spacing[axis] * spacing[axis];
        let taps = [(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)];
        let second = correlate_axis(&smooth, dims, axis, &taps);
        for (o, s) in out.iter_mut().zip(second) {
            *o += s;
        }
    }
    Ok(Volume3D::from_parts_unchecked(dims, spacing, out))
}

pub fn derive(vol: &Volume3D, id: &DerivedImageId) -> Result<Volume3D> {
    match id {
        DerivedImageId::Original => Ok(vol.clone()),
        DerivedImageId::Wavelet(b) => wavelet_band(vol, *b),
        DerivedImageId::Log { sigma_mm } => log_filter(vol, *sigma_mm),
    }
}
