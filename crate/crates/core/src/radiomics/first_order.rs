use super::discretize::discretize;
use crate::error::{Error, Result};
use crate::volume::{masked_values, Mask3D, Volume3D};

pub const FIRST_ORDER_NAMES: [&str; 18] = [
    "Energy",
    "TotalEnergy",
    "Entropy",
    "Minimum",
    "10Percentile",
    "90Percentile",
    "Maximum",
    "Mean",
    "Median",
    "InterquartileRange",
    "Range",
    "MeanAbsoluteDeviation",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "Skewness",
    "Kurtosis",
    "Variance",
    "Uniformity",
];

/// Linear-interpolation percentile of already sorted values (`q` in 0..=100).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Intensity statistics over the ROI. Entropy and uniformity use an
/// `ng`-bin histogram of the fixed-bin-count discretization.
pub fn first_order_features(vol: &Volume3D, mask: &Mask3D, ng: usize) -> Result<[f64; 18]> {
    let values = masked_values(vol, mask)?;
    if values.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = values.len() as f64;
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);

    let energy: f64 = values.iter().map(|v| v * v).sum();
    let total_energy = energy * vol.voxel_volume_mm3();

    let mut hist = vec![0usize; ng + 1];
    for l in discretize(vol, mask, ng)?.roi_levels() {
        hist[l as usize] += 1;
    }
    let (mut entropy, mut uniformity) = (0.0, 0.0);
    for &c in &hist[1..] {
        if c > 0 {
            let p = c as f64 / n;
            entropy -= p * p.log2();
            uniformity += p * p;
        }
    }

    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let p10 = percentile(&sorted, 10.0);
    let p90 = percentile(&sorted, 90.0);
    let median = percentile(&sorted, 50.0);
    let iqr = percentile(&sorted, 75.0) - percentile(&sorted, 25.0);
    let mean = values.iter().sum::<f64>() / n;

    let (mut m2, mut m3, mut m4, mut mad) = (0.0, 0.0, 0.0, 0.0);
    for v in &values {
        let d = v - mean;
        mad += d.abs();
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    mad /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;

    let robust: Vec<f64> = values.iter().copied().filter(|v| (p10..=p90).contains(v)).collect();
    let robust_mean = robust.iter().sum::<f64>() / robust.len() as f64;
    let rmad = robust.iter().map(|v| (v - robust_mean).abs()).sum::<f64>() / robust.len() as f64;

    let rms = (energy / n).sqrt();
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };

    Ok([
        energy,
        total_energy,
        entropy,
        min,
        p10,
        p90,
        max,
        mean,
        median,
        iqr,
        max - min,
        mad,
        rmad,
        rms,
        skewness,
        kurtosis,
        m2,
        uniformity,
    ])
}
