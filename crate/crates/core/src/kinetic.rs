//! Voxel-wise kinetic-curve analysis of a six-phase DCE series.
//!
//! The initial enhancement rate map compares the peak phase against the
//! pre-contrast phase, the delayed map compares the last phase against the
//! peak. Each tumor voxel is then typed (slow/medium/fast inflow,
//! persistent/plateau/washout outflow) and the per-type ratios, together
//! with PE, SER and FTV aggregates, form the 11 dynamic features.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{voxel_count, DceSeries, Dims, LesionRoi, Mask3D, Volume3D};

pub const SLOW_MEDIUM_BOUNDARY: f64 = 50.0;
pub const MEDIUM_FAST_BOUNDARY: f64 = 100.0;
pub const PLATEAU_HALF_WIDTH: f64 = 10.0;
pub const DEFAULT_FTV_THRESHOLD_PCT: f64 = 70.0;

/// Relative size of the zero-signal guard, scaled by the in-mask C0 maximum.
const EPSILON_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateMapKind {
    Initial,
    Delayed,
}

/// One voxel of a rate map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateSample {
    /// Percent enhancement.
    Value(f64),
    /// The denominator phase was at or below the zero-signal guard.
    /// `enhanced` records whether the numerator phase rose above it.
    ZeroSignal { enhanced: bool },
}

impl RateSample {
    pub fn value(self) -> Option<f64> {
        match self {
            RateSample::Value(v) => Some(v),
            RateSample::ZeroSignal { .. } => None,
        }
    }
}

/// Percent-enhancement map restricted to the tumor voxels.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMap {
    dims: Dims,
    kind: RateMapKind,
    indices: Vec<usize>,
    samples: Vec<RateSample>,
}

impl RateMap {
    /// Builds a map directly from per-voxel samples (linear indices in row-major order).
    pub fn from_samples(
        kind: RateMapKind,
        dims: Dims,
        indices: Vec<usize>,
        samples: Vec<RateSample>,
    ) -> Result<Self> {
        if indices.len() != samples.len() {
            return Err(Error::LengthMismatch {
                left: indices.len(),
                right: samples.len(),
            });
        }
        if samples
            .iter()
            .any(|s| matches!(s, RateSample::Value(v) if !v.is_finite()))
        {
            return Err(Error::InvalidVolume("non-finite rate value".into()));
        }
        Ok(Self {
            dims,
            kind,
            indices,
            samples,
        })
    }

    /// Convenience constructor for a map of plain values over a 1-row grid.
    pub fn from_values(kind: RateMapKind, values: &[f64]) -> Result<Self> {
        Self::from_samples(
            kind,
            [values.len().max(1), 1, 1],
            (0..values.len()).collect(),
            values.iter().map(|&v| RateSample::Value(v)).collect(),
        )
    }

    pub fn kind(&self) -> RateMapKind {
        self.kind
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn samples(&self) -> &[RateSample] {
        &self.samples
    }

    /// Values at voxels where the rate is defined.
    pub fn defined_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().filter_map(|s| s.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialType {
    Slow,
    Medium,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelayedType {
    Persistent,
    Plateau,
    Washout,
}

/// A three-way enhancement type, indexable into a ratio triple.
pub trait EnhancementType: Copy {
    fn slot(self) -> usize;
}

impl EnhancementType for InitialType {
    fn slot(self) -> usize {
        match self {
            InitialType::Slow => 0,
            InitialType::Medium => 1,
            InitialType::Fast => 2,
        }
    }
}

impl EnhancementType for DelayedType {
    fn slot(self) -> usize {
        match self {
            DelayedType::Persistent => 0,
            DelayedType::Plateau => 1,
            DelayedType::Washout => 2,
        }
    }
}

pub fn classify_initial_value(ierm: f64) -> InitialType {
    if ierm < SLOW_MEDIUM_BOUNDARY {
        InitialType::Slow
    } else if ierm <= MEDIUM_FAST_BOUNDARY {
        InitialType::Medium
    } else {
        InitialType::Fast
    }
}

pub fn classify_delayed_value(derm: f64) -> DelayedType {
    if derm > PLATEAU_HALF_WIDTH {
        DelayedType::Persistent
    } else if derm >= -PLATEAU_HALF_WIDTH {
        DelayedType::Plateau
    } else {
        DelayedType::Washout
    }
}

fn masked_mean(vol: &Volume3D, mask: &Mask3D) -> f64 {
    let (sum, n) = mask
        .indices()
        .fold((0.0, 0usize), |(s, n), i| (s + vol.data()[i], n + 1));
    sum / n as f64
}

fn check_inputs(series: &DceSeries, mask: &Mask3D) -> Result<()> {
    mask.ensure_matches(series.dims())?;
    if voxel_count(mask) == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

/// Picks C1 or C2 as the peak phase by comparing their mean intensity
/// inside the mask. Ties go to C1.
pub fn select_peak_phase(series: &DceSeries, mask: &Mask3D) -> Result<usize> {
    check_inputs(series, mask)?;
    let m1 = masked_mean(series.phase(1), mask);
    let m2 = masked_mean(series.phase(2), mask);
    Ok(if m1 >= m2 { 1 } else { 2 })
}

/// Zero-signal guard: `1e-6 * max(max C0 over mask, 1.0)`.
pub fn zero_signal_epsilon(series: &DceSeries, mask: &Mask3D) -> Result<f64> {
    check_inputs(series, mask)?;
    let c0 = series.phase(0).data();
    let max_c0 = mask.indices().map(|i| c0[i]).fold(f64::NEG_INFINITY, f64::max);
    Ok(EPSILON_SCALE * max_c0.max(1.0))
}

fn check_peak(peak: usize) -> Result<()> {
    if peak == 1 || peak == 2 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("peak phase must be 1 or 2, got {peak}")))
    }
}

fn rate_map(
    series: &DceSeries,
    mask: &Mask3D,
    kind: RateMapKind,
    denominator: usize,
    numerator: usize,
) -> Result<RateMap> {
    let eps = zero_signal_epsilon(series, mask)?;
    let den = series.phase(denominator).data();
    let num = series.phase(numerator).data();
    let indices: Vec<usize> = mask.indices().collect();
    let samples = indices
        .iter()
        .map(|&i| {
            let (d, n) = (den[i], num[i]);
            if d <= eps {
                RateSample::ZeroSignal { enhanced: n > eps }
            } else {
                RateSample::Value(100.0 * (n - d) / d)
            }
        })
        .collect();
    RateMap::from_samples(kind, series.dims(), indices, samples)
}

/// IERM = 100 · (C_peak − C0) / C0 per tumor voxel.
pub fn compute_ierm(series: &DceSeries, mask: &Mask3D, peak: usize) -> Result<RateMap> {
    check_peak(peak)?;
    rate_map(series, mask, RateMapKind::Initial, 0, peak)
}

/// DERM = 100 · (C5 − C_peak) / C_peak per tumor voxel.
pub fn compute_derm(series: &DceSeries, mask: &Mask3D, peak: usize) -> Result<RateMap> {
    check_peak(peak)?;
    rate_map(series, mask, RateMapKind::Delayed, peak, 5)
}

pub fn classify_initial(ierm: &RateMap) -> Result<Vec<InitialType>> {
    if ierm.kind != RateMapKind::Initial {
        return Err(Error::WrongMapKind {
            expected: RateMapKind::Initial,
            found: ierm.kind,
        });
    }
    Ok(ierm
        .samples
        .iter()
        .map(|s| match *s {
            RateSample::Value(v) => classify_initial_value(v),
            RateSample::ZeroSignal { enhanced: true } => InitialType::Fast,
            RateSample::ZeroSignal { enhanced: false } => InitialType::Slow,
        })
        .collect())
}

pub fn classify_delayed(derm: &RateMap) -> Result<Vec<DelayedType>> {
    if derm.kind != RateMapKind::Delayed {
        return Err(Error::WrongMapKind {
            expected: RateMapKind::Delayed,
            found: derm.kind,
        });
    }
    Ok(derm
        .samples
        .iter()
        .map(|s| match *s {
            RateSample::Value(v) => classify_delayed_value(v),
            RateSample::ZeroSignal { .. } => DelayedType::Plateau,
        })
        .collect())
}

/// Percentage of tumor voxels in each of the three types.
///
/// `labels` must hold one entry per true voxel of `mask`.
pub fn type_ratios<T: EnhancementType>(labels: &[T], mask: &Mask3D) -> Result<[f64; 3]> {
    let total = voxel_count(mask);
    if total == 0 {
        return Err(Error::EmptyMask);
    }
    if labels.len() != total {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: total,
        });
    }
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.slot()] += 1;
    }
    Ok(counts.map(|c| 100.0 * c as f64 / total as f64))
}

/// (peak PE, average PE) over voxels with a defined IERM.
pub fn pe_aggregates(ierm: &RateMap) -> Result<(f64, f64)> {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut peak = f64::NEG_INFINITY;
    for v in ierm.defined_values() {
        n += 1;
        sum += v;
        peak = peak.max(v);
    }
    if n == 0 {
        return Err(Error::EmptyMap);
    }
    Ok((peak, sum / n as f64))
}

/// Signal enhancement ratio per tumor voxel; `None` where |C5 − C0| is
/// within the zero-signal guard.
#[derive(Debug, Clone, PartialEq)]
pub struct SerMap {
    pub indices: Vec<usize>,
    pub values: Vec<Option<f64>>,
}

/// SER = (C_peak − C0) / (C5 − C0), negatives clamped to 0.
pub fn ser_map(series: &DceSeries, mask: &Mask3D, peak: usize) -> Result<SerMap> {
    check_peak(peak)?;
    let eps = zero_signal_epsilon(series, mask)?;
    let c0 = series.phase(0).data();
    let cp = series.phase(peak).data();
    let c5 = series.phase(5).data();
    let indices: Vec<usize> = mask.indices().collect();
    let values = indices
        .iter()
        .map(|&i| {
            let late = c5[i] - c0[i];
            if late.abs() <= eps {
                None
            } else {
                Some(((cp[i] - c0[i]) / late).max(0.0))
            }
        })
        .collect();
    Ok(SerMap { indices, values })
}

/// (peak SER, average SER); both 0 when no voxel is defined.
pub fn ser_aggregates(ser: &SerMap) -> (f64, f64) {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut peak = f64::NEG_INFINITY;
    for v in ser.values.iter().flatten() {
        n += 1;
        sum += v;
        peak = peak.max(*v);
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (peak, sum / n as f64)
    }
}

/// Physical volume of defined voxels whose IERM reaches `pe_threshold_pct`.
pub fn functional_tumor_volume(ierm: &RateMap, vol_mm3_per_voxel: f64, pe_threshold_pct: f64) -> f64 {
    let n = ierm.defined_values().filter(|&v| v >= pe_threshold_pct).count();
    n as f64 * vol_mm3_per_voxel
}

/// The 11 dynamic features of one lesion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicFeatures {
    pub slow_ratio: f64,
    pub medium_ratio: f64,
    pub fast_ratio: f64,
    pub persistent_ratio: f64,
    pub plateau_ratio: f64,
    pub washout_ratio: f64,
    pub average_pe: f64,
    pub peak_pe: f64,
    pub average_ser: f64,
    pub peak_ser: f64,
    pub ftv_mm3: f64,
}

/// Canonical column names, in output order.
pub const DYNAMIC_FEATURE_NAMES: [&str; 11] = [
    "dynamic_slow_ratio",
    "dynamic_medium_ratio",
    "dynamic_fast_ratio",
    "dynamic_persistent_ratio",
    "dynamic_plateau_ratio",
    "dynamic_washout_ratio",
    "dynamic_average_pe",
    "dynamic_peak_pe",
    "dynamic_average_ser",
    "dynamic_peak_ser",
    "dynamic_ftv",
];

impl DynamicFeatures {
    pub fn to_array(&self) -> [f64; 11] {
        [
            self.slow_ratio,
            self.medium_ratio,
            self.fast_ratio,
            self.persistent_ratio,
            self.plateau_ratio,
            self.washout_ratio,
            self.average_pe,
            self.peak_pe,
            self.average_ser,
            self.peak_ser,
            self.ftv_mm3,
        ]
    }

    pub fn named(&self) -> impl Iterator<Item = (&'static str, f64)> {
        DYNAMIC_FEATURE_NAMES.into_iter().zip(self.to_array())
    }
}

pub fn extract_dynamic_features(
    series: &DceSeries,
    roi: &LesionRoi,
    ftv_threshold_pct: f64,
) -> Result<DynamicFeatures> {
    let mask = &roi.mask;
    let peak = select_peak_phase(series, mask)?;
    let ierm = compute_ierm(series, mask, peak)?;
    let derm = compute_derm(series, mask, peak)?;

    let [slow, medium, fast] = type_ratios(&classify_initial(&ierm)?, mask)?;
    let [persistent, plateau, washout] = type_ratios(&classify_delayed(&derm)?, mask)?;
    let (peak_pe, average_pe) = pe_aggregates(&ierm)?;
    let (peak_ser, average_ser) = ser_aggregates(&ser_map(series, mask, peak)?);
    let ftv = functional_tumor_volume(&ierm, series.phase(0).voxel_volume_mm3(), ftv_threshold_pct);

    Ok(DynamicFeatures {
        slow_ratio: slow,
        medium_ratio: medium,
        fast_ratio: fast,
        persistent_ratio: persistent,
        plateau_ratio: plateau,
        washout_ratio: washout,
        average_pe,
        peak_pe,
        average_ser,
        peak_ser,
        ftv_mm3: ftv,
    })
}
