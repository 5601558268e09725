//! Synthetic six-phase DCE series with ellipsoidal lesions.
//!
//! Each lesion voxel follows one of nine kinetic curves (inflow × outflow
//! type) drawn from a per-class mixture. A `heterogeneity` fraction of voxels
//! is drawn from the other class's mixture instead. Background voxels stay at
//! the baseline; every voxel of every phase then receives Gaussian noise.
//! Intensities are rounded to single precision so that a corpus written as
//! `f32` raw files reloads to exactly the in-memory values.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{write_manifest, write_raw, ManifestRecord, RawDtype};
use crate::kinetic::{DelayedType, InitialType};
use crate::volume::{linear_index, DceSeries, Dims, Label, LesionRoi, Mask3D, Spacing, Volume3D, DEFAULT_PHASE_INTERVAL_S, PHASE_COUNT};

pub const INFLOW_TYPES: [InitialType; 3] = [InitialType::Slow, InitialType::Medium, InitialType::Fast];
pub const OUTFLOW_TYPES: [DelayedType; 3] = [DelayedType::Persistent, DelayedType::Plateau, DelayedType::Washout];
pub const MANIFEST_NAME: &str = "manifest.tsv";

/// Target peak-vs-baseline enhancement (%) for an inflow type.
pub fn inflow_target_pct(t: InitialType) -> f64 {
    match t {
        InitialType::Slow => 30.0,
        InitialType::Medium => 75.0,
        InitialType::Fast => 150.0,
    }
}

/// Target late-vs-peak change (%) for an outflow type.
pub fn outflow_target_pct(t: DelayedType) -> f64 {
    match t {
        DelayedType::Persistent => 25.0,
        DelayedType::Plateau => 0.0,
        DelayedType::Washout => -25.0,
    }
}

/// Noise-free intensities C0..C5: peak at phase 1, linear from C1 to C5.
pub fn kinetic_curve(inflow: InitialType, outflow: DelayedType, baseline: f64) -> [f64; PHASE_COUNT] {
    let c1 = baseline * (1.0 + inflow_target_pct(inflow) / 100.0);
    let c5 = c1 * (1.0 + outflow_target_pct(outflow) / 100.0);
    let mut out = [0.0; PHASE_COUNT];
    out[0] = baseline;
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o = c1 + (c5 - c1) * (k - 1) as f64 / 4.0;
    }
    out
}

/// Joint probabilities over (inflow, outflow), indexed `[inflow][outflow]`
/// in the orders of [`INFLOW_TYPES`] and [`OUTFLOW_TYPES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticMixture {
    pub weights: [[f64; 3]; 3],
}

impl KineticMixture {
    pub fn product(inflow: [f64; 3], outflow: [f64; 3]) -> Self {
        Self {
            weights: std::array::from_fn(|i| std::array::from_fn(|o| inflow[i] * outflow[o])),
        }
    }

    /// All mass on one curve.
    pub fn pure(inflow: InitialType, outflow: DelayedType) -> Self {
        let mut weights = [[0.0; 3]; 3];
        let i = INFLOW_TYPES.iter().position(|t| *t == inflow).unwrap();
        let o = OUTFLOW_TYPES.iter().position(|t| *t == outflow).unwrap();
        weights[i][o] = 1.0;
        Self { weights }
    }

    pub fn default_benign() -> Self {
        Self::product([0.5, 0.35, 0.15], [0.7, 0.2, 0.1])
    }

    pub fn default_malignant() -> Self {
        Self::product([0.1, 0.3, 0.6], [0.1, 0.25, 0.65])
    }

    fn flat(&self) -> [f64; 9] {
        std::array::from_fn(|k| self.weights[k / 3][k % 3])
    }

    fn validate(&self, which: &str) -> Result<()> {
        let w = self.flat();
        if w.iter().any(|p| !p.is_finite() || *p < 0.0) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "{which} mixture weights must be non-negative and sum to 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub dims: Dims,
    pub spacing: Spacing,
    pub semi_axes_mm: [f64; 3],
    pub baseline: f64,
    pub noise_std: f64,
    pub benign: KineticMixture,
    pub malignant: KineticMixture,
    /// Fraction of lesion voxels drawn from the other class's mixture.
    pub heterogeneity: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            dims: [64, 64, 64],
            spacing: [0.93, 0.93, 0.5],
            semi_axes_mm: [8.0, 8.0, 6.0],
            baseline: 100.0,
            noise_std: 5.0,
            benign: KineticMixture::default_benign(),
            malignant: KineticMixture::default_malignant(),
            heterogeneity: 0.2,
            seed: 0,
        }
    }
}

/// Voxels kept between the lesion ellipsoid and the grid border.
const MARGIN_VOXELS: f64 = 2.0;

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.dims.iter().any(|&d| d < 2) {
            return bad(format!("dims {:?} must be >= 2 on every axis", self.dims));
        }
        if self.spacing.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return bad(format!("spacing {:?} must be positive", self.spacing));
        }
        if self.semi_axes_mm.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return bad(format!("semi-axes {:?} must be positive", self.semi_axes_mm));
        }
        if !self.baseline.is_finite() || self.baseline <= 0.0 {
            return bad(format!("baseline {} must be positive", self.baseline));
        }
        if !self.noise_std.is_finite() || self.noise_std < 0.0 {
            return bad(format!("noise std {} must be >= 0", self.noise_std));
        }
        if !(0.0..=1.0).contains(&self.heterogeneity) {
            return bad(format!("heterogeneity {} must lie in [0, 1]", self.heterogeneity));
        }
        self.benign.validate("benign")?;
        self.malignant.validate("malignant")?;
        for a in 0..3 {
            let extent = (self.dims[a] - 1) as f64 * self.spacing[a];
            let need = 2.0 * (self.semi_axes_mm[a] + MARGIN_VOXELS * self.spacing[a]);
            if need > extent {
                return Err(Error::LesionDoesNotFit(format!(
                    "axis {a}: ellipsoid plus margin spans {need:.3} mm, grid spans {extent:.3} mm"
                )));
            }
        }
        Ok(())
    }

    fn mixture(&self, label: Label) -> &KineticMixture {
        match label {
            Label::Benign => &self.benign,
            Label::Malignant => &self.malignant,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PhantomCase {
    pub series: DceSeries,
    pub roi: LesionRoi,
    /// Generating curve of each lesion voxel, in mask index order.
    pub voxel_types: Vec<(InitialType, DelayedType)>,
    /// Whether each lesion voxel was drawn from the other class's mixture.
    pub off_class: Vec<bool>,
}

fn case_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One lesion; deterministic in `(spec.seed, index)`.
pub fn generate_case(
    spec: &PhantomSpec,
    label: Label,
    index: u64,
    patient_id: impl Into<String>,
    lesion_id: impl Into<String>,
) -> Result<PhantomCase> {
    spec.validate()?;
    let mut rng = case_rng(spec.seed, index);
    let [nx, ny, nz] = spec.dims;

    let center: [f64; 3] = std::array::from_fn(|a| {
        let lo = spec.semi_axes_mm[a] + MARGIN_VOXELS * spec.spacing[a];
        let hi = (spec.dims[a] - 1) as f64 * spec.spacing[a] - lo;
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    });
    let mask = Mask3D::from_fn(spec.dims, |x, y, z| {
        let p = [x, y, z];
        (0..3)
            .map(|a| ((p[a] as f64 * spec.spacing[a] - center[a]) / spec.semi_axes_mm[a]).powi(2))
            .sum::<f64>()
            <= 1.0
    })?;

    let own = WeightedIndex::new(spec.mixture(label).flat()).expect("validated mixture");
    let other_label = if label == Label::Benign { Label::Malignant } else { Label::Benign };
    let other = WeightedIndex::new(spec.mixture(other_label).flat()).expect("validated mixture");

    let n = nx * ny * nz;
    let mut phases: Vec<Vec<f64>> = vec![vec![spec.baseline; n]; PHASE_COUNT];
    let mut voxel_types = Vec::new();
    let mut off_class = Vec::new();
    for i in mask.indices() {
        let off = rng.random::<f64>() < spec.heterogeneity;
        let k = if off { other.sample(&mut rng) } else { own.sample(&mut rng) };
        let (inflow, outflow) = (INFLOW_TYPES[k / 3], OUTFLOW_TYPES[k % 3]);
        let curve = kinetic_curve(inflow, outflow, spec.baseline);
        for (p, c) in phases.iter_mut().zip(curve) {
            p[i] = c;
        }
        voxel_types.push((inflow, outflow));
        off_class.push(off);
    }

    if spec.noise_std > 0.0 {
        let noise = Normal::new(0.0, spec.noise_std).expect("validated noise std");
        for p in phases.iter_mut() {
            for v in p.iter_mut() {
                *v += noise.sample(&mut rng);
            }
        }
    }
    let volumes = phases
        .into_iter()
        .map(|p| Volume3D::new(spec.dims, spec.spacing, p.into_iter().map(|v| v as f32 as f64).collect()))
        .collect::<Result<Vec<_>>>()?;
    let series = DceSeries::from_vec(volumes, DEFAULT_PHASE_INTERVAL_S)?;
    debug_assert_eq!(linear_index(spec.dims, nx - 1, ny - 1, nz - 1), n - 1);
    let roi = LesionRoi::new(patient_id, lesion_id, mask, label)?;
    Ok(PhantomCase {
        series,
        roi,
        voxel_types,
        off_class,
    })
}

/// Identity and label of one corpus case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CasePlan {
    pub index: u64,
    pub patient_id: String,
    pub lesion_id: String,
    pub label: Label,
}

/// Labels and patient grouping for an `n`-case corpus.
///
/// `floor(n · balance)` cases are malignant (so benign receives any rounding
/// remainder), in a seeded random order. Each case after the first joins the
/// previous case's patient with probability 1/3, giving 1.5 lesions per
/// patient on average.
pub fn corpus_plan(spec: &PhantomSpec, n: usize, balance: f64) -> Result<Vec<CasePlan>> {
    if !(0.0..=1.0).contains(&balance) {
        return Err(Error::InvalidConfig(format!("class balance {balance} must lie in [0, 1]")));
    }
    let n_mal = (n as f64 * balance).floor() as usize;
    let mut labels: Vec<Label> = (0..n)
        .map(|i| if i < n_mal { Label::Malignant } else { Label::Benign })
        .collect();
    let mut rng = case_rng(spec.seed, u64::MAX);
    labels.shuffle(&mut rng);

    let mut plans = Vec::with_capacity(n);
    let mut patient = 0usize;
    let mut lesion_in_patient = 0usize;
    for (i, label) in labels.into_iter().enumerate() {
        if i == 0 || rng.random::<f64>() >= 1.0 / 3.0 {
            patient += 1;
            lesion_in_patient = 1;
        } else {
            lesion_in_patient += 1;
        }
        plans.push(CasePlan {
            index: i as u64,
            patient_id: format!("P{patient:04}"),
            lesion_id: format!("L{lesion_in_patient}"),
            label,
        });
    }
    Ok(plans)
}

pub fn generate_planned(spec: &PhantomSpec, plan: &CasePlan) -> Result<PhantomCase> {
    generate_case(spec, plan.label, plan.index, plan.patient_id.clone(), plan.lesion_id.clone())
}

/// Writes an `n`-case corpus as `f32` raw volumes plus `manifest.tsv`.
pub fn generate_corpus(spec: &PhantomSpec, n: usize, balance: f64, out_dir: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let out_dir = out_dir.as_ref();
    spec.validate()?;
    let plans = corpus_plan(spec, n, balance)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let records = plans
        .par_iter()
        .map(|plan| {
            let case = generate_planned(spec, plan)?;
            let stem = format!("case{:04}", plan.index);
            let phases: [std::path::PathBuf; PHASE_COUNT] =
                std::array::from_fn(|k| out_dir.join(format!("{stem}_c{k}.raw")));
            for (p, v) in phases.iter().zip(case.series.phases()) {
                write_raw(p, v, RawDtype::F32)?;
            }
            let mask = out_dir.join(format!("{stem}_mask.raw"));
            let mask_vol = Volume3D::new(
                spec.dims,
                spec.spacing,
                case.roi.mask.data().iter().map(|&b| f64::from(u8::from(b))).collect(),
            )?;
            write_raw(&mask, &mask_vol, RawDtype::F32)?;
            Ok(ManifestRecord {
                patient_id: plan.patient_id.clone(),
                lesion_id: plan.lesion_id.clone(),
                label: plan.label,
                phases,
                mask,
                line: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_manifest(out_dir.join(MANIFEST_NAME), &records)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::{classify_delayed_value, classify_initial_value, extract_dynamic_features};

    #[test]
    fn curve_examples() {
        let c = kinetic_curve(InitialType::Fast, DelayedType::Washout, 100.0);
        assert_eq!(c[0], 100.0);
        assert_eq!(c[1], 250.0);
        assert_eq!(c[5], 187.5);
        let c = kinetic_curve(InitialType::Slow, DelayedType::Persistent, 100.0);
        assert_eq!(c[1], 130.0);
        assert_eq!(c[5], 162.5);
    }

    #[test]
    fn every_curve_classifies_back_for_either_peak_phase() {
        for i in INFLOW_TYPES {
            for o in OUTFLOW_TYPES {
                let c = kinetic_curve(i, o, 100.0);
                for peak in [1, 2] {
                    assert_eq!(classify_initial_value(100.0 * (c[peak] - c[0]) / c[0]), i);
                    assert_eq!(classify_delayed_value(100.0 * (c[5] - c[peak]) / c[peak]), o);
                }
            }
        }
    }

    fn small_spec() -> PhantomSpec {
        PhantomSpec {
            dims: [24, 24, 24],
            spacing: [1.0; 3],
            semi_axes_mm: [5.0, 5.0, 4.0],
            ..PhantomSpec::default()
        }
    }

    #[test]
    fn pure_noise_free_malignant_lesion() {
        let spec = PhantomSpec {
            noise_std: 0.0,
            heterogeneity: 0.0,
            malignant: KineticMixture::pure(InitialType::Fast, DelayedType::Washout),
            ..small_spec()
        };
        let case = generate_case(&spec, Label::Malignant, 3, "p", "l").unwrap();
        let f = extract_dynamic_features(&case.series, &case.roi, 70.0).unwrap();
        assert_eq!(f.washout_ratio, 100.0);
        assert_eq!(f.fast_ratio, 100.0);
    }

    #[test]
    fn deterministic_per_seed_and_index() {
        let spec = small_spec();
        let a = generate_case(&spec, Label::Benign, 5, "p", "l").unwrap();
        let b = generate_case(&spec, Label::Benign, 5, "p", "l").unwrap();
        let c = generate_case(&spec, Label::Benign, 6, "p", "l").unwrap();
        for k in 0..PHASE_COUNT {
            assert_eq!(a.series.phase(k), b.series.phase(k));
        }
        assert_ne!(a.series.phase(1), c.series.phase(1));
    }

    #[test]
    fn spec_validation() {
        let too_big = PhantomSpec {
            semi_axes_mm: [40.0, 8.0, 6.0],
            ..PhantomSpec::default()
        };
        assert!(matches!(too_big.validate(), Err(Error::LesionDoesNotFit(_))));
        let bad_mix = PhantomSpec {
            benign: KineticMixture::product([0.5, 0.5, 0.5], [1.0, 0.0, 0.0]),
            ..PhantomSpec::default()
        };
        assert!(matches!(bad_mix.validate(), Err(Error::InvalidConfig(_))));
        assert!(PhantomSpec::default().validate().is_ok());
    }

    #[test]
    fn plan_counts_and_grouping() {
        let spec = PhantomSpec::default();
        let plan = corpus_plan(&spec, 10, 0.5).unwrap();
        assert_eq!(plan.iter().filter(|p| p.label == Label::Malignant).count(), 5);
        let plan = corpus_plan(&spec, 7, 0.5).unwrap();
        assert_eq!(plan.iter().filter(|p| p.label == Label::Benign).count(), 4);
        let plan = corpus_plan(&spec, 3000, 0.5).unwrap();
        let patients: std::collections::HashSet<_> = plan.iter().map(|p| &p.patient_id).collect();
        let per_patient = 3000.0 / patients.len() as f64;
        assert!((per_patient - 1.5).abs() < 0.1, "{per_patient}");
        assert!(corpus_plan(&spec, 10, 1.5).is_err());
    }
}
