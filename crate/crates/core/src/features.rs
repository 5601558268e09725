//! Per-lesion feature vectors and the lesion × feature table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetic::{extract_dynamic_features, DYNAMIC_FEATURE_NAMES, DEFAULT_FTV_THRESHOLD_PCT};
use crate::radiomics::{extract_radiomic_features, radiomic_feature_names, RadiomicsConfig};
use crate::volume::{DceSeries, Label, LesionRoi};

pub const DYNAMIC_PREFIX: &str = "dynamic_";

/// Which family of columns a feature belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureBlock {
    Dynamic,
    Radiomic,
}

impl FeatureBlock {
    pub fn of(name: &str) -> FeatureBlock {
        if name.starts_with(DYNAMIC_PREFIX) {
            FeatureBlock::Dynamic
        } else {
            FeatureBlock::Radiomic
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureBlock::Dynamic => "dynamic",
            FeatureBlock::Radiomic => "radiomic",
        }
    }
}

/// Feature columns fed to a classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Dynamic,
    Radiomic,
    Combined,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Dynamic, FeatureSet::Radiomic, FeatureSet::Combined];

    pub fn blocks(self) -> &'static [FeatureBlock] {
        match self {
            FeatureSet::Dynamic => &[FeatureBlock::Dynamic],
            FeatureSet::Radiomic => &[FeatureBlock::Radiomic],
            FeatureSet::Combined => &[FeatureBlock::Dynamic, FeatureBlock::Radiomic],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Dynamic => "dynamic",
            FeatureSet::Radiomic => "radiomic",
            FeatureSet::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureSet> {
        match s {
            "dynamic" => Some(FeatureSet::Dynamic),
            "radiomic" => Some(FeatureSet::Radiomic),
            "combined" => Some(FeatureSet::Combined),
            _ => None,
        }
    }
}

impl std::fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    pub ftv_threshold_pct: f64,
    pub radiomics: RadiomicsConfig,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            ftv_threshold_pct: DEFAULT_FTV_THRESHOLD_PCT,
            radiomics: RadiomicsConfig::default(),
        }
    }
}

/// Canonical column order: 11 dynamic features then the radiomic catalog.
pub fn feature_names(config: &ExtractionConfig) -> Vec<String> {
    let mut names: Vec<String> = DYNAMIC_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend(radiomic_feature_names(&config.radiomics.catalog));
    names
}

/// Dynamic and radiomic features of one lesion in canonical order.
pub fn extract_lesion_features(
    series: &DceSeries,
    roi: &LesionRoi,
    config: &ExtractionConfig,
) -> Result<Vec<f64>> {
    let wrap = |e: Error| Error::Lesion {
        patient_id: roi.patient_id.clone(),
        lesion_id: roi.lesion_id.clone(),
        source: Box::new(e),
    };
    let dynamic = extract_dynamic_features(series, roi, config.ftv_threshold_pct).map_err(wrap)?;
    let radiomic = extract_radiomic_features(series, roi, &config.radiomics).map_err(wrap)?;
    let mut values = dynamic.to_array().to_vec();
    values.extend(radiomic.values);
    Ok(values)
}

/// Lesions as rows, named features as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub patient_ids: Vec<String>,
    pub lesion_ids: Vec<String>,
    pub labels: Vec<Label>,
    /// Row-major `n_rows × n_cols`.
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn empty(names: Vec<String>) -> Self {
        Self {
            names,
            patient_ids: Vec::new(),
            lesion_ids: Vec::new(),
            labels: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push_row(
        &mut self,
        patient_id: impl Into<String>,
        lesion_id: impl Into<String>,
        label: Label,
        row: &[f64],
    ) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: self.names.len(),
            });
        }
        self.patient_ids.push(patient_id.into());
        self.lesion_ids.push(lesion_id.into());
        self.labels.push(label);
        self.values.extend_from_slice(row);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.values[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Labels as 0 (benign) / 1 (malignant).
    pub fn binary_labels(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.as_binary()).collect()
    }

    pub fn block_columns(&self, block: FeatureBlock) -> Vec<usize> {
        (0..self.n_cols())
            .filter(|&j| FeatureBlock::of(&self.names[j]) == block)
            .collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(self.n_rows() * cols.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        FeatureMatrix {
            names: cols.iter().map(|&j| self.names[j].clone()).collect(),
            patient_ids: self.patient_ids.clone(),
            lesion_ids: self.lesion_ids.clone(),
            labels: self.labels.clone(),
            values,
        }
    }

    pub fn select_names(&self, names: &[String]) -> Result<FeatureMatrix> {
        let cols = names
            .iter()
            .map(|n| self.column_index(n).ok_or_else(|| Error::UnknownFeature(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_columns(&cols))
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut out = FeatureMatrix::empty(self.names.clone());
        for &i in rows {
            out.patient_ids.push(self.patient_ids[i].clone());
            out.lesion_ids.push(self.lesion_ids[i].clone());
            out.labels.push(self.labels[i]);
            out.values.extend_from_slice(self.row(i));
        }
        out
    }

    /// Restricts the columns to the blocks of `set`, keeping their order.
    pub fn restrict(&self, set: FeatureSet) -> FeatureMatrix {
        let cols: Vec<usize> = (0..self.n_cols())
            .filter(|&j| set.blocks().contains(&FeatureBlock::of(&self.names[j])))
            .collect();
        self.select_columns(&cols)
    }
}
