use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::folds::{make_folds, FoldAssignment};
use super::metrics::{mann_whitney_auc, roc_curve, Confusion, RocPoint};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSet};
use crate::lda::{lda_fit, LdaModel, DEFAULT_RIDGE};
use crate::selection::{select_block, SelectionConfig, SelectionModel, DEFAULT_CV_FOLDS, DEFAULT_GRID_SIZE};
use crate::volume::Label;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub feature_set: FeatureSet,
    pub folds: usize,
    pub seed: u64,
    pub lasso_grid_size: usize,
    pub lasso_cv_folds: usize,
    pub lda_ridge: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            feature_set: FeatureSet::Combined,
            folds: DEFAULT_FOLDS,
            seed: 0,
            lasso_grid_size: DEFAULT_GRID_SIZE,
            lasso_cv_folds: DEFAULT_CV_FOLDS,
            lda_ridge: DEFAULT_RIDGE,
        }
    }
}

impl CvConfig {
    /// Hex SHA-256 of the canonical JSON rendering.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }

    fn inner_seed(&self, fold: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(fold as u64 + 1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricValues {
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub auc: f64,
}

impl MetricValues {
    fn as_array(&self) -> [f64; 5] {
        [self.accuracy, self.recall, self.precision, self.f1, self.auc]
    }

    fn from_array(a: [f64; 5]) -> Self {
        Self {
            accuracy: a[0],
            recall: a[1],
            precision: a[2],
            f1: a[3],
            auc: a[4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub values: MetricValues,
    pub confusion: Confusion,
}

/// Metrics for scores thresholded at 0 (malignant iff score > 0).
pub fn score_metrics(labels: &[u8], scores: &[f64]) -> Result<Metrics> {
    let predictions: Vec<u8> = scores.iter().map(|&s| u8::from(s > 0.0)).collect();
    let confusion = Confusion::from_predictions(labels, &predictions)?;
    Ok(Metrics {
        values: MetricValues {
            accuracy: confusion.accuracy(),
            recall: confusion.recall(),
            precision: confusion.precision(),
            f1: confusion.f1(),
            auc: mann_whitney_auc(labels, scores)?,
        },
        confusion,
    })
}

/// Everything fitted on one training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldModel {
    pub selections: Vec<SelectionModel>,
    /// Classifier inputs, in block order.
    pub features: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// True when no block kept a feature and the strongest single feature was used instead.
    pub fallback: bool,
    pub lda: LdaModel,
}

impl FoldModel {
    /// Scores rows of `x`; labels of `x` are never read.
    pub fn score(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        let sub = x.select_names(&self.features)?;
        (0..sub.n_rows())
            .map(|i| {
                let z: Vec<f64> = sub
                    .row(i)
                    .iter()
                    .zip(self.means.iter().zip(&self.stds))
                    .map(|(v, (m, s))| (v - m) / s)
                    .collect();
                self.lda.score(&z)
            })
            .collect()
    }
}

/// Per-block LASSO selection followed by LDA on the standardized survivors.
pub fn fit_fold_model(train: &FeatureMatrix, config: &CvConfig, selection_seed: u64) -> Result<FoldModel> {
    let sel_config = SelectionConfig {
        grid_size: config.lasso_grid_size,
        cv_folds: config.lasso_cv_folds,
        seed: selection_seed,
    };
    let selections = config
        .feature_set
        .blocks()
        .iter()
        .map(|&b| select_block(train, b, &sel_config))
        .collect::<Result<Vec<_>>>()?;

    let mut features = Vec::new();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for s in &selections {
        for name in &s.selected {
            let j = s.names.iter().position(|n| n == name).expect("selected names are retained");
            features.push(name.clone());
            means.push(s.means[j]);
            stds.push(s.stds[j]);
        }
    }
    let mut fallback = false;
    if features.is_empty() {
        let best = selections
            .iter()
            .filter_map(|s| {
                let name = s.strongest_feature()?;
                let j = s.names.iter().position(|n| n == name)?;
                Some((s.label_correlations[j], name, s.means[j], s.stds[j]))
            })
            .fold(None::<(f64, &str, f64, f64)>, |acc, c| match acc {
                Some(a) if a.0 >= c.0 => Some(a),
                _ => Some(c),
            })
            .ok_or_else(|| Error::TooFewSamples("no non-constant feature to classify with".into()))?;
        features.push(best.1.to_string());
        means.push(best.2);
        stds.push(best.3);
        fallback = true;
    }

    let sub = train.select_names(&features)?;
    let rows: Vec<Vec<f64>> = (0..sub.n_rows())
        .map(|i| {
            sub.row(i)
                .iter()
                .zip(means.iter().zip(&stds))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();
    let lda = lda_fit(&rows, &train.binary_labels(), config.lda_ridge)?;
    Ok(FoldModel {
        selections,
        features,
        means,
        stds,
        fallback,
        lda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub metrics: Metrics,
    pub selected: Vec<String>,
    pub lambdas: Vec<f64>,
    pub fallback: bool,
    /// LASSO grid points (inner CV and final fit) stopped by the sweep cap.
    pub lasso_capped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutOfFoldScore {
    pub patient_id: String,
    pub lesion_id: String,
    pub label: Label,
    pub fold: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub feature_set: FeatureSet,
    pub seed: u64,
    pub config: CvConfig,
    pub config_fingerprint: String,
    /// Free-form provenance (e.g. the effective run configuration).
    #[serde(default)]
    pub run_config: serde_json::Value,
    pub folds: Vec<FoldReport>,
    /// Metrics over the concatenated out-of-fold scores.
    pub pooled: Metrics,
    pub fold_mean: MetricValues,
    /// Sample standard deviation across folds.
    pub fold_std: MetricValues,
    pub roc: Vec<RocPoint>,
    pub scores: Vec<OutOfFoldScore>,
}

/// Patient-grouped stratified k-fold evaluation of selection + LDA.
pub fn cross_validate(features: &FeatureMatrix, config: &CvConfig) -> Result<EvalReport> {
    let folds = make_folds(&features.patient_ids, &features.labels, config.folds, config.seed)?;
    cross_validate_with_folds(features, &folds, config)
}

pub fn cross_validate_with_folds(
    features: &FeatureMatrix,
    folds: &FoldAssignment,
    config: &CvConfig,
) -> Result<EvalReport> {
    if folds.folds.len() != features.n_rows() {
        return Err(Error::LengthMismatch {
            left: folds.folds.len(),
            right: features.n_rows(),
        });
    }
    let x = features.restrict(config.feature_set);
    let labels = x.binary_labels();

    let per_fold: Vec<(Vec<usize>, FoldModel, Vec<f64>)> = (0..folds.k)
        .into_par_iter()
        .map(|fold| {
            let train = folds.train_rows(fold);
            let test = folds.test_rows(fold);
            let model = fit_fold_model(&x.select_rows(&train), config, config.inner_seed(fold))?;
            let scores = model.score(&x.select_rows(&test))?;
            Ok((test, model, scores))
        })
        .collect::<Result<_>>()?;

    let mut oof = vec![0.0; x.n_rows()];
    let mut fold_reports = Vec::with_capacity(folds.k);
    for (fold, (test, model, scores)) in per_fold.into_iter().enumerate() {
        let test_labels: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
        for (&i, &s) in test.iter().zip(&scores) {
            oof[i] = s;
        }
        fold_reports.push(FoldReport {
            fold,
            n_train: x.n_rows() - test.len(),
            n_test: test.len(),
            metrics: score_metrics(&test_labels, &scores)?,
            selected: model.features.clone(),
            lambdas: model.selections.iter().map(|s| s.lambda).collect(),
            fallback: model.fallback,
            lasso_capped: model.selections.iter().map(|s| s.cv.capped + s.capped).sum(),
        });
    }

    let pooled = score_metrics(&labels, &oof)?;
    let k = fold_reports.len() as f64;
    let arrays: Vec<[f64; 5]> = fold_reports.iter().map(|f| f.metrics.values.as_array()).collect();
    let mut mean = [0.0; 5];
    let mut std = [0.0; 5];
    for m in 0..5 {
        mean[m] = arrays.iter().map(|a| a[m]).sum::<f64>() / k;
        std[m] = if k > 1.0 {
            (arrays.iter().map(|a| (a[m] - mean[m]).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
    }

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        feature_set: config.feature_set,
        seed: config.seed,
        config: config.clone(),
        config_fingerprint: config.fingerprint(),
        run_config: serde_json::Value::Null,
        folds: fold_reports,
        pooled,
        fold_mean: MetricValues::from_array(mean),
        fold_std: MetricValues::from_array(std),
        roc: roc_curve(&labels, &oof)?,
        scores: (0..x.n_rows())
            .map(|i| OutOfFoldScore {
                patient_id: x.patient_ids[i].clone(),
                lesion_id: x.lesion_ids[i].clone(),
                label: x.labels[i],
                fold: folds.folds[i],
                score: oof[i],
            })
            .collect(),
    })
}
