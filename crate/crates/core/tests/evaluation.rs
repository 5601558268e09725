mod common;

use std::collections::{HashMap, HashSet};

use common::pairwise_auc;
use dce_radiomics::evaluation::*;
use dce_radiomics::{FeatureMatrix, FeatureSet, Label};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// 40 patients with 1-3 lesions each; a few columns carry label signal.
fn synthetic_matrix(seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..6)
        .map(|j| format!("dynamic_f{j}"))
        .chain((0..10).map(|j| format!("original_firstorder_f{j}")))
        .collect();
    let mut m = FeatureMatrix::empty(names);
    for p in 0..40 {
        let label = if p % 2 == 0 { Label::Benign } else { Label::Malignant };
        let shift = if label == Label::Malignant { 1.5 } else { 0.0 };
        for l in 0..rng.random_range(1..=3) {
            let row: Vec<f64> = (0..16)
                .map(|j| rng.sample::<f64, _>(StandardNormal) + if j % 5 == 0 { shift } else { 0.0 })
                .collect();
            m.push_row(format!("P{p:03}"), format!("L{l}"), label, &row).unwrap();
        }
    }
    m
}

fn small_config(set: FeatureSet) -> CvConfig {
    CvConfig {
        feature_set: set,
        lasso_grid_size: 20,
        ..CvConfig::default()
    }
}

#[test]
fn constructed_auc_cases() {
    let auc = |b: &[f64], m: &[f64]| {
        let labels: Vec<u8> = b.iter().map(|_| 0).chain(m.iter().map(|_| 1)).collect();
        let scores: Vec<f64> = b.iter().chain(m).copied().collect();
        mann_whitney_auc(&labels, &scores).unwrap()
    };
    assert_eq!(auc(&[0.1, 0.2], &[0.8, 0.9]), 1.0);
    assert_eq!(auc(&[0.1, 0.9], &[0.5, 0.8]), 0.5);
    assert_eq!(auc(&[0.3, 0.3], &[0.3, 0.3]), 0.5);
}

#[test]
fn folds_group_patients_and_balance_strata() {
    let m = synthetic_matrix(3);
    let f = make_folds(&m.patient_ids, &m.labels, 5, 11).unwrap();
    let mut patient_fold: HashMap<&str, usize> = HashMap::new();
    for (p, &k) in m.patient_ids.iter().zip(&f.folds) {
        assert_eq!(*patient_fold.entry(p).or_insert(k), k, "patient {p} split across folds");
    }
    for label in [Label::Benign, Label::Malignant] {
        let mut per_fold = vec![HashSet::new(); 5];
        for (p, (&k, &l)) in m.patient_ids.iter().zip(f.folds.iter().zip(&m.labels)) {
            if l == label {
                per_fold[k].insert(p);
            }
        }
        let sizes: Vec<usize> = per_fold.iter().map(HashSet::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
    }
    assert_eq!(f, make_folds(&m.patient_ids, &m.labels, 5, 11).unwrap());
}

#[test]
fn test_fold_labels_never_reach_the_model() {
    let m = synthetic_matrix(5);
    let config = small_config(FeatureSet::Combined);
    let folds = make_folds(&m.patient_ids, &m.labels, config.folds, config.seed).unwrap();
    let base = cross_validate_with_folds(&m, &folds, &config).unwrap();
    for fold in 0..folds.k {
        let mut flipped = m.clone();
        for i in folds.test_rows(fold) {
            flipped.labels[i] = Label::from_binary(1 - flipped.labels[i].as_binary());
        }
        let r = cross_validate_with_folds(&flipped, &folds, &config).unwrap();
        for i in folds.test_rows(fold) {
            assert_eq!(r.scores[i].score.to_bits(), base.scores[i].score.to_bits());
        }
        assert_eq!(r.folds[fold].selected, base.folds[fold].selected);
    }
}

#[test]
fn cross_validation_is_deterministic_and_informative() {
    let m = synthetic_matrix(9);
    for set in FeatureSet::ALL {
        let config = small_config(set);
        let a = cross_validate(&m, &config).unwrap();
        let b = cross_validate(&m, &config).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.pooled.values.auc > 0.8, "{set}: {}", a.pooled.values.auc);
        assert_eq!(a.scores.len(), m.n_rows());
        assert_eq!(a.folds.iter().map(|f| f.n_test).sum::<usize>(), m.n_rows());
        let labels = m.binary_labels();
        let oof: Vec<f64> = a.scores.iter().map(|s| s.score).collect();
        assert!((trapezoid_auc(&a.roc) - a.pooled.values.auc).abs() < 1e-12);
        assert_eq!(a.pooled.values.auc, mann_whitney_auc(&labels, &oof).unwrap());
    }
}

#[test]
fn report_roundtrips_through_json() {
    let m = synthetic_matrix(1);
    let r = cross_validate(&m, &small_config(FeatureSet::Dynamic)).unwrap();
    let back: EvalReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.config_fingerprint, small_config(FeatureSet::Dynamic).fingerprint());
    assert_ne!(r.config_fingerprint, small_config(FeatureSet::Radiomic).fingerprint());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn auc_statistics_agree(
        scores in prop::collection::vec((0u8..2, -3i32..3), 2..60),
    ) {
        let labels: Vec<u8> = scores.iter().map(|s| s.0).collect();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        // Coarse integer scores force plenty of ties.
        let s: Vec<f64> = scores.iter().map(|s| s.1 as f64 * 0.25).collect();
        let mw = mann_whitney_auc(&labels, &s).unwrap();
        let (auc, points) = roc_auc(&labels, &s).unwrap();
        prop_assert_eq!(auc, mw);
        prop_assert!((trapezoid_auc(&points) - mw).abs() < 1e-12);
        prop_assert!((pairwise_auc(&labels, &s) - mw).abs() < 1e-12);
        prop_assert!(points.windows(2).all(|w| w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr));
        let last = points.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn confusion_metrics_are_consistent(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..80)) {
        let labels: Vec<u8> = pairs.iter().map(|p| p.0).collect();
        let preds: Vec<u8> = pairs.iter().map(|p| p.1).collect();
        let c = Confusion::from_predictions(&labels, &preds).unwrap();
        prop_assert_eq!(c.total(), pairs.len());
        let correct = pairs.iter().filter(|p| p.0 == p.1).count();
        prop_assert!((c.accuracy() - correct as f64 / pairs.len() as f64).abs() < 1e-15);
        for v in [c.recall(), c.precision(), c.f1()] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
