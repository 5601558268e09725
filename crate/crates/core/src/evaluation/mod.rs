//! Metrics, ROC analysis and patient-grouped cross-validation.

pub mod crossval;
pub mod folds;
pub mod metrics;

pub use crossval::{
    cross_validate, cross_validate_with_folds, fit_fold_model, score_metrics, CvConfig, EvalReport,
    FoldModel, FoldReport, MetricValues, Metrics, OutOfFoldScore,
};
pub use folds::{make_folds, FoldAssignment};
pub use metrics::{confusion_metrics, mann_whitney_auc, roc_auc, roc_curve, trapezoid_auc, Confusion, RocPoint};
