//! Run configuration: defaults, then a `key = value` file, then flags.

use std::path::Path;

use dce_radiomics::evaluation::CvConfig;
use dce_radiomics::filters::{default_catalog, DEFAULT_LOG_SIGMAS_MM};
use dce_radiomics::kinetic::DEFAULT_FTV_THRESHOLD_PCT;
use dce_radiomics::lda::DEFAULT_RIDGE;
use dce_radiomics::radiomics::{RadiomicsConfig, DEFAULT_BIN_COUNT};
use dce_radiomics::selection::{DEFAULT_CV_FOLDS, DEFAULT_GRID_SIZE};
use dce_radiomics::{ExtractionConfig, FeatureSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub bin_count: usize,
    pub log_sigmas_mm: Vec<f64>,
    pub ftv_threshold_pct: f64,
    pub lasso_grid_size: usize,
    pub lasso_cv_folds: usize,
    pub lda_ridge: f64,
    pub cv_folds: usize,
    pub seed: u64,
    pub feature_set: FeatureSet,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bin_count: DEFAULT_BIN_COUNT,
            log_sigmas_mm: DEFAULT_LOG_SIGMAS_MM.to_vec(),
            ftv_threshold_pct: DEFAULT_FTV_THRESHOLD_PCT,
            lasso_grid_size: DEFAULT_GRID_SIZE,
            lasso_cv_folds: DEFAULT_CV_FOLDS,
            lda_ridge: DEFAULT_RIDGE,
            cv_folds: 5,
            seed: 0,
            feature_set: FeatureSet::Combined,
        }
    }
}

/// Every key optional; anything else is rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub bin_count: Option<usize>,
    pub log_sigmas_mm: Option<Vec<f64>>,
    pub ftv_threshold_pct: Option<f64>,
    pub lasso_grid_size: Option<usize>,
    pub lasso_cv_folds: Option<usize>,
    pub lda_ridge: Option<f64>,
    pub cv_folds: Option<usize>,
    pub seed: Option<u64>,
    pub feature_set: Option<FeatureSet>,
}

impl ConfigOverrides {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

impl RunConfig {
    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &o.$f { self.$f = v.clone(); })*};
        }
        set!(bin_count, log_sigmas_mm, ftv_threshold_pct, lasso_grid_size, lasso_cv_folds, lda_ridge, cv_folds, seed, feature_set);
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(2..=u16::MAX as usize).contains(&self.bin_count) {
            return Err(format!("bin_count must lie in [2, 65535], got {}", self.bin_count));
        }
        if let Some(s) = self.log_sigmas_mm.iter().find(|s| !s.is_finite() || **s <= 0.0) {
            return Err(format!("log_sigmas_mm entries must be positive, got {s}"));
        }
        if !self.ftv_threshold_pct.is_finite() {
            return Err("ftv_threshold_pct must be finite".into());
        }
        if self.lasso_grid_size < 1 {
            return Err("lasso_grid_size must be >= 1".into());
        }
        if self.lasso_cv_folds < 2 {
            return Err(format!("lasso_cv_folds must be >= 2, got {}", self.lasso_cv_folds));
        }
        if !self.lda_ridge.is_finite() || self.lda_ridge < 0.0 {
            return Err(format!("lda_ridge must be >= 0, got {}", self.lda_ridge));
        }
        if self.cv_folds < 2 {
            return Err(format!("cv_folds must be >= 2, got {}", self.cv_folds));
        }
        Ok(())
    }

    pub fn extraction(&self) -> ExtractionConfig {
        ExtractionConfig {
            ftv_threshold_pct: self.ftv_threshold_pct,
            radiomics: RadiomicsConfig {
                bin_count: self.bin_count,
                catalog: default_catalog(&self.log_sigmas_mm),
                gldm_alpha: 0,
            },
        }
    }

    pub fn crossval(&self, feature_set: FeatureSet) -> CvConfig {
        CvConfig {
            feature_set,
            folds: self.cv_folds,
            seed: self.seed,
            lasso_grid_size: self.lasso_grid_size,
            lasso_cv_folds: self.lasso_cv_folds,
            lda_ridge: self.lda_ridge,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults_and_rejects_unknown_keys() {
        let o = ConfigOverrides::parse("bin_count = 16\nlog_sigmas_mm = [2.0]\nfeature_set = \"dynamic\"\n").unwrap();
        let mut c = RunConfig::default();
        c.apply(&o);
        assert_eq!(c.bin_count, 16);
        assert_eq!(c.log_sigmas_mm, vec![2.0]);
        assert_eq!(c.feature_set, FeatureSet::Dynamic);
        assert_eq!(c.cv_folds, 5);
        assert!(ConfigOverrides::parse("bins = 3").is_err());
    }

    #[test]
    fn validation_ranges() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.cv_folds = 1;
        assert!(c.validate().is_err());
        let c = RunConfig {
            log_sigmas_mm: vec![0.0],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
