//! Two-class linear discriminant analysis.
//!
//! Samples are projected onto `w = S⁻¹(μ₁ − μ₀)` where `S` is the pooled
//! within-class covariance; the score `w·x + b` is positive on the
//! malignant side of the equal-covariance Gaussian decision boundary.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// (benign, malignant) class frequencies.
    pub priors: (f64, f64),
}

/// Fits on row vectors `x` with labels 0 (benign) / 1 (malignant).
///
/// The pooled covariance uses divisor `n − 2` and is regularized as
/// `S + ridge · (trace(S) / d) · I`.
pub fn lda_fit(x: &[Vec<f64>], y: &[u8], ridge: f64) -> Result<LdaModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let d = x.first().map_or(0, |r| r.len());
    if d == 0 {
        return Err(Error::TooFewSamples("LDA needs at least one feature".into()));
    }
    if let Some(r) = x.iter().find(|r| r.len() != d) {
        return Err(Error::LengthMismatch {
            left: r.len(),
            right: d,
        });
    }
    let n1 = y.iter().filter(|&&l| l == 1).count();
    let n0 = y.len() - n1;
    if n0 < 2 || n1 < 2 {
        return Err(Error::TooFewSamples(format!(
            "LDA needs >= 2 samples per class, got {n0} benign and {n1} malignant"
        )));
    }

    let mut means = [DVector::<f64>::zeros(d), DVector::<f64>::zeros(d)];
    for (row, &l) in x.iter().zip(y) {
        means[l as usize] += DVector::from_column_slice(row);
    }
    means[0] /= n0 as f64;
    means[1] /= n1 as f64;

    let mut s = DMatrix::<f64>::zeros(d, d);
    for (row, &l) in x.iter().zip(y) {
        let c = DVector::from_column_slice(row) - &means[l as usize];
        s.ger(1.0, &c, &c, 1.0);
    }
    s /= (x.len() - 2) as f64;
    let shift = ridge * s.trace() / d as f64;
    for i in 0..d {
        s[(i, i)] += shift;
    }

    let diff = &means[1] - &means[0];
    let w = match s.clone().cholesky() {
        Some(ch) => ch.solve(&diff),
        None => s.lu().solve(&diff).ok_or(Error::SingularCovariance)?,
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    let (p0, p1) = (n0 as f64 / y.len() as f64, n1 as f64 / y.len() as f64);
    let midpoint = (&means[0] + &means[1]) * 0.5;
    let bias = -w.dot(&midpoint) + (p1 / p0).ln();
    Ok(LdaModel {
        weights: w.iter().copied().collect(),
        bias,
        priors: (p0, p1),
    })
}

impl LdaModel {
    /// `w·x + b`; larger means more malignant.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.weights.len(),
            });
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// 1 (malignant) iff the score is strictly positive.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.score(x)? > 0.0))
    }
}

pub fn lda_score(model: &LdaModel, x: &[f64]) -> Result<f64> {
    model.score(x)
}

pub fn lda_predict(model: &LdaModel, x: &[f64]) -> Result<u8> {
    model.predict(x)
}
