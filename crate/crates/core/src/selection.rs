//! LASSO feature selection, run separately on each feature block.
//!
//! Columns are standardized (sample standard deviation), the 0/1 label is
//! centred, and the penalty weight is chosen by grouped, stratified
//! cross-validation over a log-spaced grid. Features with a nonzero
//! coefficient at the chosen weight are kept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::folds::make_folds;
use crate::features::{FeatureBlock, FeatureMatrix};
use crate::volume::Label;

pub const DEFAULT_GRID_SIZE: usize = 100;
pub const DEFAULT_CV_FOLDS: usize = 5;
/// Smallest grid value relative to the largest.
pub const GRID_RATIO: f64 = 1e-3;
pub const TOLERANCE: f64 = 1e-7;
pub const MAX_SWEEPS: usize = 100_000;

/// Column-major dense design.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub n_rows: usize,
    pub columns: Vec<Vec<f64>>,
}

impl Design {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |c| c.len());
        if let Some(c) = columns.iter().find(|c| c.len() != n_rows) {
            return Err(Error::LengthMismatch {
                left: c.len(),
                right: n_rows,
            });
        }
        Ok(Self { n_rows, columns })
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn predict_row(&self, row: usize, coef: &[f64]) -> f64 {
        self.columns.iter().zip(coef).map(|(c, b)| c[row] * b).sum()
    }

    fn select_rows(&self, rows: &[usize]) -> Design {
        Design {
            n_rows: rows.len(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }
}

/// Standardized columns plus the parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Zero-variance columns removed before standardization.
    pub dropped: Vec<String>,
    pub design: Design,
}

fn mean_and_sample_std(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Centres every column and scales it to unit sample standard deviation.
pub fn standardize(x: &FeatureMatrix) -> Result<Standardized> {
    if x.n_rows() < 2 {
        return Err(Error::TooFewRows(format!("standardize needs >= 2 rows, got {}", x.n_rows())));
    }
    let mut out = Standardized {
        names: Vec::new(),
        means: Vec::new(),
        stds: Vec::new(),
        dropped: Vec::new(),
        design: Design {
            n_rows: x.n_rows(),
            columns: Vec::new(),
        },
    };
    for j in 0..x.n_cols() {
        let col = x.column(j);
        let (mean, std) = mean_and_sample_std(&col);
        if !(std > 1e-12 * mean.abs().max(1.0)) {
            out.dropped.push(x.names[j].clone());
            continue;
        }
        out.names.push(x.names[j].clone());
        out.means.push(mean);
        out.stds.push(std);
        out.design.columns.push(col.iter().map(|v| (v - mean) / std).collect());
    }
    Ok(out)
}

#[inline]
pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    z.signum() * (z.abs() - lambda).max(0.0)
}

/// `(1/2n)·‖y − Xβ‖² + λ·‖β‖₁`
pub fn lasso_objective(x: &Design, y: &[f64], coef: &[f64], lambda: f64) -> f64 {
    let n = x.n_rows as f64;
    let rss: f64 = (0..x.n_rows)
        .map(|i| {
            let r = y[i] - x.predict_row(i, coef);
            r * r
        })
        .sum();
    rss / (2.0 * n) + lambda * coef.iter().map(|b| b.abs()).sum::<f64>()
}

/// Largest penalty with a nonzero solution: `max_j |x_jᵀy| / n`.
pub fn lambda_max(x: &Design, y: &[f64]) -> f64 {
    let n = x.n_rows as f64;
    x.columns
        .iter()
        .map(|c| (c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / n).abs())
        .fold(0.0, f64::max)
}

/// Log-spaced grid from `lmax` down to `lmax · GRID_RATIO`.
pub fn lambda_grid(lmax: f64, size: usize) -> Vec<f64> {
    if size <= 1 || lmax <= 0.0 {
        return vec![lmax.max(0.0)];
    }
    let (hi, lo) = (lmax.ln(), (lmax * GRID_RATIO).ln());
    (0..size)
        .map(|k| {
            if k == 0 {
                lmax
            } else {
                (hi + (lo - hi) * k as f64 / (size - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    /// False when the sweep cap stopped the descent.
    pub converged: bool,
}

/// Cached Gram rows `x_jᵀx_k / n`, shared along a path.
struct GramCache {
    rows: Vec<Option<Vec<f64>>>,
}

impl GramCache {
    fn new(p: usize) -> Self {
        Self { rows: vec![None; p] }
    }

    fn ensure(&mut self, x: &Design, j: usize) {
        if self.rows[j].is_none() {
            let n = x.n_rows as f64;
            let cj = &x.columns[j];
            self.rows[j] = Some(
                x.columns
                    .iter()
                    .map(|ck| cj.iter().zip(ck).map(|(a, b)| a * b).sum::<f64>() / n)
                    .collect(),
            );
        }
    }
}

/// Cyclic coordinate descent with soft-thresholding, starting from `init`.
///
/// Full sweeps visit every coordinate in column order. Between full sweeps
/// the nonzero coordinates are cycled alone, using cached Gram rows, until
/// they settle. The fit is converged once a full sweep moves no coefficient
/// by `TOLERANCE` or more. `on_sweep` sees the coefficients after every
/// sweep of either kind; each counts towards `MAX_SWEEPS`.
pub fn lasso_coordinate_descent(
    x: &Design,
    y: &[f64],
    lambda: f64,
    init: &[f64],
    on_sweep: impl FnMut(&[f64]),
) -> Result<LassoFit> {
    let fit = lasso_cd_cached(x, y, lambda, init, &mut GramCache::new(x.n_cols()), on_sweep)?;
    if !fit.converged {
        return Err(Error::NonConvergence { sweeps: fit.sweeps });
    }
    Ok(fit)
}

fn lasso_cd_cached(
    x: &Design,
    y: &[f64],
    lambda: f64,
    init: &[f64],
    gram: &mut GramCache,
    mut on_sweep: impl FnMut(&[f64]),
) -> Result<LassoFit> {
    if y.len() != x.n_rows {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.n_rows,
        });
    }
    if init.len() != x.n_cols() {
        return Err(Error::LengthMismatch {
            left: init.len(),
            right: x.n_cols(),
        });
    }
    let n = x.n_rows as f64;
    let norms: Vec<f64> = x
        .columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>() / n)
        .collect();
    let mut coef = init.to_vec();
    let residual = |coef: &[f64]| -> Vec<f64> {
        let mut r = y.to_vec();
        for (c, &b) in x.columns.iter().zip(coef) {
            if b != 0.0 {
                r.iter_mut().zip(c).for_each(|(r, a)| *r -= a * b);
            }
        }
        r
    };
    let mut sweeps = 0;

    loop {
        let mut resid = residual(&coef);
        let mut max_change = 0.0f64;
        for (j, col) in x.columns.iter().enumerate() {
            if norms[j] == 0.0 {
                coef[j] = 0.0;
                continue;
            }
            let old = coef[j];
            let rho = col.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n + norms[j] * old;
            let new = soft_threshold(rho, lambda) / norms[j];
            if new != old {
                let delta = new - old;
                resid.iter_mut().zip(col).for_each(|(r, a)| *r -= a * delta);
                coef[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        sweeps += 1;
        on_sweep(&coef);
        if max_change < TOLERANCE || sweeps >= MAX_SWEEPS {
            return Ok(LassoFit {
                coefficients: coef,
                sweeps,
                converged: max_change < TOLERANCE,
            });
        }

        let active: Vec<usize> = (0..coef.len()).filter(|&j| coef[j] != 0.0).collect();
        for &j in &active {
            gram.ensure(x, j);
        }
        // grad[a] = x_jᵀr / n for j = active[a]
        let mut grad: Vec<f64> = active
            .iter()
            .map(|&j| x.columns[j].iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n)
            .collect();
        let mut inner = 0usize;
        loop {
            inner += 1;
            if inner % NEWTON_EVERY == 0 {
                for _ in 0..active.len() {
                    if !newton_step(&active, gram, lambda, &mut coef, &mut grad) {
                        break;
                    }
                }
            }
            let mut max_change = 0.0f64;
            for a in 0..active.len() {
                let j = active[a];
                let old = coef[j];
                let new = soft_threshold(grad[a] + norms[j] * old, lambda) / norms[j];
                if new != old {
                    let delta = new - old;
                    let row = gram.rows[j].as_ref().expect("gram row cached");
                    for (g, &k) in grad.iter_mut().zip(&active) {
                        *g -= row[k] * delta;
                    }
                    coef[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            sweeps += 1;
            on_sweep(&coef);
            if sweeps >= MAX_SWEEPS {
                return Ok(LassoFit {
                    coefficients: coef,
                    sweeps,
                    converged: false,
                });
            }
            if max_change < TOLERANCE {
                break;
            }
        }
    }
}

/// Inner active-set sweeps between attempted Newton steps.
const NEWTON_EVERY: usize = 50;

/// Moves the nonzero coefficients towards the minimizer of the objective on
/// their current sign orthant, stopping at the first sign change. The step is
/// kept only if it lowers the objective; `grad` is updated to match.
/// Returns true when an accepted step was cut short by a sign change.
fn newton_step(active: &[usize], gram: &GramCache, lambda: f64, coef: &mut [f64], grad: &mut [f64]) -> bool {
    let support: Vec<usize> = (0..active.len()).filter(|&a| coef[active[a]] != 0.0).collect();
    let m = support.len();
    if m == 0 {
        return false;
    }
    let row = |a: usize| gram.rows[active[a]].as_ref().expect("gram row cached");
    let g = DMatrix::from_fn(m, m, |r, c| row(support[r])[active[support[c]]]);
    // Minimizer on the orthant solves G β = G β₀ + grad − λ·sign(β₀).
    let rhs = DVector::from_fn(m, |r, _| {
        let a = support[r];
        let gb: f64 = support.iter().map(|&b| row(a)[active[b]] * coef[active[b]]).sum();
        gb + grad[a] - lambda * coef[active[a]].signum()
    });
    // A support wider than the row rank makes G singular; a tiny ridge still
    // gives a descent direction that drives surplus coordinates to zero.
    let ridge = 1e-9 * g.trace() / m as f64;
    let solved = g
        .clone()
        .cholesky()
        .or_else(|| (&g + DMatrix::identity(m, m) * ridge).cholesky())
        .map(|ch| ch.solve(&rhs));
    let Some(target) = solved else {
        return false;
    };
    if target.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let crossing = |r: usize, b: f64| (target[r].signum() != b.signum()).then(|| b / (b - target[r]));
    let mut t = 1.0f64;
    for (r, &a) in support.iter().enumerate() {
        if let Some(tr) = crossing(r, coef[active[a]]) {
            t = t.min(tr);
        }
    }
    // Coordinates that reach zero at `t` (or overshoot by rounding) land on exactly zero.
    let delta: Vec<f64> = support
        .iter()
        .enumerate()
        .map(|(r, &a)| {
            let b = coef[active[a]];
            let stepped = b + t * (target[r] - b);
            if crossing(r, b).is_some_and(|tr| tr <= t) || stepped.signum() != b.signum() {
                -b
            } else {
                stepped - b
            }
        })
        .collect();
    // f(β + Δ) − f(β) = −gradᵀΔ + ½ΔᵀGΔ + λ(‖β + Δ‖₁ − ‖β‖₁)
    let d = DVector::from_column_slice(&delta);
    let mut change = 0.5 * d.dot(&(&g * &d));
    for (r, &a) in support.iter().enumerate() {
        let b = coef[active[a]];
        change += -grad[a] * delta[r] + lambda * ((b + delta[r]).abs() - b.abs());
    }
    if !(change < 0.0) {
        return false;
    }
    for (r, &a) in support.iter().enumerate() {
        let j = active[a];
        coef[j] += delta[r];
        let gj = row(a);
        for (gk, &k) in grad.iter_mut().zip(active) {
            *gk -= gj[k] * delta[r];
        }
    }
    t < 1.0
}

pub fn lasso_fit(x: &Design, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
    Ok(lasso_coordinate_descent(x, y, lambda, &vec![0.0; x.n_cols()], |_| {})?.coefficients)
}

/// Solutions along a descending `grid`, each warm-started from the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    pub coefficients: Vec<Vec<f64>>,
    /// Grid points where the sweep cap, not the tolerance, ended the descent.
    pub capped: usize,
}

pub fn lasso_path(x: &Design, y: &[f64], grid: &[f64]) -> Result<LassoPath> {
    let mut gram = GramCache::new(x.n_cols());
    let mut coef = vec![0.0; x.n_cols()];
    let mut path = LassoPath {
        coefficients: Vec::with_capacity(grid.len()),
        capped: 0,
    };
    for &lambda in grid {
        let fit = lasso_cd_cached(x, y, lambda, &coef, &mut gram, |_| {})?;
        path.capped += usize::from(!fit.converged);
        coef = fit.coefficients;
        path.coefficients.push(coef.clone());
    }
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub grid_size: usize,
    pub cv_folds: usize,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID_SIZE,
            cv_folds: DEFAULT_CV_FOLDS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaCv {
    pub grid: Vec<f64>,
    pub mean_errors: Vec<f64>,
    pub chosen_index: usize,
    pub chosen: f64,
    /// Inner-fold grid points stopped by the sweep cap.
    pub capped: usize,
}

/// Picks the grid value with the lowest mean held-out squared error;
/// ties go to the smaller penalty.
///
/// Folds are grouped by `groups` and stratified by `labels`. Inside each
/// fold the design and response are re-centred on the training rows.
pub fn lambda_path_cv(
    x: &Design,
    y: &[f64],
    groups: &[String],
    labels: &[Label],
    config: &SelectionConfig,
) -> Result<LambdaCv> {
    if y.len() != x.n_rows || groups.len() != x.n_rows || labels.len() != x.n_rows {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x.n_rows,
        });
    }
    let folds = make_folds(groups, labels, config.cv_folds, config.seed)
        .map_err(|e| Error::TooFewRows(format!("LASSO cross-validation: {e}")))?;
    let grid = lambda_grid(lambda_max(x, y), config.grid_size);

    let mut sums = vec![0.0; grid.len()];
    let mut capped = 0;
    for fold in 0..folds.k {
        let train = folds.train_rows(fold);
        let test = folds.test_rows(fold);
        let mut xt = x.select_rows(&train);
        let col_means: Vec<f64> = xt
            .columns
            .iter()
            .map(|c| c.iter().sum::<f64>() / c.len() as f64)
            .collect();
        for (c, m) in xt.columns.iter_mut().zip(&col_means) {
            c.iter_mut().for_each(|v| *v -= m);
        }
        let y_mean = train.iter().map(|&i| y[i]).sum::<f64>() / train.len() as f64;
        let yt: Vec<f64> = train.iter().map(|&i| y[i] - y_mean).collect();

        let path = lasso_path(&xt, &yt, &grid)?;
        capped += path.capped;
        for (k, coef) in path.coefficients.iter().enumerate() {
            let sse: f64 = test
                .iter()
                .map(|&i| {
                    let pred = y_mean
                        + x.columns
                            .iter()
                            .zip(&col_means)
                            .zip(coef)
                            .map(|((c, m), b)| (c[i] - m) * b)
                            .sum::<f64>();
                    (y[i] - pred).powi(2)
                })
                .sum();
            sums[k] += sse / test.len() as f64;
        }
    }
    let mean_errors: Vec<f64> = sums.iter().map(|s| s / folds.k as f64).collect();
    let mut chosen_index = 0;
    for (k, e) in mean_errors.iter().enumerate() {
        if *e <= mean_errors[chosen_index] {
            chosen_index = k;
        }
    }
    Ok(LambdaCv {
        chosen: grid[chosen_index],
        grid,
        mean_errors,
        chosen_index,
        capped,
    })
}

/// Standardization parameters, LASSO coefficients and surviving features of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionModel {
    pub block: FeatureBlock,
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub dropped: Vec<String>,
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub selected: Vec<String>,
    /// `|x_jᵀy| / n` of each retained standardized column.
    pub label_correlations: Vec<f64>,
    pub cv: LambdaCv,
    /// Grid points of the final path stopped by the sweep cap.
    pub capped: usize,
}

impl SelectionModel {
    /// The retained feature with the largest `|x_jᵀy| / n`, i.e. the first
    /// one to enter the LASSO path. Ties go to the earlier column.
    pub fn strongest_feature(&self) -> Option<&str> {
        let mut best: Option<usize> = None;
        for (j, s) in self.label_correlations.iter().enumerate() {
            if best.is_none_or(|b| *s > self.label_correlations[b]) {
                best = Some(j);
            }
        }
        best.map(|j| self.names[j].as_str())
    }
}

/// Centred 0/1 response.
pub fn centered_labels(labels: &[Label]) -> Vec<f64> {
    let n = labels.len() as f64;
    let mean = labels.iter().map(|l| l.as_binary() as f64).sum::<f64>() / n;
    labels.iter().map(|l| l.as_binary() as f64 - mean).collect()
}

/// Standardize → choose λ by CV → fit → keep nonzero coefficients.
pub fn select_block(x: &FeatureMatrix, block: FeatureBlock, config: &SelectionConfig) -> Result<SelectionModel> {
    let cols = x.block_columns(block);
    if cols.is_empty() {
        return Err(Error::UnknownFeature(format!("no {} columns present", block.as_str())));
    }
    let sub = x.select_columns(&cols);
    let std = standardize(&sub)?;
    let y = centered_labels(&x.labels);
    let cv = lambda_path_cv(&std.design, &y, &x.patient_ids, &x.labels, config)?;
    let final_path = lasso_path(&std.design, &y, &cv.grid[..=cv.chosen_index])?;
    let capped = final_path.capped;
    let coefficients = final_path
        .coefficients
        .into_iter()
        .next_back()
        .unwrap_or_else(|| vec![0.0; std.names.len()]);
    let selected = std
        .names
        .iter()
        .zip(&coefficients)
        .filter(|(_, b)| **b != 0.0)
        .map(|(n, _)| n.clone())
        .collect();
    let n = y.len() as f64;
    let label_correlations = std
        .design
        .columns
        .iter()
        .map(|c| (c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / n).abs())
        .collect();
    Ok(SelectionModel {
        block,
        names: std.names,
        means: std.means,
        stds: std.stds,
        dropped: std.dropped,
        lambda: cv.chosen,
        coefficients,
        selected,
        label_correlations,
        cv,
        capped,
    })
}
